"""Background experiment jobs on a shared worker pool."""

from __future__ import annotations

import threading
import traceback
import uuid
from concurrent.futures import ThreadPoolExecutor


class JobRegistry:
    def __init__(self, workers=2):
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs = {}
        self._lock = threading.Lock()

    def submit(self, kind, fn, out_dir=""):
        job_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._jobs[job_id] = {"id": job_id, "kind": kind, "state": "queued",
                                  "detail": "", "out_dir": out_dir}

        def run():
            with self._lock:
                self._jobs[job_id]["state"] = "running"
            try:
                fn()
                with self._lock:
                    self._jobs[job_id]["state"] = "done"
            except Exception as e:
                with self._lock:
                    self._jobs[job_id]["state"] = "failed"
                    self._jobs[job_id]["detail"] = \
                        f"{type(e).__name__}: {e}\n{traceback.format_exc(limit=3)}"

        self._pool.submit(run)
        return job_id

    def status(self, job_id):
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(job_id)
            return dict(self._jobs[job_id])
