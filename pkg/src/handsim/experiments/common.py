"""Sweep bookkeeping shared by all experiment families.

A sweep is a cartesian grid of named variables.  Results are stored one JSON
line per completed cell in ``results.jsonl`` (append-only, which is what makes
sweeps resumable: rerunning completes only missing cells and never rewrites
finished ones), and ``report.csv`` plus ``summary.json`` are regenerated from
the store on every run.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path


class SweepError(ValueError):
    pass


@dataclass
class SweepSpec:
    kind: str  # slide | knob | gait | pickplace | extended
    grid: dict  # variable name -> list of values
    repeats: int = 1
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.repeats < 1:
            raise SweepError("repeats must be >= 1")
        if any(len(v) == 0 for v in self.grid.values()):
            raise SweepError("grid variables must be non-empty")

    def cells(self):
        names = sorted(self.grid)
        combos = itertools.product(*(self.grid[n] for n in names))
        out = []
        for combo in combos:
            for rep in range(self.repeats):
                cell = dict(zip(names, combo))
                cell["repeat"] = rep
                out.append(cell)
        return out

    @classmethod
    def from_json(cls, path):
        data = json.loads(Path(path).read_text())
        return cls(kind=data["kind"], grid=data.get("grid", {}),
                   repeats=data.get("repeats", 1), seed=data.get("seed", 0),
                   options=data.get("options", {}))

    def to_json(self, path):
        Path(path).write_text(json.dumps(
            {"kind": self.kind, "grid": self.grid, "repeats": self.repeats,
             "seed": self.seed, "options": self.options}, indent=2) + "\n")


@dataclass
class TrialResult:
    inputs: dict
    metrics: dict
    diagnostics: dict = field(default_factory=dict)
    error: str = ""

    def row(self):
        out = {f"in_{k}": v for k, v in self.inputs.items()}
        out.update(self.metrics)
        out["error"] = self.error
        return out


def cell_key(cell):
    return json.dumps(cell, sort_keys=True)


class ReportStore:
    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.store = self.dir / "results.jsonl"
        self._done = {}
        if self.store.exists():
            for line in self.store.read_text().splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                self._done[cell_key(rec["inputs"])] = TrialResult(
                    rec["inputs"], rec["metrics"], rec.get("diagnostics", {}),
                    rec.get("error", ""))

    def has(self, cell):
        return cell_key(cell) in self._done

    def get(self, cell):
        return self._done.get(cell_key(cell))

    def add(self, result: TrialResult):
        key = cell_key(result.inputs)
        if key in self._done:
            return self._done[key]
        with open(self.store, "a") as fh:
            fh.write(json.dumps({"inputs": result.inputs, "metrics": result.metrics,
                                 "diagnostics": result.diagnostics,
                                 "error": result.error}, sort_keys=True) + "\n")
        self._done[key] = result
        return result

    def results(self):
        return [self._done[k] for k in sorted(self._done)]

    def write_report(self):
        results = self.results()
        path = self.dir / "report.csv"
        if not results:
            path.write_text("")
            return path
        cols = sorted({c for r in results for c in r.row()})
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in results:
                w.writerow({k: _csv_value(v) for k, v in r.row().items()})
        return path

    def write_summary(self, summary: dict):
        path = self.dir / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")
        return path


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return int(v)
    return v


def run_cells(spec: SweepSpec, trial_fn, store: ReportStore, on_result=None):
    """Run every missing cell of the sweep serially and deterministically.

    ``trial_fn(cell)`` returns a TrialResult; exceptions are captured as
    failed trials so the sweep always continues.
    """
    for cell in spec.cells():
        if store.has(cell):
            continue
        t0 = time.time()
        try:
            result = trial_fn(dict(cell))
            if result.inputs != cell:
                result.inputs = dict(cell)
        except Exception as e:  # a failing trial is data, not a crash
            result = TrialResult(dict(cell), {}, error=f"{type(e).__name__}: {e}")
        result.diagnostics.setdefault("wall_s", round(time.time() - t0, 3))
        store.add(result)
        if on_result:
            on_result(result)
    return store.results()
