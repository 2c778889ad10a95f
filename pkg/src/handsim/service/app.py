"""HTTP session API: scene loading, live slider commands, waypoint
record/replay, state frames, and experiment job launch, all under /v1/."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse

from .. import waypoints
from ..experiments import gait as gait_exp
from ..experiments import knob as knob_exp
from ..experiments import pickplace as pp_exp
from ..experiments import slide as slide_exp
from ..experiments.common import SweepSpec
from .jobs import JobRegistry
from .models import (CreateSessionRequest, ExperimentRequest, JobStatus,
                     ReplayRequest, SceneRequest, SessionInfo, SlidersRequest,
                     StateFrameModel, WaypointRequest, WristRequest)
from .sessions import ModeError, SessionError, SessionRegistry


def create_app() -> FastAPI:
    app = FastAPI(title="handsim service", version="1")
    sessions = SessionRegistry()
    jobs = JobRegistry()
    app.state.sessions = sessions
    app.state.jobs = jobs

    def get_session(session_id):
        try:
            return sessions.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    def session_info(s) -> SessionInfo:
        spec = s.solver.spec if s.solver else None
        return SessionInfo(
            id=s.id, name=s.name, mode=s.mode,
            scene=s.scene.name if s.scene else None,
            frames=len(s.frames),
            waypoints=sum(len(seg.waypoints) for seg in s.recording.segments),
            actuator_ids=list(spec.actuator_ids) if spec else [],
            travel={a.actuator_id: list(a.travel) for a in spec.actuators} if spec else {})

    @app.post("/v1/sessions", response_model=SessionInfo)
    def create_session(req: CreateSessionRequest):
        return session_info(sessions.create(req.name))

    @app.get("/v1/sessions/{session_id}", response_model=SessionInfo)
    def get_info(session_id: str):
        return session_info(get_session(session_id))

    @app.delete("/v1/sessions/{session_id}")
    def destroy(session_id: str):
        get_session(session_id)
        sessions.destroy(session_id)
        return {"ok": True}

    @app.post("/v1/sessions/{session_id}/scene", response_model=SessionInfo)
    def load_scene(session_id: str, req: SceneRequest):
        s = get_session(session_id)
        try:
            if req.descriptor is not None:
                s.load_scene(req.descriptor)
            elif req.path:
                s.load_scene(json.loads(Path(req.path).read_text()))
            else:
                raise HTTPException(status_code=422, detail="descriptor or path required")
        except (ValueError, FileNotFoundError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return session_info(s)

    @app.post("/v1/sessions/{session_id}/mode")
    def set_mode(session_id: str, body: dict):
        s = get_session(session_id)
        try:
            s.set_mode(body.get("mode", ""))
        except ModeError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except SessionError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"mode": s.mode}

    @app.post("/v1/sessions/{session_id}/sliders", response_model=StateFrameModel)
    def set_sliders(session_id: str, req: SlidersRequest):
        s = get_session(session_id)
        try:
            return s.set_sliders(req.values, req.overdrive)
        except ModeError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (SessionError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))

    @app.post("/v1/sessions/{session_id}/wrist", response_model=StateFrameModel)
    def jog_wrist(session_id: str, req: WristRequest):
        s = get_session(session_id)
        try:
            return s.jog_wrist(req.pose, req.stiffness_preset)
        except ModeError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (SessionError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))

    @app.post("/v1/sessions/{session_id}/waypoints")
    def record_waypoint(session_id: str, req: WaypointRequest):
        s = get_session(session_id)
        try:
            traj = s.record_waypoint(req.target, req.duration_s)
        except ModeError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (SessionError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"waypoints": traj.waypoint_count,
                "segments": [{"kind": seg.kind, "count": len(seg.waypoints)}
                             for seg in traj.segments]}

    @app.get("/v1/sessions/{session_id}/trajectory")
    def export_trajectory(session_id: str):
        s = get_session(session_id)
        if not s.recording.segments:
            raise HTTPException(status_code=404, detail="nothing recorded")
        traj = s.recording.trajectory()
        with tempfile.TemporaryDirectory() as td:
            manifest = waypoints.save(traj, Path(td) / f"{s.name}.traj")
            files = {manifest.name: manifest.read_text()}
            for line in manifest.read_text().splitlines():
                if line.startswith("#") or not line.strip():
                    continue
                rel = line.split(",")[1]
                files[rel] = (manifest.parent / rel).read_text()
        return {"manifest": manifest.name, "files": files}

    @app.post("/v1/sessions/{session_id}/replay")
    def replay(session_id: str, req: ReplayRequest):
        s = get_session(session_id)
        try:
            if req.use_recorded:
                traj = s.recording.trajectory()
            elif req.manifest:
                traj = waypoints.load(req.manifest)
            else:
                raise HTTPException(status_code=422,
                                    detail="manifest or use_recorded required")
            n = s.replay(traj, dt=req.dt)
        except ModeError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (SessionError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"frames": n}

    @app.get("/v1/sessions/{session_id}/frame", response_model=StateFrameModel)
    def get_frame(session_id: str):
        s = get_session(session_id)
        if s.last_state is None:
            raise HTTPException(status_code=404, detail="no frames yet")
        return s.last_state

    @app.get("/v1/sessions/{session_id}/stream")
    def stream(session_id: str, start: int = 0):
        s = get_session(session_id)

        def gen():
            for frame in list(s.frames)[start:]:
                yield json.dumps(frame) + "\n"

        return StreamingResponse(gen(), media_type="application/x-ndjson")

    @app.post("/v1/experiments", response_model=JobStatus)
    def run_experiment(req: ExperimentRequest):
        spec = SweepSpec(kind=req.kind, **req.sweep) if req.sweep else None
        runners = {
            "slide": lambda: slide_exp.run_sweep(spec, out_dir=req.out_dir,
                                                 **req.options),
            "knob": lambda: knob_exp.run_sweep(spec, out_dir=req.out_dir,
                                               **req.options),
            "gait": lambda: gait_exp.run_sweep(spec, out_dir=req.out_dir,
                                               **req.options),
            "pickplace": lambda: pp_exp.run_pick_place_sweep(out_dir=req.out_dir,
                                                             **req.options),
            "extended": lambda: pp_exp.run_extended(out_dir=req.out_dir,
                                                    **req.options),
            "classify": lambda: pp_exp.run_classification(out_dir=req.out_dir,
                                                          **req.options),
        }
        if req.kind not in runners:
            raise HTTPException(status_code=422, detail=f"unknown kind {req.kind}")
        job_id = jobs.submit(req.kind, runners[req.kind], out_dir=req.out_dir)
        return JobStatus(**jobs.status(job_id))

    @app.get("/v1/experiments/{job_id}", response_model=JobStatus)
    def job_status(job_id: str):
        try:
            return JobStatus(**jobs.status(job_id))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")

    return app


app = create_app()
