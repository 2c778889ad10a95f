"""In-memory teach/replay sessions.

A session owns one scene with a solver; commands apply in receipt order under
a per-session lock; every solve appends a self-contained StateFrame with a
strictly increasing counter.  Mode transitions are teach <-> idle <-> replay.
"""

from __future__ import annotations

import itertools
import threading
import uuid

import numpy as np

from ..compliance import WristModel
from ..hand import ActuatorCommand, JOINT_NAMES
from ..scene import build_scene
from ..solver import StaticsSolver, run_trajectory
from ..waypoints import RecordingSession
from ..experiments.classify import GraspClassificationError, classify_grasp


class SessionError(ValueError):
    pass


class ModeError(SessionError):
    pass


class Session:
    def __init__(self, name="session"):
        self.id = uuid.uuid4().hex[:12]
        self.name = name
        self.mode = "idle"  # teach | idle | replay
        self.lock = threading.Lock()
        self.scene = None
        self.solver = None
        self.command = ActuatorCommand()
        self.wrist_pose = np.zeros(4)
        self.stiffness_preset = "teach"
        self.recording = RecordingSession(name)
        self.frames = []
        self._counter = itertools.count()
        self.last_state = None

    # -- lifecycle ---------------------------------------------------------

    def load_scene(self, descriptor):
        with self.lock:
            self.scene = build_scene(descriptor)
            self.solver = StaticsSolver(self.scene.clone())
            self.command = ActuatorCommand()
            self.wrist_pose = np.zeros(4)
            self.mode = "idle"
            self._solve_locked()

    def set_mode(self, mode):
        with self.lock:
            if mode not in ("teach", "idle", "replay"):
                raise SessionError(f"unknown mode '{mode}'")
            allowed = {("idle", "teach"), ("teach", "idle"),
                       ("idle", "replay"), ("replay", "idle")}
            if mode != self.mode and (self.mode, mode) not in allowed:
                raise ModeError(f"cannot switch {self.mode} -> {mode}")
            self.mode = mode

    def _require_scene(self):
        if self.solver is None:
            raise SessionError("no scene loaded")

    # -- teach-mode commands -------------------------------------------------

    def set_sliders(self, values, overdrive=None):
        with self.lock:
            self._require_scene()
            if self.mode == "replay":
                raise ModeError("commands are rejected in replay mode")
            if self.mode != "teach":
                raise ModeError("set_sliders requires teach mode")
            cmd = ActuatorCommand(np.asarray(values, dtype=float), overdrive)
            cmd.validate(self.solver.spec)
            self.command = cmd
            return self._solve_locked()

    def jog_wrist(self, pose, stiffness_preset="teach"):
        with self.lock:
            self._require_scene()
            if self.mode == "replay":
                raise ModeError("commands are rejected in replay mode")
            if self.mode != "teach":
                raise ModeError("jog_wrist requires teach mode")
            self.wrist_pose = np.asarray(pose, dtype=float)
            self.stiffness_preset = stiffness_preset
            return self._solve_locked()

    def record_waypoint(self, target, duration_s=1.0):
        with self.lock:
            self._require_scene()
            if self.mode != "teach":
                raise ModeError("recording requires teach mode")
            if target == "hand":
                self.recording.record("hand", self.command.displacements, duration_s)
            else:
                yaw = float(self.wrist_pose[3])
                quat = (np.cos(yaw / 2), 0.0, 0.0, np.sin(yaw / 2))
                self.recording.record(
                    "arm", (tuple(self.wrist_pose[:3]), quat), duration_s,
                    stiffness_preset=self.stiffness_preset or "replay")
            return self.recording.trajectory()

    # -- replay --------------------------------------------------------------

    def replay(self, trajectory, dt=0.1):
        with self.lock:
            self._require_scene()
            if self.mode == "replay":
                raise ModeError("replay already in progress")
            self.mode = "replay"
        try:
            solver = StaticsSolver(self.scene.clone())
            frames = []

            def on_step(st):
                frames.append(self._frame_from_state(st.state, solver))

            run_trajectory(self.scene, trajectory, dt=dt, solver=solver,
                           on_step=on_step, tolerance=3e-5)
            with self.lock:
                self.frames.extend(frames)
                self.last_state = frames[-1] if frames else self.last_state
            return len(frames)
        finally:
            with self.lock:
                self.mode = "idle"

    # -- frames ---------------------------------------------------------------

    def _solve_locked(self):
        wrist = WristModel.preset(self.stiffness_preset or "teach")
        self.solver.arm_command = self.wrist_pose.copy()
        state = self.solver.solve(self.command, wrist=wrist,
                                  warm_start=(self.last_raw_state.configuration
                                              if getattr(self, "last_raw_state", None)
                                              else None))
        self.solver.update_anchors(state)
        self.last_raw_state = state
        frame = self._frame_from_state(state, self.solver)
        self.frames.append(frame)
        self.last_state = frame
        return frame

    def _frame_from_state(self, state, solver):
        grasp = None
        for obj in solver.scene.objects:
            pose = state.configuration.object_poses.get(obj.name)
            table = solver.scene.table_height() or 0.0
            if pose is not None and pose[1] - obj.height / 2.0 > table + 10.0:
                try:
                    grasp = classify_grasp(state, obj).name
                except GraspClassificationError:
                    grasp = None
        return {
            "session_id": self.id,
            "counter": next(self._counter),
            "mode": self.mode,
            "joints": {n: float(v) for n, v in zip(
                JOINT_NAMES, state.configuration.joints.values)},
            "wrist_pose": [float(v) for v in self.wrist_pose],
            "wrist_deflection": [float(v) for v in state.configuration.wrist_deflection],
            "object_poses": {k: [float(x) for x in v]
                             for k, v in state.configuration.object_poses.items()},
            "contacts": [{
                "link": c.link_id, "body": c.body_id,
                "point": [float(c.point[0]), float(c.point[1])],
                "normal": float(c.normal), "shear": float(c.shear),
                "slip": bool(c.slip)} for c in state.contacts if c.penetration > 0],
            "grasp_type": grasp,
            "energy": float(state.energy),
            "converged": bool(state.converged),
        }


class SessionRegistry:
    def __init__(self):
        self._sessions = {}
        self._lock = threading.Lock()

    def create(self, name="session") -> Session:
        s = Session(name)
        with self._lock:
            self._sessions[s.id] = s
        return s

    def get(self, session_id) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            return self._sessions[session_id]

    def destroy(self, session_id):
        with self._lock:
            self._sessions.pop(session_id, None)

    def list(self):
        with self._lock:
            return list(self._sessions.values())
