"""Request/response schemas for the session API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    name: str = "session"


class SceneRequest(BaseModel):
    descriptor: Optional[dict] = None
    path: Optional[str] = None


class SlidersRequest(BaseModel):
    values: list[float] = Field(..., min_length=12, max_length=12)
    overdrive: dict[str, float] = Field(default_factory=dict)


class WristRequest(BaseModel):
    pose: list[float] = Field(..., min_length=4, max_length=4,
                              description="x, y, z, yaw relative to the scene mount")
    stiffness_preset: str = "teach"


class WaypointRequest(BaseModel):
    target: str = Field(..., pattern="^(hand|arm)$")
    duration_s: float = 1.0


class ReplayRequest(BaseModel):
    manifest: Optional[str] = None
    dt: float = 0.1
    use_recorded: bool = False


class ContactModel(BaseModel):
    link: str
    body: str
    point: list[float]
    normal: float
    shear: float
    slip: bool


class StateFrameModel(BaseModel):
    session_id: str
    counter: int
    mode: str
    joints: dict[str, float]
    wrist_pose: list[float]
    wrist_deflection: list[float]
    object_poses: dict[str, list[float]]
    contacts: list[ContactModel]
    grasp_type: Optional[str] = None
    energy: float
    converged: bool


class SessionInfo(BaseModel):
    id: str
    name: str
    mode: str
    scene: Optional[str] = None
    frames: int
    waypoints: int
    actuator_ids: list[str] = Field(default_factory=list)
    travel: dict[str, list[float]] = Field(default_factory=dict)


class ExperimentRequest(BaseModel):
    kind: str = Field(..., pattern="^(slide|knob|gait|pickplace|extended|limits|classify)$")
    out_dir: str
    sweep: Optional[dict] = None
    options: dict = Field(default_factory=dict)


class JobStatus(BaseModel):
    id: str
    kind: str
    state: str  # queued | running | done | failed
    detail: str = ""
    out_dir: str = ""
