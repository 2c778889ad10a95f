"""Open-loop waypoint trajectories: the entire control scheme.

Hand waypoints are 12 tendon displacements; arm waypoints are 6-DoF wrist
poses with a stiffness preset.  Segments of either kind execute strictly
sequentially (the hand and arm are never actuated simultaneously), and
waypoints are linearly interpolated on replay (shortest-arc spherical
interpolation for orientations).

File format: a manifest with one ``hand|arm,relative_path`` line per segment;
hand segment CSVs carry ``duration_s,t1..t12`` columns and arm segment CSVs
``duration_s,x_mm,y_mm,z_mm,qw,qx,qy,qz,stiffness_preset``.  Floats are
written with shortest round-trip formatting so save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HAND_HEADER = ["duration_s"] + [f"t{i}" for i in range(1, 13)]
ARM_HEADER = ["duration_s", "x_mm", "y_mm", "z_mm", "qw", "qx", "qy", "qz", "stiffness_preset"]


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class HandWaypoint:
    displacements: tuple  # 12 tendon displacements, mm
    duration_s: float  # transition time into this waypoint

    def __post_init__(self):
        if len(self.displacements) != 12:
            raise TrajectoryError("hand waypoint needs 12 tendon displacements")
        if self.duration_s <= 0:
            raise TrajectoryError("waypoint duration must be > 0")
        object.__setattr__(self, "displacements", tuple(float(v) for v in self.displacements))


@dataclass(frozen=True)
class ArmWaypoint:
    position: tuple  # (x, y, z) mm
    quaternion: tuple  # (qw, qx, qy, qz), unit
    stiffness_preset: str
    duration_s: float

    def __post_init__(self):
        if len(self.position) != 3 or len(self.quaternion) != 4:
            raise TrajectoryError("arm waypoint needs a 3-vector position and a quaternion")
        n = math.sqrt(sum(q * q for q in self.quaternion))
        if abs(n - 1.0) > 1e-9:
            raise TrajectoryError(f"quaternion norm {n} not normalized to 1e-9")
        if self.duration_s <= 0:
            raise TrajectoryError("waypoint duration must be > 0")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "quaternion", tuple(float(v) for v in self.quaternion))

    def planar(self):
        """(x, y, z, yaw) for the planar scenes; yaw is the in-plane rotation."""
        qw, qx, qy, qz = self.quaternion
        yaw = 2.0 * math.atan2(qz, qw)
        return np.array([self.position[0], self.position[1], self.position[2], yaw])


@dataclass
class Segment:
    kind: str  # "hand" | "arm"
    waypoints: list

    def __post_init__(self):
        if self.kind not in ("hand", "arm"):
            raise TrajectoryError(f"unknown segment kind '{self.kind}'")
        if not self.waypoints:
            raise TrajectoryError("segment has no waypoints")


@dataclass
class Trajectory:
    name: str
    segments: list
    provenance: str = "authored"  # recorded | authored

    def __post_init__(self):
        if not self.segments:
            raise TrajectoryError("trajectory has no segments")

    @property
    def waypoint_count(self):
        return sum(len(s.waypoints) for s in self.segments)

    def validate(self, hand_spec=None):
        for si, seg in enumerate(self.segments):
            for wi, wp in enumerate(seg.waypoints):
                if seg.kind == "hand" and hand_spec is not None:
                    from .hand import ActuatorCommand
                    try:
                        ActuatorCommand(np.asarray(wp.displacements)).validate(hand_spec)
                    except ValueError as e:
                        raise TrajectoryError(f"segment {si} waypoint {wi}: {e}") from None
        return True


def quat_slerp(q0, q1, t):
    """Shortest-arc spherical interpolation between unit quaternions."""
    a = np.asarray(q0, dtype=float)
    b = np.asarray(q1, dtype=float)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-12:
        out = a + t * (b - a)
        return out / np.linalg.norm(out)
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    out = (math.sin((1 - t) * theta) / s) * a + (math.sin(t * theta) / s) * b
    return out / np.linalg.norm(out)


def interpolate(segment: Segment, step_count: int):
    """Linear per-channel interpolation with ``step_count`` points per transition.

    Endpoints are reproduced exactly; a single waypoint yields a constant
    single-entry sequence.  Step counts below 1 are rejected.
    """
    if step_count < 1:
        raise TrajectoryError("step_count must be >= 1 per waypoint transition")
    wps = segment.waypoints
    if len(wps) == 1:
        return [_as_command(segment.kind, wps[0])]
    out = []
    for a, b in zip(wps[:-1], wps[1:]):
        n = max(2, step_count)
        for i in range(n):
            if out and i == 0:
                continue  # transition start equals previous end
            t = i / (n - 1)
            out.append(_interp_pair(segment.kind, a, b, t))
    return out


def _as_command(kind, wp):
    if kind == "hand":
        return np.asarray(wp.displacements, dtype=float)
    return (np.asarray(wp.position, dtype=float), np.asarray(wp.quaternion, dtype=float),
            wp.stiffness_preset)


def _interp_pair(kind, a, b, t):
    if kind == "hand":
        va = np.asarray(a.displacements)
        vb = np.asarray(b.displacements)
        return (1 - t) * va + t * vb
    pos = (1 - t) * np.asarray(a.position) + t * np.asarray(b.position)
    quat = quat_slerp(a.quaternion, b.quaternion, t)
    preset = a.stiffness_preset if t < 1.0 else b.stiffness_preset
    return (pos, quat, preset)


def steps_for(duration_s, dt=0.05):
    """Solver step count for one transition: ceil(duration / dt), at least 2."""
    return max(2, int(math.ceil(duration_s / dt)))


def command_schedule(trajectory: Trajectory, dt=0.05, hand0=None, arm0=None):
    """The replayed command sequence without any mechanics.

    Yields (kind, hand_command(12), arm_pose(x, y, z, yaw), stiffness_preset)
    per solver step, mirroring the quasi-static replay semantics: each segment
    interpolates from the current channel state into its first waypoint.
    """
    hand_cmd = np.zeros(12) if hand0 is None else np.asarray(hand0, dtype=float).copy()
    arm_pose = np.zeros(4) if arm0 is None else np.asarray(arm0, dtype=float).copy()
    preset = "replay"
    out = []
    for seg in trajectory.segments:
        if seg.kind == "hand":
            virtual = HandWaypoint(tuple(hand_cmd), seg.waypoints[0].duration_s)
        else:
            quat = (math.cos(arm_pose[3] / 2), 0.0, 0.0, math.sin(arm_pose[3] / 2))
            virtual = ArmWaypoint(tuple(arm_pose[:3]), quat, preset,
                                  seg.waypoints[0].duration_s)
        wps = [virtual] + list(seg.waypoints)
        for a, b in zip(wps[:-1], wps[1:]):
            n = steps_for(b.duration_s, dt)
            sub = interpolate(Segment(seg.kind, [a, b]), n)[1:]
            for c in sub:
                if seg.kind == "hand":
                    hand_cmd = np.asarray(c, dtype=float)
                else:
                    pos, quat, preset = c
                    yaw = 2.0 * math.atan2(quat[3], quat[0])
                    arm_pose = np.array([pos[0], pos[1], pos[2], yaw])
                out.append((seg.kind, hand_cmd.copy(), arm_pose.copy(), preset))
    return out


class RecordingSession:
    """Teach-mode capture: snapshots the live command or wrist pose."""

    def __init__(self, name, provenance="recorded"):
        self.name = name
        self.provenance = provenance
        self.segments = []

    def record(self, target, value, duration_s=1.0, stiffness_preset="replay"):
        """Append a waypoint; extends the trailing segment when kinds match."""
        if target == "hand":
            wp = HandWaypoint(tuple(np.asarray(value, dtype=float)), duration_s)
        elif target == "arm":
            pos, quat = value
            wp = ArmWaypoint(tuple(pos), tuple(quat), stiffness_preset, duration_s)
        else:
            raise TrajectoryError(f"unknown record target '{target}'")
        if self.segments and self.segments[-1].kind == target:
            self.segments[-1].waypoints.append(wp)
        else:
            self.segments.append(Segment(target, [wp]))
        return wp

    def trajectory(self):
        return Trajectory(self.name, [Segment(s.kind, list(s.waypoints)) for s in self.segments],
                          self.provenance)


# ---------------------------------------------------------------------------
# persistence


def _fmt(v):
    return repr(float(v))


def save(trajectory: Trajectory, manifest_path):
    """Write the manifest plus one CSV per segment next to it."""
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, seg in enumerate(trajectory.segments):
        rel = f"{manifest_path.stem}_seg{i:02d}_{seg.kind}.csv"
        lines.append(f"{seg.kind},{rel}")
        with open(manifest_path.parent / rel, "w", newline="") as fh:
            w = csv.writer(fh)
            if seg.kind == "hand":
                w.writerow(HAND_HEADER)
                for wp in seg.waypoints:
                    w.writerow([_fmt(wp.duration_s)] + [_fmt(v) for v in wp.displacements])
            else:
                w.writerow(ARM_HEADER)
                for wp in seg.waypoints:
                    w.writerow([_fmt(wp.duration_s)] + [_fmt(v) for v in wp.position]
                               + [_fmt(v) for v in wp.quaternion] + [wp.stiffness_preset])
    manifest_path.write_text(f"# trajectory={trajectory.name} provenance={trajectory.provenance}\n"
                             + "\n".join(lines) + "\n")
    return manifest_path


def load(manifest_path) -> Trajectory:
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise TrajectoryError(f"manifest not found: {manifest_path}")
    name = manifest_path.stem
    provenance = "authored"
    segments = []
    for ln, line in enumerate(manifest_path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("trajectory="):
                    name = token.split("=", 1)[1]
                elif token.startswith("provenance="):
                    provenance = token.split("=", 1)[1]
            continue
        parts = line.split(",")
        if len(parts) != 2 or parts[0] not in ("hand", "arm"):
            raise TrajectoryError(f"{manifest_path}:{ln}: expected 'hand|arm,relative_path'")
        kind, rel = parts
        seg_path = manifest_path.parent / rel
        if not seg_path.exists():
            raise TrajectoryError(f"{manifest_path}:{ln}: segment file missing: {seg_path}")
        segments.append(_load_segment(kind, seg_path))
    return Trajectory(name, segments, provenance)


def _load_segment(kind, path) -> Segment:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = HAND_HEADER if kind == "hand" else ARM_HEADER
    if not rows or rows[0] != header:
        raise TrajectoryError(f"{path}: row 1: expected header {','.join(header)}")
    wps = []
    for rn, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise TrajectoryError(f"{path}: row {rn}: expected {len(header)} columns, got {len(row)}")
        try:
            if kind == "hand":
                wps.append(HandWaypoint(tuple(float(v) for v in row[1:]), float(row[0])))
            else:
                wps.append(ArmWaypoint(tuple(float(v) for v in row[1:4]),
                                       tuple(float(v) for v in row[4:8]),
                                       row[8], float(row[0])))
        except ValueError as e:
            raise TrajectoryError(f"{path}: row {rn}: {e}") from None
    return Segment(kind, wps)
