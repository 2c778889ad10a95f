"""Kinematic structure of the tendon-driven hand.

Each digit is a planar 3-link chain living in its own flexion plane; the hand
composes five such planes plus an abduction angle per digit (a "2.5-D"
composition).  Twelve actuators drive twenty joints:

* one antagonistic-pair actuator per digit for the MCP flexion joint (the
  thumb's first CMC axis uses the same slot),
* one flexor actuator per digit for the coupled PIP/DIP pair,
* one shared series-elastic actuator for the index/ring/little abduction
  linkage,
* one actuator for the thumb's second CMC axis.

Flexion is positive counter-clockwise in the digit-local frame; the palmar
(skin) side is the inside of the curl.  All defaults shipped in
``data/default_hand.json`` are engineering configuration at adult-hand scale,
not measured data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import rot

DIGITS = ("thumb", "index", "middle", "ring", "little")
JOINTS_PER_DIGIT = ("mcp_flex", "mcp_abduct", "pip", "dip")
JOINT_NAMES = tuple(f"{d}.{j}" for d in DIGITS for j in JOINTS_PER_DIGIT)


class HandConfigError(ValueError):
    pass


class CommandRangeError(ValueError):
    """An actuator displacement outside its declared travel range."""

    def __init__(self, actuator_id, value, travel):
        self.actuator_id = actuator_id
        super().__init__(
            f"actuator '{actuator_id}' displacement {value:.3f} mm outside travel "
            f"range [{travel[0]:.3f}, {travel[1]:.3f}] mm"
        )


@dataclass(frozen=True)
class AbductionAxis:
    present: bool = True
    series_stiffness: float = 40.0  # N*mm/rad
    moment_arm: float = 8.0  # mm
    limits: tuple = (-0.35, 0.35)


@dataclass(frozen=True)
class DigitSpec:
    digit_id: str
    link_lengths: tuple  # (proximal, middle, distal) mm
    mcp_moment_arm: float  # mm
    pipdip_moment_arms: tuple  # (pip, dip) mm
    joint_limits: dict  # joint name -> (min, max) rad
    pipdip_coupling_ratio: float = 1.0  # DIP angle per PIP angle
    return_spring_stiffness: tuple = (15.0, 15.0)  # N*mm/rad (pip, dip)
    abduction_axis: AbductionAxis = field(default_factory=AbductionAxis)
    # placement of the digit plane relative to the hand mount
    base_offset: tuple = (0.0, 0.0)  # mm, in the mount frame
    base_angle: float = 0.0  # rad, direction of the straight digit
    lateral_offset: float = 0.0  # mm, out-of-plane plane position
    curl_sign: float = 1.0  # +1 curls CCW in world, -1 mirrored
    link_half_width: float = 7.0  # mm, bone half thickness
    # stands in for out-of-plane structural stiffness (e.g. the palm-backed
    # thumb opposition); None uses the hand-wide series spring
    mcp_stiffness_override: float | None = None

    def __post_init__(self):
        if self.digit_id not in DIGITS:
            raise HandConfigError(f"unknown digit id '{self.digit_id}'")
        if any(l <= 0 for l in self.link_lengths) or len(self.link_lengths) != 3:
            raise HandConfigError(f"{self.digit_id}: link lengths must be 3 positive values")
        if self.mcp_moment_arm <= 0 or any(r <= 0 for r in self.pipdip_moment_arms):
            raise HandConfigError(f"{self.digit_id}: moment arms must be positive")
        if self.pipdip_coupling_ratio <= 0:
            raise HandConfigError(f"{self.digit_id}: coupling ratio must be positive")
        for j, (lo, hi) in self.joint_limits.items():
            if lo >= hi:
                raise HandConfigError(f"{self.digit_id}.{j}: joint limit min must be < max")

    @property
    def reach(self):
        return float(sum(self.link_lengths))

    def coupled_pip_limits(self):
        """Box for the coupled PIP coordinate honoring both PIP and DIP limits."""
        c = self.pipdip_coupling_ratio
        plo, phi = self.joint_limits["pip"]
        dlo, dhi = self.joint_limits["dip"]
        return max(plo, dlo / c), min(phi, dhi / c)


@dataclass(frozen=True)
class ActuatorSpec:
    actuator_id: str
    digit: str  # digit id, or "" for the shared abduction actuator
    joint_group: str  # "mcp" | "pipdip" | "abduction" | "cmc2"
    antagonistic: bool
    travel: tuple  # (min, max) mm


@dataclass(frozen=True)
class HandSpec:
    digits: dict  # digit id -> DigitSpec
    actuators: tuple  # 12 ActuatorSpec, fixed order
    mcp_series_spring: float | None  # N/mm; None = rigid configuration
    rigid_mcp_stiffness: float  # N/mm surrogate used when the spring is absent
    pipdip_tendon_stiffness: float  # N/mm, structural stiffness of the flexor path
    palm_geometry: np.ndarray  # polygon in the mount frame, mm
    mount_pose: np.ndarray  # 6-dof (x, y, z, rx, ry, rz)
    abduction_split: dict  # digit -> displacement share of the shared actuator
    palm_half_depth: float = 45.0  # mm lateral extent of the palm

    def __post_init__(self):
        if len(self.actuators) != 12:
            raise HandConfigError(f"expected 12 actuators, got {len(self.actuators)}")
        if set(self.digits) != set(DIGITS):
            raise HandConfigError("hand must define exactly the five digits")
        targets = []
        for a in self.actuators:
            if a.joint_group == "abduction":
                targets.extend((d, "mcp_abduct") for d in self.abduction_split)
            elif a.joint_group == "cmc2":
                targets.append((a.digit, "mcp_abduct"))
            elif a.joint_group == "mcp":
                targets.append((a.digit, "mcp_flex"))
            elif a.joint_group == "pipdip":
                targets.append((a.digit, "pip"))
            else:
                raise HandConfigError(f"unknown joint group '{a.joint_group}'")
        if len(targets) != len(set(targets)):
            raise HandConfigError("an actuated joint group is driven by more than one actuator")
        n_joints = 4 * len(self.digits)
        if n_joints != 20:
            raise HandConfigError(f"expected 20 joints, got {n_joints}")

    def actuator(self, actuator_id):
        for a in self.actuators:
            if a.actuator_id == actuator_id:
                return a
        raise KeyError(actuator_id)

    @property
    def actuator_ids(self):
        return tuple(a.actuator_id for a in self.actuators)

    def mcp_stiffness(self):
        """Series spring constant actually used by the statics model (N/mm)."""
        if self.mcp_series_spring is None:
            return self.rigid_mcp_stiffness
        return self.mcp_series_spring

    def with_finger_variant(self, variant):
        """Return a copy configured soft (series spring) or rigid (spring removed)."""
        if variant not in ("soft", "rigid"):
            raise HandConfigError(f"unknown finger variant '{variant}'")
        soft_k = self.mcp_series_spring if self.mcp_series_spring is not None \
            else self.rigid_mcp_stiffness / 30.0
        spring = soft_k if variant == "soft" else None
        rigid_k = self.rigid_mcp_stiffness if variant == "rigid" else soft_k * 30.0
        return HandSpec(
            digits=self.digits,
            actuators=self.actuators,
            mcp_series_spring=spring,
            rigid_mcp_stiffness=rigid_k,
            pipdip_tendon_stiffness=self.pipdip_tendon_stiffness,
            palm_geometry=self.palm_geometry,
            mount_pose=self.mount_pose,
            abduction_split=self.abduction_split,
            palm_half_depth=self.palm_half_depth,
        )


class JointVector:
    """The 20 named joint angles, ordered per digit as
    (mcp_flex, mcp_abduct, pip, dip)."""

    __slots__ = ("values", "clamped")

    def __init__(self, values=None, clamped=()):
        self.values = np.zeros(20) if values is None else np.asarray(values, dtype=float).copy()
        if self.values.shape != (20,):
            raise ValueError("JointVector needs exactly 20 angles")
        self.clamped = tuple(clamped)

    def __getitem__(self, name):
        return float(self.values[JOINT_NAMES.index(name)])

    def digit_angles(self, digit):
        i = DIGITS.index(digit) * 4
        return self.values[i:i + 4]

    def as_dict(self):
        return {n: float(v) for n, v in zip(JOINT_NAMES, self.values)}

    def copy(self):
        return JointVector(self.values, self.clamped)

    def __eq__(self, other):
        return isinstance(other, JointVector) and np.array_equal(self.values, other.values)


class ActuatorCommand:
    """Twelve tendon displacements (mm) plus optional MCP overdrive."""

    __slots__ = ("displacements", "overdrive")

    def __init__(self, displacements=None, overdrive=None):
        self.displacements = np.zeros(12) if displacements is None \
            else np.asarray(displacements, dtype=float).copy()
        if self.displacements.shape != (12,):
            raise ValueError("ActuatorCommand needs exactly 12 displacements")
        self.overdrive = dict(overdrive or {})
        for k, v in self.overdrive.items():
            if v < 0:
                raise ValueError(f"overdrive for '{k}' must be >= 0, got {v}")

    @classmethod
    def from_dict(cls, spec: HandSpec, values: dict, overdrive=None):
        disp = np.zeros(12)
        ids = spec.actuator_ids
        for k, v in values.items():
            disp[ids.index(k)] = v
        return cls(disp, overdrive)

    def value(self, spec: HandSpec, actuator_id):
        return float(self.displacements[spec.actuator_ids.index(actuator_id)])

    def effective(self, spec: HandSpec, actuator_id):
        """Commanded displacement including overdrive, mm."""
        return self.value(spec, actuator_id) + self.overdrive.get(actuator_id, 0.0)

    def validate(self, spec: HandSpec):
        for i, a in enumerate(spec.actuators):
            v = float(self.displacements[i])
            if not (a.travel[0] - 1e-9 <= v <= a.travel[1] + 1e-9):
                raise CommandRangeError(a.actuator_id, v, a.travel)

    def copy(self):
        return ActuatorCommand(self.displacements, self.overdrive)


def _digit_commands(spec: HandSpec, cmd: ActuatorCommand):
    """Per-digit effective commands: (mcp mm, pipdip mm, abduct angle rad)."""
    out = {d: [0.0, 0.0, 0.0] for d in DIGITS}
    for i, a in enumerate(spec.actuators):
        disp = float(cmd.displacements[i]) + cmd.overdrive.get(a.actuator_id, 0.0)
        if a.joint_group == "mcp":
            out[a.digit][0] = disp
        elif a.joint_group == "pipdip":
            out[a.digit][1] = disp
        elif a.joint_group == "abduction":
            for d, share in spec.abduction_split.items():
                ds = spec.digits[d]
                out[d][2] = disp * share / ds.abduction_axis.moment_arm
        elif a.joint_group == "cmc2":
            ds = spec.digits[a.digit]
            out[a.digit][2] = disp / ds.abduction_axis.moment_arm
    return out


def rest_pipdip_angle(digit: DigitSpec, tendon_k: float, delta: float):
    """Unloaded coupled-PIP angle for flexor displacement ``delta``.

    The flexor path elasticity works against the extension return springs; the
    DIP tracks the PIP by the coupling ratio.
    """
    c = digit.pipdip_coupling_ratio
    rp, rd = digit.pipdip_moment_arms
    reff = rp + c * rd
    kret = digit.return_spring_stiffness[0] + c * c * digit.return_spring_stiffness[1]
    return tendon_k * reff * delta / (tendon_k * reff * reff + kret)


def tendon_to_rest_pose(spec: HandSpec, cmd: ActuatorCommand) -> JointVector:
    """Unloaded equilibrium posture for a tendon command.

    MCP angle is net displacement over moment arm; the coupled PIP/DIP pair
    balances the flexor against the return springs.  Angles are clamped to the
    joint limits and every clamp is reported in ``JointVector.clamped``.
    """
    cmd.validate(spec)
    per_digit = _digit_commands(spec, cmd)
    values = np.zeros(20)
    clamped = []
    for di, d in enumerate(DIGITS):
        ds = spec.digits[d]
        mcp_disp, pipdip_disp, abd_angle = per_digit[d]
        mcp = mcp_disp / ds.mcp_moment_arm
        pip = rest_pipdip_angle(ds, spec.pipdip_tendon_stiffness, pipdip_disp)
        dip = ds.pipdip_coupling_ratio * pip

        def clamp(joint, value):
            lo, hi = ds.joint_limits[joint]
            if value < lo or value > hi:
                clamped.append(f"{d}.{joint}")
                return min(max(value, lo), hi)
            return value

        values[di * 4 + 0] = clamp("mcp_flex", mcp)
        values[di * 4 + 1] = clamp("mcp_abduct", abd_angle) if ds.abduction_axis.present else 0.0
        values[di * 4 + 2] = clamp("pip", pip)
        values[di * 4 + 3] = clamp("dip", dip)
    return JointVector(values, clamped)


def digit_base_frame(spec: HandSpec, digit, wrist_xy=(0.0, 0.0), wrist_angle=0.0):
    """World position and direction angle of a digit's MCP joint."""
    ds = spec.digits[digit]
    mount_xy = spec.mount_pose[:2] + np.asarray(wrist_xy, dtype=float)
    mount_angle = float(spec.mount_pose[5]) + wrist_angle
    base = mount_xy + rot(mount_angle) @ np.asarray(ds.base_offset, dtype=float)
    return base, mount_angle + ds.base_angle * 1.0, ds.curl_sign


def link_segments(spec: HandSpec, joints: JointVector, digit,
                  wrist_xy=(0.0, 0.0), wrist_angle=0.0):
    """World endpoints of the digit's three links: [(a, b), ...]."""
    ds = spec.digits[digit]
    base, angle0, sign = digit_base_frame(spec, digit, wrist_xy, wrist_angle)
    q = joints.digit_angles(digit)
    flex = (q[0], q[0] + q[2], q[0] + q[2] + q[3])
    segs = []
    p = base
    theta = angle0
    for length, cum in zip(ds.link_lengths, flex):
        theta = angle0 + sign * cum
        nxt = p + length * np.array([math.cos(theta), math.sin(theta)])
        segs.append((p, nxt))
        p = nxt
    return segs


def fingertip_fk(spec: HandSpec, joints: JointVector, digit):
    """Fingertip position in the digit's flexion plane plus contact frame.

    Returns (point, frame) where point is the planar tip position (mm) with
    the digit base at the origin and the straight digit along +x, and frame is
    a dict with ``tangent`` (chain end direction) and ``palmar_normal`` (the
    inside of the curl).
    """
    ds = spec.digits[digit]
    q = joints.digit_angles(digit)
    cums = (q[0], q[0] + q[2], q[0] + q[2] + q[3])
    p = np.zeros(2)
    for length, theta in zip(ds.link_lengths, cums):
        p = p + length * np.array([math.cos(theta), math.sin(theta)])
    t_end = cums[-1]
    tangent = np.array([math.cos(t_end), math.sin(t_end)])
    palmar = np.array([-math.sin(t_end), math.cos(t_end)])
    return p, {"tangent": tangent, "palmar_normal": palmar}


# ---------------------------------------------------------------------------
# configuration loading

_DATA_DIR = Path(__file__).parent / "data"


def data_path(*parts):
    return _DATA_DIR.joinpath(*parts)


def _digit_from_config(did, cfg):
    abd_cfg = cfg.get("abduction_axis", {})
    limits = {j: tuple(v) for j, v in cfg["joint_limits"].items()}
    return DigitSpec(
        digit_id=did,
        link_lengths=tuple(cfg["link_lengths"]),
        mcp_moment_arm=cfg["mcp_moment_arm"],
        pipdip_moment_arms=tuple(cfg["pipdip_moment_arms"]),
        joint_limits=limits,
        pipdip_coupling_ratio=cfg.get("pipdip_coupling_ratio", 1.0),
        return_spring_stiffness=tuple(cfg.get("return_spring_stiffness", (15.0, 15.0))),
        mcp_stiffness_override=cfg.get("mcp_stiffness"),
        abduction_axis=AbductionAxis(
            present=abd_cfg.get("present", True),
            series_stiffness=abd_cfg.get("series_stiffness", 40.0),
            moment_arm=abd_cfg.get("moment_arm", 8.0),
            limits=tuple(abd_cfg.get("limits", (-0.35, 0.35))),
        ),
        base_offset=tuple(cfg.get("base_offset", (0.0, 0.0))),
        base_angle=cfg.get("base_angle", 0.0),
        lateral_offset=cfg.get("lateral_offset", 0.0),
        curl_sign=cfg.get("curl_sign", 1.0),
        link_half_width=cfg.get("link_half_width", 7.0),
    )


def load_hand_spec(path=None) -> HandSpec:
    """Load a HandSpec from a JSON configuration file (default: shipped file)."""
    path = Path(path) if path is not None else data_path("default_hand.json")
    with open(path) as fh:
        cfg = json.load(fh)
    digits = {did: _digit_from_config(did, dcfg) for did, dcfg in cfg["digits"].items()}
    actuators = tuple(
        ActuatorSpec(
            actuator_id=a["id"],
            digit=a.get("digit", ""),
            joint_group=a["joint_group"],
            antagonistic=a.get("antagonistic", False),
            travel=tuple(a["travel"]),
        )
        for a in cfg["actuators"]
    )
    return HandSpec(
        digits=digits,
        actuators=actuators,
        mcp_series_spring=cfg.get("mcp_series_spring"),
        rigid_mcp_stiffness=cfg.get("rigid_mcp_stiffness", 30.0 * (cfg.get("mcp_series_spring") or 1.0)),
        pipdip_tendon_stiffness=cfg.get("pipdip_tendon_stiffness", 8.0),
        palm_geometry=np.asarray(cfg["palm_geometry"], dtype=float),
        mount_pose=np.asarray(cfg.get("mount_pose", [0.0] * 6), dtype=float),
        abduction_split=cfg.get("abduction_split", {"index": 1 / 3, "ring": 1 / 3, "little": 1 / 3}),
        palm_half_depth=cfg.get("palm_half_depth", 45.0),
    )
