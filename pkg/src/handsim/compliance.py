"""Elastic elements at the three interaction length scales.

Skin contact stiffness (sub-millimeter), the series-elastic MCP spring
(centimeter) and the 6-DoF wrist spring (decimeter), plus force-displacement
profile tooling for soft-versus-rigid comparisons.

The soft/rigid skin pairing encodes two effects of covering the bone with a
thick elastomer instead of a printed shell: the normal curve is 10-40x softer,
and the conforming contact patch raises the effective friction coefficient
(larger real contact area at equal load).  The rigid shell keeps the same
surface material, so its effective friction is lower at equal load.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ComplianceError(ValueError):
    pass


def _validate_curve(curve):
    c = np.asarray(curve, dtype=float)
    if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] < 2:
        raise ComplianceError("curve must be a list of (penetration, force) pairs")
    if abs(c[0, 0]) > 1e-12 or abs(c[0, 1]) > 1e-12:
        raise ComplianceError("curve must start at (0, 0)")
    if np.any(np.diff(c[:, 0]) <= 0):
        raise ComplianceError("curve penetrations must be strictly increasing")
    if np.any(np.diff(c[:, 1]) < 0):
        raise ComplianceError("curve forces must be non-decreasing")
    return c


DEFAULT_SOFT_CURVE = ((0.0, 0.0), (1.0, 0.5), (2.0, 1.3), (3.0, 2.5), (5.0, 6.0), (8.0, 13.0))


@dataclass(frozen=True)
class SkinModel:
    """Regularized-Coulomb skin contact model for one skin variant."""

    normal_curve: tuple = DEFAULT_SOFT_CURVE  # (penetration mm, force N) pairs
    tangential_stiffness: float = 2.0  # N/mm
    friction_coefficient: float = 1.1
    slip_regularization_velocity: float = 5.0  # mm of anchor travel per solver step
    variant: str = "soft"
    thickness: float = 3.0  # mm offset of the skin surface from the bone

    def __post_init__(self):
        object.__setattr__(self, "normal_curve",
                           tuple(map(tuple, _validate_curve(self.normal_curve))))
        if self.tangential_stiffness <= 0 or self.friction_coefficient < 0:
            raise ComplianceError("tangential stiffness must be > 0 and friction >= 0")

    def normal_force(self, penetration):
        """Piecewise-linear normal force; extrapolates the last segment."""
        c = np.asarray(self.normal_curve)
        if penetration <= 0:
            return 0.0
        if penetration >= c[-1, 0]:
            slope = (c[-1, 1] - c[-2, 1]) / (c[-1, 0] - c[-2, 0])
            return float(c[-1, 1] + slope * (penetration - c[-1, 0]))
        return float(np.interp(penetration, c[:, 0], c[:, 1]))

    def normal_energy(self, penetration):
        """Integral of the normal curve from 0 to penetration (N*mm)."""
        if penetration <= 0:
            return 0.0
        c = np.asarray(self.normal_curve)
        x = c[:, 0]
        f = c[:, 1]
        e = 0.0
        prev_x, prev_f = 0.0, 0.0
        for xi, fi in zip(x[1:], f[1:]):
            if penetration <= xi:
                fp = prev_f + (fi - prev_f) * (penetration - prev_x) / (xi - prev_x)
                return float(e + 0.5 * (prev_f + fp) * (penetration - prev_x))
            e += 0.5 * (prev_f + fi) * (xi - prev_x)
            prev_x, prev_f = xi, fi
        slope = (f[-1] - f[-2]) / (x[-1] - x[-2])
        d = penetration - prev_x
        return float(e + prev_f * d + 0.5 * slope * d * d)


def rigid_skin_pair(soft: SkinModel, stiffness_factor=30.0, friction_factor=0.5,
                    tangential_factor=3.0) -> SkinModel:
    """Build the rigid counterpart of a soft skin.

    The normal curve is scaled by ``stiffness_factor`` (kept within the 10-40x
    window), the effective friction drops with the vanishing contact patch,
    and the tangential spring stiffens.
    """
    if not 10.0 <= stiffness_factor <= 40.0:
        raise ComplianceError("rigid/soft stiffness factor must lie in [10, 40]")
    curve = tuple((x, stiffness_factor * f) for x, f in soft.normal_curve)
    return SkinModel(
        normal_curve=curve,
        tangential_stiffness=soft.tangential_stiffness * tangential_factor,
        friction_coefficient=soft.friction_coefficient * friction_factor,
        slip_regularization_velocity=soft.slip_regularization_velocity,
        variant="rigid",
        thickness=soft.thickness,
    )


def skin_for_variant(variant, soft: SkinModel | None = None) -> SkinModel:
    soft = soft if soft is not None else SkinModel()
    if variant == "soft":
        return soft
    if variant == "rigid":
        return rigid_skin_pair(soft)
    raise ComplianceError(f"unknown skin variant '{variant}'")


def contact_response(skin: SkinModel, penetration, tangential_stretch):
    """Normal force, shear force and slip flag for one contact.

    Shear is the tangential spring force capped by the friction cone:
    ``min(k_t * |stretch|, mu * normal)`` with the sign of the stretch.
    """
    if penetration < 0:
        raise ComplianceError(f"penetration must be >= 0, got {penetration}")
    normal = skin.normal_force(penetration)
    elastic = skin.tangential_stiffness * abs(tangential_stretch)
    cap = skin.friction_coefficient * normal
    slip = normal > 0 and elastic >= cap
    shear = min(elastic, cap) * (1.0 if tangential_stretch >= 0 else -1.0)
    return normal, shear, slip


@dataclass(frozen=True)
class WristModel:
    """6-DoF spring between the commanded and actual wrist pose."""

    # vertical axis matched to the measured human-wrist give; the lateral
    # axes are held an order stiffer so planar pinch reactions do not walk
    # the hand sideways (only the vertical curve is documented)
    translational_stiffness: tuple = (1.2, 0.12, 1.2)  # N/mm per axis
    rotational_stiffness: tuple = (20000.0, 20000.0, 20000.0)  # N*mm/rad per axis
    commanded_pose: tuple = (0.0,) * 6
    max_deflection: float = 150.0  # mm

    def __post_init__(self):
        if any(k < 0 for k in self.translational_stiffness + self.rotational_stiffness):
            raise ComplianceError("wrist stiffnesses must be >= 0")

    @classmethod
    def preset(cls, name, commanded_pose=(0.0,) * 6):
        """Shipped presets.

        ``replay``: the compliant impedance-mode spring.  ``teach``: zero
        stiffness, pose follows the operator (deflection frozen at zero).
        ``locked``: rigid mounting used for the single-finger rigs (deflection
        frozen at zero).
        """
        if name == "teach":
            return cls((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), tuple(commanded_pose),
                       max_deflection=0.0)
        if name == "locked":
            return cls((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), tuple(commanded_pose),
                       max_deflection=0.0)
        if name == "replay":
            return cls(commanded_pose=tuple(commanded_pose))
        raise ComplianceError(f"unknown wrist preset '{name}'")

    def energy(self, deflection):
        d = np.asarray(deflection, dtype=float)
        kt = np.asarray(self.translational_stiffness)
        kr = np.asarray(self.rotational_stiffness)
        return float(0.5 * np.dot(kt, d[:3] ** 2) + 0.5 * np.dot(kr, d[3:] ** 2))


@dataclass(frozen=True)
class ComplianceProfile:
    """A sampled force-displacement curve with provenance."""

    samples: tuple  # ((displacement mm, force N), ...)
    source: str = "simulated"  # human-measured | simulated | config

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 2:
            raise ComplianceError("profile needs at least two (displacement, force) samples")
        if np.any(np.diff(s[:, 0]) <= 0):
            raise ComplianceError("profile displacements must be strictly increasing")
        object.__setattr__(self, "samples", tuple(map(tuple, s)))

    @property
    def displacements(self):
        return np.asarray(self.samples)[:, 0]

    @property
    def forces(self):
        return np.asarray(self.samples)[:, 1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["displacement_mm", "force_n"])
            for d, f in self.samples:
                w.writerow([repr(float(d)), repr(float(f))])

    @classmethod
    def from_csv(cls, path, source="config"):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["displacement_mm", "force_n"]:
            raise ComplianceError(f"{path}: expected header 'displacement_mm,force_n'")
        try:
            samples = [(float(d), float(f)) for d, f in rows[1:]]
        except ValueError as e:
            raise ComplianceError(f"{path}: non-numeric sample: {e}") from None
        return cls(tuple(samples), source=source)


def stiffness_ratio(a: ComplianceProfile, b: ComplianceProfile, n_samples=512):
    """Ratio of mean secant stiffnesses of two profiles on their common domain.

    Returns (ratio, per_sample_ratios); the per-sample ratios are force ratios
    on a dense resampling of the overlap.  Satisfies ratio(a,b) == 1/ratio(b,a).
    """
    lo = max(a.displacements[0], b.displacements[0])
    hi = min(a.displacements[-1], b.displacements[-1])
    if hi <= lo:
        raise ComplianceError("profiles have no overlapping displacement domain")
    grid = np.linspace(lo, hi, n_samples)
    fa = np.interp(grid, a.displacements, a.forces)
    fb = np.interp(grid, b.displacements, b.forces)
    # mean secant stiffness = integral of force / integral of displacement
    denom = np.trapezoid(grid, grid)
    ka = np.trapezoid(fa, grid) / denom
    kb = np.trapezoid(fb, grid) / denom
    mask = grid > lo + 1e-12 if lo <= 0 else np.ones_like(grid, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_sample = np.where(np.abs(fb) > 1e-15, fa / fb, np.nan)
    return float(ka / kb), per_sample[mask]


def probe_wrist(wrist: WristModel, direction=(0.0, -1.0, 0.0), travel=100.0, n=51):
    """Quasi-static push against the wrist spring: exactly k*d per axis."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    kt = np.asarray(wrist.translational_stiffness)
    xs = np.linspace(0.0, travel, n)
    forces = [float(np.linalg.norm(kt * (x * d))) for x in xs]
    samples = tuple(zip(xs.tolist(), forces))
    return ComplianceProfile(samples, source="simulated")


def plateau_metric(profile: ComplianceProfile):
    """Force slope over the final third of travel relative to the onset slope
    (fitted over the first sixth).  Small values mean the force plateaus."""
    d = profile.displacements
    f = profile.forces
    span = d[-1] - d[0]
    head = d <= d[0] + span / 6.0
    tail = d >= d[-1] - span / 3.0
    if head.sum() < 2 or tail.sum() < 2:
        raise ComplianceError("profile too sparse for the plateau metric")
    k_head = np.polyfit(d[head], f[head], 1)[0]
    k_tail = np.polyfit(d[tail], f[tail], 1)[0]
    return float(k_tail / k_head)


def load_human_reference(name):
    """Optional user-digitized human curves (reporting only, never oracles).

    Looks for ``data/compliance/human_<name>.csv``; returns None when the slot
    is empty.
    """
    path = Path(__file__).parent / "data" / "compliance" / f"human_{name}.csv"
    if not path.exists():
        return None
    return ComplianceProfile.from_csv(path, source="human-measured")
