"""Knob turning with the thumb and middle finger.

The turn angle of the torque-loaded dial is the performance metric.  The soft
finger runs a three-waypoint motion; the rigid finger replays a densely
authored contour-following path (it cannot comply, so the commanded tip path
must track the dial).  A contact force beyond the damage threshold marks the
trial as damaging, mirroring what over-stiff hardware does to itself.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..hand import data_path
from ..scene import build_scene
from ..solver import run_trajectory
from .. import waypoints
from .common import ReportStore, SweepSpec, TrialResult, run_cells

DEFAULT_GRID = {
    "tau": [3.3, 18.8],
    "diameter": [30.0, 45.0, 60.0],
    "offset_x": [0.0, 10.0],
    "skin": ["soft", "rigid"],
    "finger": ["soft", "rigid"],
}

DAMAGE_THRESHOLD_N = 8.0


def default_sweep():
    return SweepSpec(kind="knob", grid=dict(DEFAULT_GRID), repeats=1,
                     options={"damage_threshold": DAMAGE_THRESHOLD_N})


def knob_trial(cell, scene_path=None, traj_dir=None, dt=0.1,
               damage_threshold=DAMAGE_THRESHOLD_N):
    desc = json.loads(Path(scene_path or data_path("scenes", "knob.json")).read_text())
    desc["hand"]["skin"] = cell["skin"]
    desc["hand"]["finger"] = cell["finger"]
    knob_cfg = next(f for f in desc["fixtures"] if f["kind"] == "knob")
    knob_cfg["diameter"] = cell["diameter"]
    knob_cfg["resisting_torque"] = cell["tau"]
    knob_cfg["center"] = [knob_cfg["center"][0] + cell.get("offset_x", 0.0),
                          knob_cfg["center"][1] + cell.get("offset_y", 0.0)]
    scene = build_scene(desc)
    name = "knob_soft" if cell["finger"] == "soft" else "knob_rigid"
    traj = waypoints.load(Path(traj_dir) / f"{name}.traj") if traj_dir \
        else waypoints.load(data_path("trajectories", f"{name}.traj"))
    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5)
    knob = run.solver.scene.fixture("knob")
    max_force = 0.0
    for s in run.steps:
        for c in s.state.contacts:
            if c.penetration > 0:
                max_force = max(max_force, c.normal)
    metrics = {
        "theta_deg": float(math.degrees(knob.turn_angle)),
        "max_contact_force": float(max_force),
        "damage": bool(max_force > damage_threshold),
        "waypoints": traj.waypoint_count,
    }
    diag = {"converged_steps": int(sum(1 for s in run.steps if s.state.converged)),
            "steps": len(run.steps)}
    return TrialResult(dict(cell), metrics, diag)


def summarize(results):
    rows = [r for r in results if not r.error and "theta_deg" in r.metrics]

    def theta(skin, finger, tau, diameter=45.0, offset_x=0.0):
        vals = [r.metrics["theta_deg"] for r in rows
                if r.inputs["skin"] == skin and r.inputs["finger"] == finger
                and r.inputs["tau"] == tau and r.inputs["diameter"] == diameter
                and r.inputs.get("offset_x", 0.0) == offset_x]
        return float(np.mean(vals)) if vals else None

    summary = {"n_trials": len(rows)}
    # (c) skin comparison: theta degradation low tau -> high tau
    drops = {}
    for skin in ("soft", "rigid"):
        lo = theta(skin, "soft", 3.3)
        hi = theta(skin, "soft", 18.8)
        if lo is not None and hi is not None:
            drops[skin] = {"theta_low": lo, "theta_high": hi, "drop": lo - hi}
    summary["skin_tau_degradation"] = drops
    if "soft" in drops and "rigid" in drops:
        summary["soft_drop_lt_rigid"] = bool(drops["soft"]["drop"] < drops["rigid"]["drop"])

    # diameter effect per skin (recorded, direction not asserted)
    diameters = sorted({r.inputs["diameter"] for r in rows})
    summary["diameter_effect"] = {
        skin: {str(d): theta(skin, "soft", 3.3, diameter=d) for d in diameters}
        for skin in ("soft", "rigid")}

    # rigid-finger damage under displacement
    damage_rows = [r for r in rows if r.inputs["finger"] == "rigid"
                   and r.inputs.get("offset_x", 0.0) != 0.0]
    summary["rigid_finger_displaced_damage"] = (
        bool(damage_rows) and any(r.metrics["damage"] for r in damage_rows))
    summary["waypoint_counts"] = {
        "soft": next((r.metrics["waypoints"] for r in rows
                      if r.inputs["finger"] == "soft"), None),
        "rigid": next((r.metrics["waypoints"] for r in rows
                       if r.inputs["finger"] == "rigid"), None)}
    return summary


def run_sweep(spec: SweepSpec = None, out_dir="out/knob", scene_path=None,
              traj_dir=None, dt=0.1):
    spec = spec or default_sweep()
    store = ReportStore(out_dir)
    thr = spec.options.get("damage_threshold", DAMAGE_THRESHOLD_N)
    results = run_cells(spec, lambda cell: knob_trial(
        cell, scene_path=scene_path, traj_dir=traj_dir, dt=dt,
        damage_threshold=thr), store)
    store.write_report()
    store.write_summary(summarize(results))
    return store
