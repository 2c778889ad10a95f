"""Finger gaiting on a held block.

A block is squeezed between the thumb and the four fingers; fingers lift and
re-plant one at a time (1-2-3-4) and the cycle repeats until the block slides
out.  Completed gait cycles until the drop and the mean holding force are the
metrics; the block width is varied around its nominal value.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..hand import data_path
from ..scene import build_scene
from ..solver import run_trajectory
from .. import waypoints
from .common import ReportStore, SweepSpec, TrialResult, run_cells

DEFAULT_GRID = {
    "w_delta": [-5.0, 0.0, 5.0],
    "skin": ["soft", "rigid"],
    "finger": ["soft", "rigid"],
}

DROP_MM = 25.0


def default_sweep():
    return SweepSpec(kind="gait", grid=dict(DEFAULT_GRID), repeats=1)


def gait_trial(cell, scene_path=None, traj_dir=None, dt=0.1, drop_mm=DROP_MM):
    desc = json.loads(Path(scene_path or data_path("scenes", "gait.json")).read_text())
    desc["hand"]["skin"] = cell["skin"]
    desc["hand"]["finger"] = cell["finger"]
    obj = desc["objects"][0]
    w0 = obj["footprint"][1][0] - obj["footprint"][0][0]
    w = w0 + cell["w_delta"]
    # widen the footprint symmetrically about the block center
    cx = (obj["footprint"][1][0] + obj["footprint"][0][0]) / 2.0
    for v in obj["footprint"]:
        v[0] = cx + (w / 2.0 if v[0] > cx else -w / 2.0)
    scene = build_scene(desc)
    name = "gait" if cell["finger"] == "soft" else "gait_rigid"
    path = Path(traj_dir) / f"{name}.traj" if traj_dir else data_path("trajectories", f"{name}.traj")
    if not Path(path).exists():  # the rigid variant reuses the same pattern
        path = Path(traj_dir) / "gait.traj" if traj_dir else data_path("trajectories", "gait.traj")
    traj = waypoints.load(path)
    y0 = scene.object("block").pose[1]
    cycles = (traj.waypoint_count - 1) // 8

    drop_step = [None]
    hold_forces = []

    def on_step(st):
        y = st.state.configuration.object_poses["block"][1]
        if drop_step[0] is None and y < y0 - drop_mm:
            drop_step[0] = st.index
        if drop_step[0] is None:
            ns = [c.normal for c in st.state.contacts
                  if c.body_id == "object:block" and c.penetration > 0]
            if ns:
                hold_forces.append(sum(ns) / 2.0)  # two-sided compression

    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5, on_step=on_step)
    total_steps = len(run.steps)
    if drop_step[0] is None:
        completed = cycles
    else:
        completed = int(cycles * drop_step[0] / total_steps)
    metrics = {
        "completed_gaits": int(completed),
        "dropped": drop_step[0] is not None,
        "drop_step": drop_step[0] if drop_step[0] is not None else -1,
        "f_hold": float(np.mean(hold_forces)) if hold_forces else 0.0,
        "cycles_commanded": cycles,
    }
    diag = {"converged_steps": int(sum(1 for s in run.steps if s.state.converged)),
            "steps": total_steps}
    return TrialResult(dict(cell), metrics, diag)


def summarize(results):
    rows = [r for r in results if not r.error and "completed_gaits" in r.metrics]
    summary = {"n_trials": len(rows)}
    var = {}
    for fing in ("soft", "rigid"):
        counts = [r.metrics["completed_gaits"] for r in rows
                  if r.inputs["finger"] == fing and r.inputs["skin"] == "soft"]
        holds = [r.metrics["f_hold"] for r in rows
                 if r.inputs["finger"] == fing and r.inputs["skin"] == "soft"]
        if counts:
            var[fing] = {"counts": counts, "variance": float(np.var(counts)),
                         "f_hold_mean": float(np.mean(holds))}
    summary["finger_gait_variance"] = var
    if "soft" in var and "rigid" in var:
        summary["soft_var_le_rigid"] = bool(var["soft"]["variance"] <= var["rigid"]["variance"])
    skin_counts = {}
    for skin in ("soft", "rigid"):
        counts = [r.metrics["completed_gaits"] for r in rows
                  if r.inputs["skin"] == skin and r.inputs["finger"] == "soft"]
        if counts:
            skin_counts[skin] = {"counts": counts, "variance": float(np.var(counts)),
                                 "mean": float(np.mean(counts))}
    summary["skin_gait_counts"] = skin_counts
    if "soft" in skin_counts and "rigid" in skin_counts:
        summary["skin_soft_var_le_rigid"] = bool(
            skin_counts["soft"]["variance"] <= skin_counts["rigid"]["variance"])
    return summary


def run_sweep(spec: SweepSpec = None, out_dir="out/gait", scene_path=None,
              traj_dir=None, dt=0.1):
    spec = spec or default_sweep()
    store = ReportStore(out_dir)
    results = run_cells(spec, lambda cell: gait_trial(
        cell, scene_path=scene_path, traj_dir=traj_dir, dt=dt), store)
    store.write_report()
    store.write_summary(summarize(results))
    return store
