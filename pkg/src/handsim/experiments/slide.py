"""Finger sliding on an instrumented plate.

Two stroke directions (front/back) driven by the MCP and coupled PIP/DIP
channels of one finger; the plate pose is offset in height and tilt between
trials, skins and finger springs are swapped, and the MCP overdrive is applied
on the soft finger.  The headline metric is the tangential loadcell force at
the midpoint of the motion.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..hand import data_path
from ..probes import plate_forces
from ..scene import build_scene
from ..solver import run_trajectory, write_trace
from .. import waypoints
from .common import ReportStore, SweepSpec, TrialResult, run_cells

DEFAULT_GRID = {
    "dz": [-10.0, 0.0, 10.0],
    "dtheta": [-0.175, 0.0, 0.175],
    "skin": ["soft", "rigid"],
    "finger": ["soft", "rigid"],
    "dmcp": [0.0, 7.5],
    "motion": ["back", "front"],
}


def default_sweep():
    return SweepSpec(kind="slide", grid=dict(DEFAULT_GRID), repeats=1)


def _load_fixture(name):
    return waypoints.load(data_path("trajectories", f"{name}.traj"))


def slide_trial(cell, scene_path=None, traj_dir=None, dt=0.1, trace_dir=None):
    """Run one slide trial and extract the loadcell metrics."""
    if cell["dmcp"] > 0 and cell["finger"] == "rigid":
        return TrialResult(dict(cell), {"skipped": 1},
                           diagnostics={"reason": "overdrive applies to the soft finger"})
    desc = json.loads(Path(scene_path or data_path("scenes", "slide.json")).read_text())
    desc["hand"]["skin"] = cell["skin"]
    desc["hand"]["finger"] = cell["finger"]
    scene = build_scene(desc)
    scene.fixture("plate").offset(cell["dz"], cell["dtheta"])
    name = "slide_back" if cell["motion"] == "back" else "slide_front"
    traj = waypoints.load(Path(traj_dir) / f"{name}.traj") if traj_dir \
        else _load_fixture(name)
    overdrive = {"index_mcp": cell["dmcp"]} if cell["dmcp"] else None
    run = run_trajectory(scene, traj, dt=dt, overdrive=overdrive, tolerance=3e-5)
    plate = run.solver.scene.fixture("plate")
    fv = np.array([plate_forces(s.state, plate)[0] for s in run.steps])
    fh = np.array([plate_forces(s.state, plate)[1] for s in run.steps])
    mid = len(run.steps) // 2
    metrics = {
        "midpoint_shear": float(abs(fh[mid])),
        "midpoint_normal": float(fv[mid]),
        "max_fv": float(fv.max()),
        "max_fh": float(np.abs(fh).max()),
        "contact_steps": int(np.sum(fv > 1e-9)),
        "steps": len(run.steps),
    }
    diag = {
        "converged_steps": int(sum(1 for s in run.steps if s.state.converged)),
        "max_residual": float(max(s.state.residual for s in run.steps)),
    }
    if trace_dir:
        write_trace(run.steps, Path(trace_dir) / (
            f"slide_{cell['motion']}_{cell['skin']}_{cell['finger']}"
            f"_dz{cell['dz']:+g}_dth{cell['dtheta']:+g}_dm{cell['dmcp']:g}"
            f"_r{cell['repeat']}.csv"))
    return TrialResult(dict(cell), metrics, diag)


def summarize(results):
    """Soft-vs-rigid comparisons the acceptance suite checks."""
    rows = [r for r in results if not r.error and "midpoint_shear" in r.metrics]

    def sel(**kw):
        out = []
        for r in rows:
            if all(r.inputs.get(k) == v for k, v in kw.items()):
                out.append(r)
        return out

    summary = {"n_trials": len(rows)}
    # (a) skin comparison at soft finger, no overdrive: midpoint shear per grid point
    grid_cmp = []
    for motion in ("back", "front"):
        for dz in sorted({r.inputs["dz"] for r in rows}):
            for dth in sorted({r.inputs["dtheta"] for r in rows}):
                soft = sel(skin="soft", finger="soft", dmcp=0.0, motion=motion, dz=dz, dtheta=dth)
                rigid = sel(skin="rigid", finger="soft", dmcp=0.0, motion=motion, dz=dz, dtheta=dth)
                if soft and rigid:
                    s = np.mean([r.metrics["midpoint_shear"] for r in soft])
                    g = np.mean([r.metrics["midpoint_shear"] for r in rigid])
                    grid_cmp.append({"motion": motion, "dz": dz, "dtheta": dth,
                                     "soft": s, "rigid": g,
                                     "soft_gt_rigid": bool(s > g),
                                     "ratio": float(s / g) if g > 0 else None})
    summary["skin_midpoint_shear"] = grid_cmp
    summary["skin_all_soft_gt_rigid"] = bool(grid_cmp) and all(c["soft_gt_rigid"] for c in grid_cmp)
    ratios = [c["ratio"] for c in grid_cmp if c["ratio"]]
    summary["skin_shear_ratio_mean"] = float(np.mean(ratios)) if ratios else None

    # (b) finger variant: max-force standard deviation across the offset grid
    fv_std = {}
    for fing in ("soft", "rigid"):
        vals = [r.metrics["max_fv"] for r in sel(skin="soft", finger=fing, dmcp=0.0, motion="back")]
        if vals:
            fv_std[fing] = {"std": float(np.std(vals)), "mean": float(np.mean(vals)),
                            "n": len(vals)}
    summary["finger_max_force_std"] = fv_std
    if "soft" in fv_std and "rigid" in fv_std:
        summary["finger_soft_std_lt_rigid"] = bool(fv_std["soft"]["std"] < fv_std["rigid"]["std"])
        if fv_std["soft"]["std"] > 0:
            summary["finger_std_ratio"] = float(fv_std["rigid"]["std"] / fv_std["soft"]["std"])
    return summary


def run_sweep(spec: SweepSpec = None, out_dir="out/slide", scene_path=None,
              traj_dir=None, dt=0.1, traces=True):
    spec = spec or default_sweep()
    store = ReportStore(out_dir)
    trace_dir = Path(out_dir) / "traces" if traces else None
    if trace_dir:
        trace_dir.mkdir(parents=True, exist_ok=True)
    results = run_cells(spec, lambda cell: slide_trial(
        cell, scene_path=scene_path, traj_dir=traj_dir, dt=dt, trace_dir=trace_dir), store)
    store.write_report()
    store.write_summary(summarize(results))
    return store
