"""Pick-and-place robustness: displacement marches, the extended unattended
run, and grasp-type classification over the object catalog.

Success means the object's center of mass ends at least 30 mm above the table
with two or more active contacts.  Displacement marches move the object
outward along one axis until two consecutive failures; the largest successful
offset per sign is the measured limit, compared against the geometric
feasibility estimate.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..hand import data_path
from ..scene import apply_displacement, build_scene, load_object_catalog
from ..solver import run_trajectory
from .. import waypoints
from .classify import GraspClassificationError, classify_grasp, grasp_match_matrix, load_human_labels
from .common import ReportStore, SweepSpec, TrialResult, run_cells
from .limits import estimate_geometric_limit, region_to_csv

SUCCESS_CLEARANCE_MM = 30.0
MARCH_STEP_MM = 5.0


def load_tabletop_scene(entry, skin="soft", finger="soft", scene_path=None):
    desc = json.loads(Path(scene_path or data_path("scenes", "tabletop.json")).read_text())
    desc["hand"]["skin"] = skin
    desc["hand"]["finger"] = finger
    obj = {
        "name": entry["name"], "footprint": entry["footprint"],
        "height": entry["height"], "mass_g": entry["mass_g"],
        "friction": entry.get("friction", 1.0),
        "pose": [entry["x"], entry["height"] / 2.0, 0.0],
        "lateral_center": entry.get("lateral_center", 0.0),
        "yaw": entry.get("yaw", 0.0),
    }
    desc["objects"] = [obj]
    return build_scene(desc)


def family_trajectory(entry, traj_dir=None):
    name = f"grasp_{entry['family']}"
    path = Path(traj_dir) / f"{name}.traj" if traj_dir else data_path(
        "trajectories", f"{name}.traj")
    return waypoints.load(path)


def grasp_once(entry, delta=(0.0, 0.0), skin="soft", finger="soft", dt=0.1,
               traj_dir=None, scene_path=None, classify=False):
    """One pick attempt; returns (success, metrics)."""
    scene = load_tabletop_scene(entry, skin=skin, finger=finger, scene_path=scene_path)
    name = scene.objects[0].name
    if any(delta):
        apply_displacement(scene, name, delta)
    traj = family_trajectory(entry, traj_dir)
    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5)
    final = run.final
    obj = run.solver.scene.object(name)
    clearance = final.configuration.object_poses[name][1] - entry["height"] / 2.0
    contacts = [c for c in final.contacts
                if c.body_id == f"object:{name}" and c.penetration > 0]
    success = clearance >= SUCCESS_CLEARANCE_MM and len(contacts) >= 2
    metrics = {
        "success": bool(success),
        "clearance": float(clearance),
        "final_contacts": len(contacts),
        "grasp_type": "",
        "converged_steps": int(sum(1 for s in run.steps if s.state.converged)),
        "steps": len(run.steps),
    }
    if classify and success:
        try:
            metrics["grasp_type"] = classify_grasp(final, obj).name
        except GraspClassificationError:
            metrics["grasp_type"] = ""
    return success, metrics, run


def march_limit(entry, direction, sign, step_mm=MARCH_STEP_MM, max_steps=14,
                dt=0.1, traj_dir=None, scene_path=None, on_trial=None):
    """Outward displacement march: stop after two consecutive failures.

    ``direction`` is "vertical" (the approach axis in the table plane) or
    "horizontal" (across the digit planes).  Returns the largest successful
    offset magnitude (0.0 if even the first step fails).
    """
    axis = (1.0, 0.0) if direction == "vertical" else (0.0, 1.0)
    best = 0.0
    fails = 0
    for k in range(0, max_steps + 1):
        off = k * step_mm
        delta = (axis[0] * off * sign, axis[1] * off * sign)
        success, metrics, _ = grasp_once(entry, delta, dt=dt, traj_dir=traj_dir,
                                         scene_path=scene_path)
        if on_trial:
            on_trial(off * sign, direction, success, metrics)
        if success:
            best = off
            fails = 0
        else:
            fails += 1
            if fails >= 2:
                break
    return best


def run_pick_place_sweep(objects=None, out_dir="out/pickplace", dt=0.1,
                         step_mm=MARCH_STEP_MM, traj_dir=None, scene_path=None,
                         directions=("vertical", "horizontal"),
                         outliers=("can",)):
    """Measured versus geometric displacement limits per object."""
    objects = objects if objects is not None else [
        o for o in load_object_catalog() if o.get("family")]
    store = ReportStore(out_dir)
    per_object = {}
    for entry in objects:
        key = entry["name"]
        rec = {"name": key, "family": entry["family"], "seen": entry.get("seen", True)}
        scene = load_tabletop_scene(entry, scene_path=scene_path)
        traj = family_trajectory(entry, traj_dir)
        obj = scene.objects[0]
        region = estimate_geometric_limit(scene, traj, obj, dt=dt)
        origin = (obj.pose[0], obj.lateral_center)
        geo_v = region.span(origin, (1.0, 0.0))
        geo_h = region.span(origin, (0.0, 1.0))
        rec["geometric_vertical"] = geo_v
        rec["geometric_horizontal"] = geo_h
        region_to_csv(region, Path(out_dir) / f"region_{key}.csv")

        def trial_cb(off, direction, success, metrics):
            store.add(TrialResult(
                {"object": key, "direction": direction, "offset": float(off),
                 "repeat": 0},
                {**metrics}))

        measured = {}
        for direction, geo in (("vertical", geo_v), ("horizontal", geo_h)):
            if direction not in directions:
                continue
            lo = march_limit(entry, direction, -1.0, step_mm=step_mm, dt=dt,
                             traj_dir=traj_dir, scene_path=scene_path, on_trial=trial_cb)
            hi = march_limit(entry, direction, +1.0, step_mm=step_mm, dt=dt,
                             traj_dir=traj_dir, scene_path=scene_path, on_trial=trial_cb)
            measured[direction] = (lo, hi)
            span_geo = geo[0] + geo[1]
            span_meas = lo + hi
            rec[f"measured_{direction}"] = (lo, hi)
            rec[f"ratio_{direction}"] = (span_meas / span_geo) if span_geo > 0 else None
        per_object[key] = rec
    summary = {"objects": per_object}
    for direction in directions:
        ratios = [r[f"ratio_{direction}"] for k, r in per_object.items()
                  if r.get(f"ratio_{direction}") is not None and k not in outliers]
        if ratios:
            summary[f"ratio_{direction}_mean"] = float(np.mean(ratios))
            summary[f"ratio_{direction}_std"] = float(np.std(ratios))
    summary["outliers_excluded"] = list(outliers)
    store.write_report()
    store.write_summary(summary)
    return store


def run_extended(n_grasps=50, out_dir="out/extended", noise_sigma=0.0, seed=0,
                 objects=None, dt=0.1, traj_dir=None, scene_path=None):
    """Unattended repeated grasping with optional placement noise."""
    objects = objects if objects is not None else [
        o for o in load_object_catalog() if o.get("family")]
    store = ReportStore(out_dir)
    rng = np.random.default_rng(seed)
    # noise draws are deterministic per trial index regardless of resumption
    draws = rng.normal(0.0, noise_sigma, size=(max(n_grasps, 1), 2)) \
        if noise_sigma > 0 else np.zeros((max(n_grasps, 1), 2))

    def trial(cell):
        entry = next(o for o in objects if o["name"] == cell["object"])
        delta = tuple(draws[cell["trial"]])
        success, metrics, _ = grasp_once(entry, delta, dt=dt, traj_dir=traj_dir,
                                         scene_path=scene_path)
        metrics["dx"] = float(delta[0])
        metrics["dv"] = float(delta[1])
        return TrialResult(dict(cell), metrics)

    cells = SweepSpec(kind="extended", grid={
        "trial": list(range(n_grasps)),
        "object": ["__cycled__"]}, repeats=1, seed=seed)
    # cycle the catalog round-robin but keep one cell per trial index
    seq = []
    for i in range(n_grasps):
        seq.append({"object": objects[i % len(objects)]["name"], "trial": i,
                    "repeat": 0})
    for cell in seq:
        if store.has(cell):
            continue
        try:
            result = trial(dict(cell))
            result.inputs = dict(cell)
        except Exception as e:
            result = TrialResult(dict(cell), {}, error=f"{type(e).__name__}: {e}")
        store.add(result)
    results = store.results()
    rows = [r for r in results if not r.error]
    per_object = {}
    for r in rows:
        o = r.inputs["object"]
        per_object.setdefault(o, [0, 0])
        per_object[o][1] += 1
        if r.metrics.get("success"):
            per_object[o][0] += 1
    failures = {o: c[1] - c[0] for o, c in per_object.items() if c[1] - c[0] > 0}
    summary = {
        "n": len(rows),
        "successes": sum(1 for r in rows if r.metrics.get("success")),
        "rate": float(np.mean([1.0 if r.metrics.get("success") else 0.0
                               for r in rows])) if rows else None,
        "per_object": {o: {"success": c[0], "total": c[1]} for o, c in per_object.items()},
        "failure_clustering": failures,
        "noise_sigma": noise_sigma,
        "errors": sum(1 for r in results if r.error),
    }
    store.write_report()
    store.write_summary(summary)
    return store


def run_classification(out_dir="out/classify", objects=None, dt=0.1,
                       traj_dir=None, scene_path=None, labels_path=None):
    """Classify the grasp of every catalog entry and compare to human labels."""
    objects = objects if objects is not None else load_object_catalog()
    store = ReportStore(out_dir)

    def trial(cell):
        entry = next(o for o in objects if o["grasp_key"] == cell["grasp_key"])
        success, metrics, run = grasp_once(entry, dt=dt, traj_dir=traj_dir,
                                           scene_path=scene_path, classify=True)
        g = entry.get("geometry", {})
        metrics.update({f"geom_{k}": v for k, v in g.items()})
        return TrialResult(dict(cell), metrics)

    spec = SweepSpec(kind="classify",
                     grid={"grasp_key": [o["grasp_key"] for o in objects]})
    results = run_cells(spec, trial, store)
    robot = {}
    for r in results:
        if not r.error and r.metrics.get("grasp_type"):
            robot[r.inputs["grasp_key"]] = r.metrics["grasp_type"]
    human = load_human_labels(labels_path)
    summary = {"n_grasps": len(results), "robot_labels": robot,
               "classified": len(robot)}
    common = {k: robot[k] for k in robot if k in human}
    if len(common) == len(human) and common:
        from .classify import GraspType
        matrix = grasp_match_matrix(
            {k: GraspType[v] for k, v in common.items()}, human)
        summary["match_matrix"] = matrix.as_dict()
    store.write_report()
    store.write_summary(summary)
    return store
