"""Command-line entry points.

`handsim traj ...` validates and replays waypoint files, `handsim exp ...`
runs the experiment families, `handsim probe` samples compliance profiles,
and `handsim serve` starts the HTTP session service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import waypoints
from .hand import data_path, load_hand_spec
from .scene import build_scene
from .solver import run_trajectory, write_trace


@click.group()
def main():
    """Quasi-static simulator for a tendon-driven compliant hand."""


@main.group()
def traj():
    """Waypoint trajectory tools."""


@traj.command("validate")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--hand", "hand_config", type=click.Path(exists=True), default=None,
              help="Hand configuration JSON used for travel-range checks.")
def traj_validate(manifest, hand_config):
    trajectory = waypoints.load(manifest)
    spec = load_hand_spec(hand_config)
    trajectory.validate(spec)
    click.echo(f"ok: {trajectory.name}: {len(trajectory.segments)} segment(s), "
               f"{trajectory.waypoint_count} waypoint(s)")


@traj.command("replay")
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--traj", "manifest", type=click.Path(exists=True), required=True)
@click.option("--trace", "trace_path", type=click.Path(), required=True,
              help="Output CSV state trace.")
@click.option("--dt", default=0.05, show_default=True)
@click.option("--tolerance", default=3e-5, show_default=True)
def traj_replay(scene_path, manifest, trace_path, dt, tolerance):
    scene = build_scene(scene_path)
    trajectory = waypoints.load(manifest)
    run = run_trajectory(scene, trajectory, dt=dt, tolerance=tolerance)
    write_trace(run.steps, trace_path)
    conv = sum(1 for s in run.steps if s.state.converged)
    click.echo(f"replayed {len(run.steps)} steps ({conv} converged) -> {trace_path}")


@main.group()
def exp():
    """Experiment harness."""


def _sweep_from(path):
    from .experiments.common import SweepSpec
    return SweepSpec.from_json(path) if path else None


def _check_invariants(store, checks):
    failed = [name for name, ok in checks.items() if ok is False]
    if failed:
        click.echo(f"invariant check failures: {failed}", err=True)
        sys.exit(1)


@exp.command("slide")
@click.option("--sweep", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--traj-dir", type=click.Path(exists=True), default=None)
@click.option("--dt", default=0.1, show_default=True)
def exp_slide(sweep, out_dir, scene_path, traj_dir, dt):
    from .experiments import slide
    store = slide.run_sweep(_sweep_from(sweep), out_dir=out_dir,
                            scene_path=scene_path, traj_dir=traj_dir, dt=dt)
    summary = json.loads((Path(out_dir) / "summary.json").read_text())
    click.echo(json.dumps({k: v for k, v in summary.items()
                           if not isinstance(v, list)}, indent=2))
    _check_invariants(store, {"skin_all_soft_gt_rigid": summary.get("skin_all_soft_gt_rigid"),
                              "finger_soft_std_lt_rigid": summary.get("finger_soft_std_lt_rigid")})


@exp.command("knob")
@click.option("--sweep", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--traj-dir", type=click.Path(exists=True), default=None)
@click.option("--dt", default=0.1, show_default=True)
def exp_knob(sweep, out_dir, scene_path, traj_dir, dt):
    from .experiments import knob
    store = knob.run_sweep(_sweep_from(sweep), out_dir=out_dir,
                           scene_path=scene_path, traj_dir=traj_dir, dt=dt)
    summary = json.loads((Path(out_dir) / "summary.json").read_text())
    click.echo(json.dumps(summary, indent=2, default=str))
    _check_invariants(store, {"soft_drop_lt_rigid": summary.get("soft_drop_lt_rigid")})


@exp.command("gait")
@click.option("--sweep", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--traj-dir", type=click.Path(exists=True), default=None)
@click.option("--dt", default=0.1, show_default=True)
def exp_gait(sweep, out_dir, scene_path, traj_dir, dt):
    from .experiments import gait
    store = gait.run_sweep(_sweep_from(sweep), out_dir=out_dir,
                           scene_path=scene_path, traj_dir=traj_dir, dt=dt)
    summary = json.loads((Path(out_dir) / "summary.json").read_text())
    click.echo(json.dumps(summary, indent=2))
    _check_invariants(store, {"soft_var_le_rigid": summary.get("soft_var_le_rigid")})


@exp.command("pickplace")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--step", "step_mm", default=5.0, show_default=True)
@click.option("--dt", default=0.1, show_default=True)
def exp_pickplace(out_dir, step_mm, dt):
    from .experiments import pickplace
    pickplace.run_pick_place_sweep(out_dir=out_dir, step_mm=step_mm, dt=dt)
    click.echo((Path(out_dir) / "summary.json").read_text())


@exp.command("extended")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("-n", "n_grasps", default=50, show_default=True)
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dt", default=0.1, show_default=True)
def exp_extended(out_dir, n_grasps, noise_sigma, seed, dt):
    from .experiments import pickplace
    pickplace.run_extended(n_grasps=n_grasps, out_dir=out_dir,
                           noise_sigma=noise_sigma, seed=seed, dt=dt)
    click.echo((Path(out_dir) / "summary.json").read_text())


@exp.command("limits")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--object", "object_name", default=None)
@click.option("--dt", default=0.1, show_default=True)
def exp_limits(out_dir, object_name, dt):
    from .experiments.limits import estimate_geometric_limit, region_to_csv
    from .experiments.pickplace import family_trajectory, load_tabletop_scene
    from .scene import load_object_catalog
    objects = [o for o in load_object_catalog() if o.get("family")]
    if object_name:
        objects = [o for o in objects if o["name"] == object_name]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    areas = {}
    for entry in objects:
        scene = load_tabletop_scene(entry)
        traj = family_trajectory(entry)
        region = estimate_geometric_limit(scene, traj, scene.objects[0], dt=dt)
        region_to_csv(region, out / f"region_{entry['name']}.csv")
        areas[entry["name"]] = region.area
    (out / "summary.json").write_text(json.dumps({"areas_mm2": areas}, indent=2))
    click.echo(json.dumps(areas, indent=2))


@exp.command("classify")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--dt", default=0.1, show_default=True)
def exp_classify(out_dir, dt):
    from .experiments import pickplace
    pickplace.run_classification(out_dir=out_dir, dt=dt)
    click.echo((Path(out_dir) / "summary.json").read_text())


@main.command("probe")
@click.argument("element", type=click.Choice(["skin", "finger", "wrist"]))
@click.option("--variant", default="soft", type=click.Choice(["soft", "rigid"]))
@click.option("--out", "out_path", type=click.Path(), required=True)
def probe_cmd(element, variant, out_path):
    from .probes import probe_profile
    prof = probe_profile(element, variant=variant)
    prof.to_csv(out_path)
    click.echo(f"{element} ({variant}): {len(prof.samples)} samples -> {out_path}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(host, port):
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
