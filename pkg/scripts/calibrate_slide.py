"""Scratch calibration for the slide experiment geometry."""
import numpy as np

from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.waypoints import HandWaypoint, Segment, Trajectory
from handsim.probes import plate_forces


def slide_desc(skin="soft", finger="soft", mount_y=80.0):
    return {
        "schema_version": 1, "plane": "side",
        "hand": {"mount": [0, mount_y, 0, 0, 0, 0], "skin": skin, "finger": finger},
        "fixtures": [{"kind": "plate", "origin": [0, 0], "angle": 0.0, "digits": ["index"]}],
        "objects": [],
    }


def mk_traj(corners, ids, dur=1.0, name="slide_back"):
    wps = []
    for mcp, pip in corners:
        d = np.zeros(12)
        d[ids.index("index_mcp")] = mcp
        d[ids.index("index_pipdip")] = pip
        wps.append(HandWaypoint(tuple(d), dur))
    return Trajectory(name, [Segment("hand", wps)])


BACK = [(8, 1), (14, 1), (14, 9), (8, 9)]


def run_one(mount_y, skin="soft", finger="soft", corners=BACK, dmcp=0.0, dz=0.0, dth=0.0):
    scene = build_scene(slide_desc(skin=skin, finger=finger, mount_y=mount_y))
    scene.fixture("plate").offset(dz, dth)
    ids = scene.hand.spec.actuator_ids
    traj = mk_traj(corners, ids)
    od = {"index_mcp": dmcp} if dmcp else None
    run = run_trajectory(scene, traj, dt=0.1, overdrive=od)
    plate = run.solver.scene.fixture("plate")
    fv = np.array([plate_forces(s.state, plate)[0] for s in run.steps])
    fh = np.array([plate_forces(s.state, plate)[1] for s in run.steps])
    conv = sum(1 for s in run.steps if s.state.converged)
    return run, fv, fh, conv


if __name__ == "__main__":
    for mount_y in (74.0, 80.0, 86.0):
        run, fv, fh, conv = run_one(mount_y)
        mid = len(fv) // 2
        print(f"mount {mount_y}: steps={len(fv)} conv={conv} contact={np.sum(fv>1e-6)} "
              f"Fv mid={fv[mid]:.3f} max={fv.max():.3f} Fh mid={fh[mid]:.3f} "
              f"maxabs={np.abs(fh).max():.3f}")
