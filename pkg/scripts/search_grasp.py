"""Grid search for workable tabletop grasp waypoints (dev tool)."""
import itertools
import json
import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/scripts")
import calibrate_grasp as cg
from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.waypoints import ArmWaypoint, HandWaypoint, Segment, Trajectory


def arm_rel(x, y, dur=1.0):
    return ArmWaypoint((x, y, 0.0), (1.0, 0.0, 0.0, 0.0), "replay", dur)


def traj4(ids, fingers, thumb, press=-84.0, lift=40.0):
    open_hand = np.zeros(12)
    for d in ("index", "middle", "ring", "little"):
        open_hand[ids.index(f"{d}_mcp")] = 2.0
    open_hand[ids.index("thumb_mcp")] = 8.0
    flexed = open_hand.copy()
    for d in ("index", "middle", "ring", "little"):
        flexed[ids.index(f"{d}_mcp")] = fingers[0]
        flexed[ids.index(f"{d}_pipdip")] = fingers[1]
    flexed[ids.index("thumb_mcp")] = thumb[0]
    flexed[ids.index("thumb_pipdip")] = thumb[1]
    return Trajectory("tabletop", [
        Segment("hand", [HandWaypoint(tuple(open_hand), 0.6)]),
        Segment("arm", [arm_rel(0, press, 1.2)]),
        Segment("hand", [HandWaypoint(tuple(flexed), 1.2)]),
        Segment("arm", [arm_rel(0, lift, 1.6)]),
    ])


def run_case(h, w, x_obj, fingers, thumb):
    scene = build_scene({**cg.tabletop_desc(width=w, height=h, x_obj=x_obj),
                         "hand": {"mount": [0, 150, 0, 0, 0, 0.0],
                                  "skin": "soft", "finger": "soft"}})
    ids = scene.hand.spec.actuator_ids
    run = run_trajectory(scene, traj4(ids, fingers, thumb), dt=0.1, tolerance=3e-5)
    final = run.final
    clearance = final.configuration.object_poses["obj"][1] - h / 2
    ncons = len({c.link_id for c in final.contacts
                 if c.body_id == "object:obj" and c.penetration > 0})
    return clearance, ncons


if __name__ == "__main__":
    h, w = 50.0, 30.0
    results = []
    t00 = time.time()
    for f_mcp, f_pip, t_mcp, t_pip, x_off in itertools.product(
            (8.0, 9.5), (5.0, 7.0), (1.0, 2.0), (0.3, 1.0), (126.0, 130.0)):
        t0 = time.time()
        try:
            clearance, ncons = run_case(h, w, x_off + w / 2, (f_mcp, f_pip), (t_mcp, t_pip))
        except Exception as e:
            clearance, ncons = float("nan"), -1
        rec = {"f": [f_mcp, f_pip], "t": [t_mcp, t_pip], "x_off": x_off,
               "clear": round(float(clearance), 1), "ncons": ncons,
               "sec": round(time.time() - t0, 1)}
        results.append(rec)
        print(json.dumps(rec), flush=True)
    results.sort(key=lambda r: -(r["clear"] if r["clear"] == r["clear"] else -1e9))
    print("BEST:", json.dumps(results[:5], indent=1), flush=True)
    print("total %.0fs" % (time.time() - t00))
