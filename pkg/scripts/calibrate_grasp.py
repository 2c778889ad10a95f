"""Scratch calibration for the tabletop grasp and its grasp-type ladder."""
import numpy as np

from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.waypoints import ArmWaypoint, HandWaypoint, Segment, Trajectory


def tabletop_desc(width=40.0, height=40.0, mass=80.0, x_obj=118.0, skin="soft",
                  finger="soft", lateral=0.0, deep=14.0):
    return {
        "schema_version": 1, "plane": "side",
        "hand": {"mount": [0, 0, 0, 0, 0, 0], "skin": skin, "finger": finger},
        "fixtures": [{"kind": "table", "height": 0.0, "friction": 0.8,
                      "stiffness": 60.0}],
        "objects": [{
            "name": "obj",
            "footprint": [[-width / 2, -30], [width / 2, -30], [width / 2, 30],
                          [-width / 2, 30]],
            "height": height, "mass_g": mass, "friction": 1.0,
            "pose": [x_obj, height / 2, 0.0], "lateral_center": lateral}],
    }


def arm(x, y, dur=1.0, preset="replay"):
    return ArmWaypoint((x, y, 0.0), (1.0, 0.0, 0.0, 0.0), preset, dur)


def grasp_traj(ids, approach_y=120.0, press_y=52.0, lift=(-45.0, 150.0),
               fingers=(10.5, 7.0), thumb=(5.0, 5.0), dur=1.0):
    open_hand = np.zeros(12)
    for d in ("index", "middle", "ring", "little"):
        open_hand[ids.index(f"{d}_mcp")] = 2.0
    flexed = open_hand.copy()
    for d in ("index", "middle", "ring", "little"):
        flexed[ids.index(f"{d}_mcp")] = fingers[0]
        flexed[ids.index(f"{d}_pipdip")] = fingers[1]
    flexed[ids.index("thumb_mcp")] = thumb[0]
    flexed[ids.index("thumb_pipdip")] = thumb[1]
    return Trajectory("tabletop_grasp", [
        Segment("arm", [arm(0, approach_y, 0.8), arm(0, press_y, 1.2)]),
        Segment("hand", [HandWaypoint(tuple(open_hand), 0.4),
                         HandWaypoint(tuple(flexed), 1.2)]),
        Segment("arm", [arm(0, press_y, 0.4), arm(lift[0], lift[1], 1.6)]),
    ])


def run_grasp(width=40.0, height=40.0, mass=80.0, dt=0.1, **kw):
    scene = build_scene(tabletop_desc(width=width, height=height, mass=mass,
                                      **{k: v for k, v in kw.items()
                                         if k in ("x_obj", "skin", "finger")}))
    ids = scene.hand.spec.actuator_ids
    traj = grasp_traj(ids, **{k: v for k, v in kw.items()
                              if k in ("approach_y", "press_y", "lift", "fingers", "thumb")})
    run = run_trajectory(scene, traj, dt=dt)
    final = run.final
    obj = run.solver.scene.object("obj")
    com_height = final.configuration.object_poses["obj"][1]
    clearance = com_height - height / 2.0  # bottom above table
    contacts = [c for c in final.contacts
                if c.body_id == "object:obj" and c.penetration > 0]
    links = sorted({c.link_id for c in contacts})
    return run, clearance, links, contacts


if __name__ == "__main__":
    for h in (10.0, 30.0, 50.0, 75.0, 95.0):
        run, clearance, links, contacts = run_grasp(height=h, width=40.0)
        held = clearance > 30.0 and len(contacts) >= 2
        conv = sum(1 for s in run.steps if s.state.converged)
        print(f"h={h:5.1f}: clearance={clearance:7.1f} held={held} conv={conv}/{len(run.steps)} links={links}")
