"""Generates the shipped scene/trajectory/catalog fixtures.

Run from the repo root: python3 scripts/author_fixtures.py
All outputs are committed data files; this script is the reproducible source.
"""
import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from handsim.hand import data_path, load_hand_spec
from handsim.waypoints import ArmWaypoint, HandWaypoint, Segment, Trajectory, save

SPEC = load_hand_spec()
IDS = SPEC.actuator_ids
DATA = Path(__file__).resolve().parents[1] / "src" / "handsim" / "data"


def hand_wp(values: dict, duration=1.0):
    d = np.zeros(12)
    for k, v in values.items():
        d[IDS.index(k)] = v
    return HandWaypoint(tuple(d), duration)


def arm_wp(x, y, yaw=0.0, duration=1.0, preset="replay", z=0.0):
    return ArmWaypoint((x, y, z), (math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2)),
                       preset, duration)


def fingers(mcp, pip, thumb_mcp=None, thumb_pip=None, extra=None):
    vals = {}
    for d in ("index", "middle", "ring", "little"):
        vals[f"{d}_mcp"] = mcp
        vals[f"{d}_pipdip"] = pip
    if thumb_mcp is not None:
        vals["thumb_mcp"] = thumb_mcp
    if thumb_pip is not None:
        vals["thumb_pipdip"] = thumb_pip
    vals.update(extra or {})
    return vals


# ---------------------------------------------------------------------------
# scenes

SCENES = {
    "slide.json": {
        "schema_version": 1, "plane": "side", "name": "slide",
        "hand": {"mount": [0, 58, 0, 0, 0, 0], "skin": "soft", "finger": "soft"},
        "fixtures": [{"kind": "plate", "origin": [85, 0], "angle": 0.0,
                      "length": 300, "digits": ["index"]}],
        "objects": [],
    },
    "knob.json": {
        "schema_version": 1, "plane": "top", "name": "knob",
        "hand": {"mount": [0, 0, 0, 0, 0, 0], "skin": "soft", "finger": "soft"},
        "fixtures": [{"kind": "knob", "center": [92, -66], "diameter": 45.0,
                      "resisting_torque": 3.3, "friction": 1.4,
                      "digits": ["thumb", "middle"]}],
        "objects": [],
    },
    "gait.json": {
        "schema_version": 1, "plane": "side", "name": "gait",
        "hand": {"mount": [0, 0, 0, 0, 0, 0], "skin": "soft", "finger": "soft"},
        "fixtures": [],
        "objects": [{
            "name": "block",
            "footprint": [[-14.0, -40.0], [14.0, -40.0], [14.0, 40.0], [-14.0, 40.0]],
            "height": 90.0, "mass_g": 120.0, "friction": 1.0,
            "pose": [141.0, -60.0, 0.0], "dof": [False, True, False],
            "kind": "block"}],
    },
    "tabletop.json": {
        "schema_version": 1, "plane": "side", "name": "tabletop",
        "hand": {"mount": [0, 150, 0, 0, 0, 0], "skin": "soft", "finger": "soft"},
        "fixtures": [{"kind": "table", "height": 0.0, "friction": 0.8,
                      "stiffness": 60.0}],
        "objects": [],
    },
}


# ---------------------------------------------------------------------------
# trajectories

def slide_cycle(corners, name):
    wps = [hand_wp({"index_mcp": m, "index_pipdip": p}, 1.0) for m, p in corners]
    return Trajectory(name, [Segment("hand", wps)], provenance="authored")


SLIDE_BACK = [(8.0, 0.0), (9.5, 0.0), (9.5, 8.0), (8.0, 8.0)]
SLIDE_FRONT = [(8.0, 8.0), (9.5, 8.0), (9.5, 0.0), (8.0, 0.0)]


def knob_soft():
    rows = [
        (11.0, 1.0, 4.0, 0.5),
        (11.0, 5.0, 0.5, 0.5),
        (11.0, 9.0, -3.0, 0.5),
    ]
    wps = [hand_wp({"middle_mcp": m, "middle_pipdip": p,
                    "thumb_mcp": tm, "thumb_pipdip": tp}, 1.2)
           for m, p, tm, tp in rows]
    return Trajectory("knob_soft", [Segment("hand", wps)], provenance="authored")


def knob_rigid():
    # contour-following path: many small middle-finger drag stations with the
    # thumb stepping down the east face in sync
    stations = np.linspace(0.0, 1.0, 15)
    wps = []
    for t in stations:
        m_pip = 1.0 + 8.0 * t
        t_mcp = 4.0 - 7.0 * t
        wps.append(hand_wp({"middle_mcp": 10.2, "middle_pipdip": m_pip,
                            "thumb_mcp": t_mcp, "thumb_pipdip": 0.5}, 0.28))
    return Trajectory("knob_rigid", [Segment("hand", wps)], provenance="authored")


GAIT_GRIP = fingers(7.0, 2.5, thumb_mcp=1.0, thumb_pip=0.5)


def gait_trajectory(cycles=6):
    wps = [hand_wp(GAIT_GRIP, 1.2)]
    for _ in range(cycles):
        for finger in ("index", "middle", "ring", "little"):
            lifted = dict(GAIT_GRIP)
            lifted[f"{finger}_mcp"] = 1.0
            lifted[f"{finger}_pipdip"] = 0.0
            wps.append(hand_wp(lifted, 0.5))
            wps.append(hand_wp(GAIT_GRIP, 0.5))
    return Trajectory("gait", [Segment("hand", wps)], provenance="authored")


GRASP_FAMILIES = {
    # family: (open, press_rel, flexed, lift_rel)
    "flat": (fingers(2.0, 0.0, thumb_mcp=8.0), -86.0,
             fingers(20.0, 7.0, thumb_mcp=0.0, thumb_pip=1.0), 40.0),
    "small": (fingers(2.0, 0.0, thumb_mcp=8.0), -84.0,
              fingers(14.0, 6.0, thumb_mcp=1.0, thumb_pip=1.0), 40.0),
    "box": (fingers(2.0, 0.0, thumb_mcp=8.0), -82.0,
            fingers(12.0, 6.0, thumb_mcp=1.5, thumb_pip=1.0), 40.0),
    "tall": (fingers(2.0, 0.0, thumb_mcp=8.0), -78.0,
             fingers(10.0, 6.0, thumb_mcp=2.0, thumb_pip=1.0), 40.0),
    "wide": (fingers(2.0, 0.0, thumb_mcp=8.0), -80.0,
             fingers(10.0, 7.5, thumb_mcp=1.0, thumb_pip=1.5), 40.0),
}


def grasp_trajectory(family):
    open_hand, press_rel, flexed, lift_rel = GRASP_FAMILIES[family]
    return Trajectory(f"grasp_{family}", [
        Segment("hand", [hand_wp(open_hand, 0.6)]),
        Segment("arm", [arm_wp(0.0, press_rel, duration=1.2)]),
        Segment("hand", [hand_wp(flexed, 1.2)]),
        Segment("arm", [arm_wp(0.0, lift_rel, duration=1.6)]),
    ], provenance="authored")


def write_all():
    scenes_dir = DATA / "scenes"
    traj_dir = DATA / "trajectories"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    traj_dir.mkdir(parents=True, exist_ok=True)
    for name, desc in SCENES.items():
        (scenes_dir / name).write_text(json.dumps(desc, indent=2) + "\n")
    save(slide_cycle(SLIDE_BACK, "slide_back"), traj_dir / "slide_back.traj")
    save(slide_cycle(SLIDE_FRONT, "slide_front"), traj_dir / "slide_front.traj")
    save(knob_soft(), traj_dir / "knob_soft.traj")
    save(knob_rigid(), traj_dir / "knob_rigid.traj")
    save(gait_trajectory(), traj_dir / "gait.traj")
    for family in GRASP_FAMILIES:
        save(grasp_trajectory(family), traj_dir / f"grasp_{family}.traj")
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    write_all()
