"""Scratch calibration for the knob-turning experiment."""
import numpy as np

from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.waypoints import HandWaypoint, Segment, Trajectory

KNOB_CENTER = (90.0, -57.0)


def knob_desc(skin="soft", finger="soft", diameter=45.0, tau=3.3, center=KNOB_CENTER):
    return {
        "schema_version": 1, "plane": "top",
        "hand": {"mount": [0, 0, 0, 0, 0, 0], "skin": skin, "finger": finger},
        "fixtures": [{"kind": "knob", "center": list(center), "diameter": diameter,
                      "resisting_torque": tau, "digits": ["thumb", "middle"]}],
        "objects": [],
    }


def soft_traj(ids):
    # three waypoints: approach, mid-drag, end-drag; middle finger drags the
    # bottom face with its PIP channel while the thumb sweeps the right face
    def w(m_mcp, m_pip, t_mcp, t_pip, dur=1.2):
        d = np.zeros(12)
        d[ids.index("middle_mcp")] = m_mcp
        d[ids.index("middle_pipdip")] = m_pip
        d[ids.index("thumb_mcp")] = t_mcp
        d[ids.index("thumb_pipdip")] = t_pip
        return HandWaypoint(tuple(d), dur)

    return Trajectory("knob_soft", [Segment("hand", [
        w(7.5, 1.0, 3.0, 0.0),
        w(7.5, 5.0, 0.5, 0.0),
        w(7.5, 9.0, -2.0, 0.0),
    ])])


def run_one(skin="soft", finger="soft", diameter=45.0, tau=3.3, dx=0.0, dy=0.0, dt=0.1):
    desc = knob_desc(skin=skin, finger=finger, diameter=diameter, tau=tau,
                     center=(KNOB_CENTER[0] + dx, KNOB_CENTER[1] + dy))
    scene = build_scene(desc)
    ids = scene.hand.spec.actuator_ids
    run = run_trajectory(scene, soft_traj(ids), dt=dt)
    knob = run.solver.scene.fixture("knob")
    maxforce = 0.0
    for s in run.steps:
        for c in s.state.contacts:
            if c.penetration > 0:
                maxforce = max(maxforce, c.normal)
    return np.degrees(knob.turn_angle), maxforce, run


if __name__ == "__main__":
    for skin in ("soft", "rigid"):
        for tau in (3.3, 18.8):
            theta, fmax, run = run_one(skin=skin, tau=tau)
            conv = sum(1 for s in run.steps if s.state.converged)
            print(f"skin={skin} tau={tau}: theta={theta:7.2f} deg  maxN={fmax:5.2f} conv={conv}/{len(run.steps)}")
