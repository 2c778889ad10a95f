"""Simulated force-displacement probing of the compliant elements.

Mirrors the loadcell-on-arm measurement: a plate is pressed quasi-statically
against the element along a fixed direction while the reaction force is
recorded.  The wrist probe is a pure spring and is evaluated in closed form;
the skin probe is the normal curve itself (bone held fixed); the finger probe
runs the full statics solver so the series-elastic MCP joint and posture
leverage shape the curve.
"""

from __future__ import annotations

import numpy as np

from .compliance import (ComplianceProfile, SkinModel, WristModel,
                         probe_wrist, skin_for_variant)
from .hand import ActuatorCommand, load_hand_spec
from .scene import LoadcellPlate, Scene, HandPlacement
from .solver import StaticsSolver

FINGER_PROBE = {
    # flexed posture pushed back toward extension at the fingertip; the
    # series-elastic MCP dominates and posture leverage flattens the curve
    "mcp_mm": 10.8,
    "pipdip_mm": 0.5,
    "travel_mm": 40.0,
    "samples": 41,
    "start_gap_mm": 0.3,
}


def probe_skin(skin: SkinModel, travel=6.0, n=25) -> ComplianceProfile:
    """Plate pressed into the skin over a fixed bone: force equals the curve."""
    xs = np.linspace(0.0, travel, n)
    samples = tuple((float(x), skin.normal_force(x)) for x in xs)
    return ComplianceProfile(samples, source="simulated")


def _finger_probe_scene(finger_variant, skin_variant):
    spec = load_hand_spec().with_finger_variant(finger_variant)
    skin = skin_for_variant(skin_variant)
    placement = HandPlacement(spec=spec, skin=skin, skin_variant=skin_variant,
                              finger_variant=finger_variant,
                              mount=np.zeros(6))
    plate = LoadcellPlate(fixture_id="probe", origin=(0.0, -200.0), angle=0.0,
                          friction=0.0, digits=("index",))
    return Scene("finger-probe", "side", placement, [plate], [])


def plate_forces(state, plate: LoadcellPlate):
    """Loadcell report: F_V presses into the plate, F_H is the signed tangent
    component (Newton's-third-law sums of the contact reactions)."""
    fv = 0.0
    fh = 0.0
    t = plate.tangent()
    n = plate.normal()
    for rec in state.contacts:
        if rec.body_id != f"fixture:{plate.fixture_id}" or rec.penetration <= 0:
            continue
        f_on_plate = -rec.normal * rec.normal_dir + rec.shear * np.array(
            [-rec.normal_dir[1], rec.normal_dir[0]])
        fv += float(-(f_on_plate @ n))
        fh += float(f_on_plate @ t)
    return fv, fh


def probe_finger(finger_variant="soft", skin_variant="soft",
                 config=FINGER_PROBE) -> ComplianceProfile:
    """Push a horizontal plate up into the flexed fingertip and record force."""
    scene = _finger_probe_scene(finger_variant, skin_variant)
    solver = StaticsSolver(scene)
    spec = scene.hand.spec
    cmd = ActuatorCommand.from_dict(spec, {"index_mcp": config["mcp_mm"],
                                           "index_pipdip": config["pipdip_mm"]})
    plate = scene.fixture("probe")
    # find the rest fingertip height, then start the plate just below it
    rest = solver.rest_configuration(cmd)
    from .hand import link_segments
    segs = link_segments(spec, rest.joints, "index")
    tip_y = segs[-1][1][1]
    lowest = min(seg[1][1] for seg in segs)
    start = min(tip_y, lowest) - config["start_gap_mm"]
    xs = np.linspace(0.0, config["travel_mm"], config["samples"])
    state = None
    samples = []
    for x in xs:
        plate.origin = (0.0, start + x)
        warm = state.configuration if state is not None else None
        state = solver.solve(cmd, warm_start=warm)
        solver.update_anchors(state)
        fv, _ = plate_forces(state, plate)
        samples.append((float(x), fv))
    return ComplianceProfile(tuple(samples), source="simulated")


def probe_profile(element, variant="soft", wrist: WristModel = None,
                  skin: SkinModel = None) -> ComplianceProfile:
    """Force-displacement profile of one compliant element.

    ``element`` is one of ``skin``, ``finger``, ``wrist``.
    """
    if element == "wrist":
        return probe_wrist(wrist if wrist is not None else WristModel.preset("replay"))
    if element == "skin":
        return probe_skin(skin if skin is not None else skin_for_variant(variant))
    if element == "finger":
        return probe_finger(finger_variant=variant)
    raise ValueError(f"unknown element '{element}'")
