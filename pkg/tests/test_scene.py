import math

import numpy as np
import pytest

from handsim.hand import ActuatorCommand
from handsim.scene import (Knob, SceneError, Table, apply_displacement,
                           build_scene)
from handsim.solver import StaticsSolver
from handsim.probes import plate_forces

from conftest import table_scene_descriptor


def test_minimal_descriptor_table_only():
    scene = build_scene({"schema_version": 1, "plane": "side",
                         "fixtures": [{"kind": "table"}], "objects": []})
    assert len(scene.fixtures) == 1
    assert isinstance(scene.fixtures[0], Table)
    assert scene.objects == []
    assert any(d.startswith("hand.") for d in scene.defaults_applied)


def test_knob_descriptor_parameters():
    scene = build_scene({"schema_version": 1, "plane": "top",
                         "fixtures": [{"kind": "knob", "diameter": 45.0,
                                       "resisting_torque": 3.3}]})
    knob = scene.fixtures[0]
    assert isinstance(knob, Knob)
    assert knob.diameter == 45.0
    assert knob.resisting_torque == 3.3
    assert not scene.gravity_on


def test_unknown_fields_rejected():
    with pytest.raises(SceneError) as ei:
        build_scene({"schema_version": 1, "frobnicate": True})
    assert "frobnicate" in str(ei.value)
    with pytest.raises(SceneError):
        build_scene({"schema_version": 1,
                     "fixtures": [{"kind": "table", "colour": "red"}]})


def test_schema_version_required():
    with pytest.raises(SceneError):
        build_scene({"plane": "side"})


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema_version": 1,\n  "plane": }')
    with pytest.raises(SceneError) as ei:
        build_scene(p)
    assert "line 2" in str(ei.value)


def test_com_outside_footprint_rejected():
    # an L-shaped footprint whose centroid falls outside the material
    fp = [[0, 0], [10, 0], [10, 1], [1, 1], [1, 10], [0, 10]]
    from handsim.geometry import polygon_centroid, point_in_polygon
    assert not point_in_polygon(polygon_centroid(np.array(fp, float)), np.array(fp, float))
    with pytest.raises(SceneError) as ei:
        build_scene({"schema_version": 1,
                     "objects": [{"name": "ell", "footprint": fp, "height": 5,
                                  "mass_g": 10}]})
    assert "outside footprint" in str(ei.value)


def test_object_displacement_definitional():
    desc = table_scene_descriptor()
    desc["objects"][0]["pose"] = [115, 30, 0.0]
    scene = build_scene(desc)
    apply_displacement(scene, "box", (20.0, 0.0))
    assert scene.object("box").pose[0] == pytest.approx(135.0)
    assert scene.measured_offset("box") == pytest.approx([20.0, 0.0])


def test_displacement_applies_delta_minus_measured():
    scene = build_scene(table_scene_descriptor())
    obj = scene.object("box")
    obj.set_pose(obj.pose + np.array([5.0, 0, 0]))  # pre-existing offset of 5
    move = apply_displacement(scene, "box", (20.0, 0.0))
    assert move == pytest.approx([15.0, 0.0])
    assert scene.measured_offset("box") == pytest.approx([20.0, 0.0])


def test_displacement_idempotent():
    scene = build_scene(table_scene_descriptor())
    apply_displacement(scene, "box", (12.5, -3.0))
    pose1 = scene.object("box").pose.copy()
    move2 = apply_displacement(scene, "box", (12.5, -3.0))
    assert move2 == pytest.approx([0.0, 0.0])
    assert scene.object("box").pose == pytest.approx(pose1)


def test_displacement_unknown_object():
    scene = build_scene(table_scene_descriptor())
    with pytest.raises(KeyError):
        apply_displacement(scene, "ghost", (0.0, 0.0))


def test_zero_displacement_no_motion():
    scene = build_scene(table_scene_descriptor())
    pose0 = scene.object("box").pose.copy()
    apply_displacement(scene, "box", (0.0, 0.0))
    assert scene.object("box").pose == pytest.approx(pose0)


def test_loadcell_force_balance_against_skin_curve():
    # a single fingertip pressing the plate: F_V equals the analytic skin
    # normal force at the solved penetration (Newton's third law bookkeeping)
    desc = {
        "schema_version": 1, "plane": "side",
        "hand": {"mount": [0, 70, 0, 0, 0, 0]},
        "fixtures": [{"kind": "plate", "origin": [0, 0], "angle": 0.0,
                      "digits": ["index"]}],
        "objects": [],
    }
    scene = build_scene(desc)
    solver = StaticsSolver(scene)
    cmd = ActuatorCommand.from_dict(scene.hand.spec, {"index_mcp": 11.0, "index_pipdip": 1.0})
    state = solver.solve(cmd)
    plate = scene.fixture("plate")
    fv, fh = plate_forces(state, plate)
    active = [c for c in state.contacts if c.penetration > 0]
    assert len(active) >= 1
    expected = sum(scene.hand.skin.normal_force(c.penetration) for c in active)
    assert fv == pytest.approx(expected, abs=1e-9)
    assert fv > 0


def test_knob_infinite_torque_never_rotates():
    desc = {
        "schema_version": 1, "plane": "top",
        "hand": {"mount": [0, 0, 0, 0, 0, 0]},
        "fixtures": [{"kind": "knob", "center": [100, -40], "diameter": 45,
                      "resisting_torque": 1e30, "digits": ["thumb", "middle"]}],
    }
    scene = build_scene(desc)
    solver = StaticsSolver(scene)
    knob = scene.fixture("knob")
    cmd = ActuatorCommand.from_dict(scene.hand.spec, {"middle_mcp": 14.0, "thumb_mcp": 10.0})
    state = solver.solve(cmd)
    state = solver.settle_knob(knob, cmd, state)
    assert knob.turn_angle == 0.0


def test_geometry_summary_length_ge_width():
    scene = build_scene(table_scene_descriptor())
    g = scene.object("box").geometry_summary
    assert g["length"] >= g["width"]
    assert g["height"] == 60
