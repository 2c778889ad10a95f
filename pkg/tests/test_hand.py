import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from handsim.hand import (ActuatorCommand, AbductionAxis, CommandRangeError,
                          DigitSpec, HandConfigError, HandSpec, JointVector,
                          fingertip_fk, load_hand_spec, rest_pipdip_angle,
                          tendon_to_rest_pose)


@pytest.fixture(scope="module")
def spec():
    return load_hand_spec()


def cmd_of(spec, **values):
    return ActuatorCommand.from_dict(spec, values)


def test_zero_command_rest_pose(spec):
    jv = tendon_to_rest_pose(spec, ActuatorCommand())
    assert np.allclose(jv.values, 0.0)
    assert jv.clamped == ()


def test_mcp_moment_arm_relation():
    # 10 mm of flexor displacement over a 10 mm moment arm is exactly 1 rad;
    # oracle: finite-displacement consumption r * theta == displacement
    spec = load_hand_spec()
    digit = spec.digits["index"]
    custom = DigitSpec(
        digit_id="index", link_lengths=digit.link_lengths, mcp_moment_arm=10.0,
        pipdip_moment_arms=digit.pipdip_moment_arms, joint_limits=digit.joint_limits,
        base_offset=digit.base_offset, curl_sign=digit.curl_sign)
    digits = dict(spec.digits)
    digits["index"] = custom
    spec2 = HandSpec(digits=digits, actuators=spec.actuators,
                     mcp_series_spring=spec.mcp_series_spring,
                     rigid_mcp_stiffness=spec.rigid_mcp_stiffness,
                     pipdip_tendon_stiffness=spec.pipdip_tendon_stiffness,
                     palm_geometry=spec.palm_geometry, mount_pose=spec.mount_pose,
                     abduction_split=spec.abduction_split)
    jv = tendon_to_rest_pose(spec2, cmd_of(spec2, index_mcp=10.0))
    assert jv["index.mcp_flex"] == pytest.approx(1.0, abs=1e-12)
    assert 10.0 - custom.mcp_moment_arm * jv["index.mcp_flex"] == pytest.approx(0.0, abs=1e-12)
    assert jv["index.pip"] == 0.0 and jv["index.dip"] == 0.0


def test_pipdip_split_by_coupling_ratio(spec):
    jv = tendon_to_rest_pose(spec, cmd_of(spec, index_pipdip=8.0))
    d = spec.digits["index"]
    expected = rest_pipdip_angle(d, spec.pipdip_tendon_stiffness, 8.0)
    assert jv["index.pip"] == pytest.approx(expected, abs=1e-12)
    assert jv["index.dip"] == pytest.approx(d.pipdip_coupling_ratio * expected, abs=1e-12)
    # oracle: dense scan of the 1-D elastic balance the closed form solves
    c = d.pipdip_coupling_ratio
    reff = d.pipdip_moment_arms[0] + c * d.pipdip_moment_arms[1]
    kret = d.return_spring_stiffness[0] + c * c * d.return_spring_stiffness[1]
    thetas = np.linspace(0, 1.5, 200001)
    energy = 0.5 * spec.pipdip_tendon_stiffness * (8.0 - reff * thetas) ** 2 \
        + 0.5 * kret * thetas ** 2
    assert expected == pytest.approx(thetas[np.argmin(energy)], abs=1e-5)


def test_max_travel_clamps_and_flags(spec):
    hi = spec.actuator("index_pipdip").travel[1]
    jv = tendon_to_rest_pose(spec, cmd_of(spec, index_pipdip=hi))
    lo_p, hi_p = spec.digits["index"].joint_limits["pip"]
    lo_d, hi_d = spec.digits["index"].joint_limits["dip"]
    assert jv["index.pip"] <= hi_p and jv["index.dip"] <= hi_d
    assert any(c.startswith("index.") for c in jv.clamped)


def test_out_of_range_command_names_actuator(spec):
    bad = cmd_of(spec, middle_mcp=1e4)
    with pytest.raises(CommandRangeError) as ei:
        tendon_to_rest_pose(spec, bad)
    assert "middle_mcp" in str(ei.value)


def test_overdrive_must_be_nonnegative():
    with pytest.raises(ValueError):
        ActuatorCommand(np.zeros(12), {"index_mcp": -1.0})


def test_fk_straight_chain_sums_lengths(spec):
    p, frame = fingertip_fk(spec, JointVector(), "index")
    assert p == pytest.approx([sum(spec.digits["index"].link_lengths), 0.0])
    assert frame["tangent"] == pytest.approx([1.0, 0.0])


def test_fk_mcp_quarter_turn(spec):
    j = np.zeros(20)
    j[4 * 1 + 0] = math.pi / 2
    p, _ = fingertip_fk(spec, JointVector(j), "index")
    assert p == pytest.approx([0.0, sum(spec.digits["index"].link_lengths)], abs=1e-9)


def test_fk_matches_matrix_chain_oracle(spec):
    rng = np.random.default_rng(5)
    d = spec.digits["middle"]
    for _ in range(50):
        q = np.zeros(20)
        q[8:12] = rng.uniform(-0.3, 1.2, 4)
        p, _ = fingertip_fk(spec, JointVector(q), "middle")
        # independent oracle: homogeneous transform composition
        T = np.eye(3)
        for L, ang in zip(d.link_lengths, (q[8], q[10], q[11])):
            R = np.eye(3)
            c, s = math.cos(ang), math.sin(ang)
            R[:2, :2] = [[c, -s], [s, c]]
            T = T @ R
            S = np.eye(3)
            S[0, 2] = L
            T = T @ S
        assert p == pytest.approx(T[:2, 2], abs=1e-9)


def test_fk_reach_bound(spec):
    rng = np.random.default_rng(9)
    reach = spec.digits["ring"].reach
    for _ in range(100):
        q = np.zeros(20)
        q[12:16] = rng.uniform(-0.3, 1.6, 4)
        p, _ = fingertip_fk(spec, JointVector(q), "ring")
        assert np.linalg.norm(p) <= reach + 1e-9
    p0, _ = fingertip_fk(spec, JointVector(), "ring")
    assert np.linalg.norm(p0) == pytest.approx(reach)


@given(st.floats(-15, 15), st.floats(-15, 15), st.floats(0, 1))
@settings(max_examples=60, deadline=None)
def test_rest_pose_piecewise_linear_without_clamps(c1, c2, t):
    spec = load_hand_spec()
    ids = spec.actuator_ids

    def make(v):
        disp = np.zeros(12)
        disp[ids.index("ring_mcp")] = v
        return ActuatorCommand(disp)

    j1 = tendon_to_rest_pose(spec, make(c1))
    j2 = tendon_to_rest_pose(spec, make(c2))
    jm = tendon_to_rest_pose(spec, make(t * c1 + (1 - t) * c2))
    if j1.clamped or j2.clamped or jm.clamped:
        return  # linearity only promised away from clamps
    assert np.allclose(jm.values, t * j1.values + (1 - t) * j2.values, atol=1e-10)


@given(st.floats(-10, 20), st.floats(0, 5))
@settings(max_examples=60, deadline=None)
def test_mcp_monotone_in_flexor_displacement(base, inc):
    spec = load_hand_spec()
    ids = spec.actuator_ids

    def angle(v):
        disp = np.zeros(12)
        disp[ids.index("little_mcp")] = v
        return tendon_to_rest_pose(spec, ActuatorCommand(disp))["little.mcp_flex"]

    assert angle(base + inc) >= angle(base) - 1e-12


def test_hand_spec_validation_counts():
    spec = load_hand_spec()
    with pytest.raises(HandConfigError):
        HandSpec(digits=spec.digits, actuators=spec.actuators[:11],
                 mcp_series_spring=0.5, rigid_mcp_stiffness=20.0,
                 pipdip_tendon_stiffness=8.0, palm_geometry=spec.palm_geometry,
                 mount_pose=spec.mount_pose, abduction_split=spec.abduction_split)


def test_finger_variant_toggle():
    spec = load_hand_spec()
    soft = spec.with_finger_variant("soft")
    rigid = spec.with_finger_variant("rigid")
    assert soft.mcp_series_spring is not None
    assert rigid.mcp_series_spring is None
    assert rigid.mcp_stiffness() > soft.mcp_stiffness() * 10
