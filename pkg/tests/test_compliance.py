import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from handsim.compliance import (ComplianceError, ComplianceProfile, SkinModel,
                                WristModel, contact_response, plateau_metric,
                                probe_wrist, rigid_skin_pair, skin_for_variant,
                                stiffness_ratio)


def test_zero_penetration_no_contact():
    skin = SkinModel()
    assert contact_response(skin, 0.0, 5.0) == (0.0, 0.0, False)


def test_negative_penetration_rejected():
    with pytest.raises(ComplianceError):
        contact_response(SkinModel(), -0.1, 0.0)


def test_coulomb_saturation_exact():
    skin = SkinModel()
    n = skin.normal_force(2.0)
    stretch = 100.0  # force the cap
    normal, shear, slip = contact_response(skin, 2.0, stretch)
    assert normal == pytest.approx(n)
    assert shear == pytest.approx(skin.friction_coefficient * n)
    assert slip


@given(st.floats(0, 8), st.floats(-20, 20))
@settings(max_examples=200, deadline=None)
def test_friction_cone_hard_inequality(pen, stretch):
    skin = SkinModel()
    normal, shear, _ = contact_response(skin, pen, stretch)
    assert abs(shear) <= skin.friction_coefficient * normal + 1e-12


@given(st.floats(0.01, 7.5), st.floats(-15, 15))
@settings(max_examples=100, deadline=None)
def test_contact_response_lipschitz(pen, stretch):
    # continuity in both arguments: small input changes, small output changes
    skin = SkinModel()
    eps = 1e-6
    k_curve = 10.0  # generous bound on the curve slope in N/mm
    L = max(skin.tangential_stiffness, skin.friction_coefficient * k_curve) * 4
    n0, s0, _ = contact_response(skin, pen, stretch)
    n1, s1, _ = contact_response(skin, pen + eps, stretch)
    n2, s2, _ = contact_response(skin, pen, stretch + eps)
    assert abs(n1 - n0) <= L * eps and abs(s1 - s0) <= L * eps
    assert abs(n2 - n0) <= L * eps and abs(s2 - s0) <= L * eps


def test_normal_energy_is_curve_integral():
    skin = SkinModel()
    for pen in (0.5, 1.0, 2.7, 6.0, 9.5):
        xs = np.linspace(0, pen, 20001)
        quad = np.trapezoid([skin.normal_force(x) for x in xs], xs)
        assert skin.normal_energy(pen) == pytest.approx(quad, rel=1e-6)


def test_rigid_pairing_stiffness_window():
    soft = SkinModel()
    rigid = rigid_skin_pair(soft)
    pens = np.linspace(0.1, 8.0, 40)
    for p in pens:
        ratio = rigid.normal_force(p) / soft.normal_force(p)
        assert 10.0 <= ratio <= 40.0
    assert rigid.friction_coefficient < soft.friction_coefficient


def test_rigid_pairing_rejects_out_of_window():
    with pytest.raises(ComplianceError):
        rigid_skin_pair(SkinModel(), stiffness_factor=50.0)


def test_wrist_probe_linear_spring_exact():
    wrist = WristModel(translational_stiffness=(0.37, 0.37, 0.37))
    prof = probe_wrist(wrist, direction=(0, -1, 0), travel=80.0)
    d = prof.displacements
    f = prof.forces
    slope = np.polyfit(d, f, 1)[0]
    assert slope == pytest.approx(0.37, rel=1e-9)
    for di, fi in prof.samples:
        assert fi == pytest.approx(0.37 * di, rel=1e-9, abs=1e-12)


def test_wrist_presets():
    teach = WristModel.preset("teach")
    assert teach.translational_stiffness == (0.0, 0.0, 0.0)
    replay = WristModel.preset("replay")
    assert all(k > 0 for k in replay.translational_stiffness)


def test_stiffness_ratio_identity_and_scaling():
    prof = ComplianceProfile(((0.0, 0.0), (1.0, 1.0), (2.0, 2.5), (3.0, 4.5)))
    scaled = ComplianceProfile(tuple((d, 30.0 * f) for d, f in prof.samples))
    assert stiffness_ratio(prof, prof)[0] == pytest.approx(1.0)
    assert stiffness_ratio(scaled, prof)[0] == pytest.approx(30.0)


def test_stiffness_ratio_reciprocal_and_oracle():
    a = ComplianceProfile(((0.0, 0.0), (0.8, 0.3), (2.0, 1.4), (4.0, 4.2)))
    b = ComplianceProfile(((0.2, 0.1), (1.5, 0.9), (3.0, 2.2), (5.0, 5.0)))
    rab, _ = stiffness_ratio(a, b)
    rba, _ = stiffness_ratio(b, a)
    assert rab == pytest.approx(1.0 / rba, rel=1e-9)
    # dense-resampling trapezoid oracle
    lo = 0.2
    hi = 4.0
    grid = np.linspace(lo, hi, 200001)
    fa = np.interp(grid, a.displacements, a.forces)
    fb = np.interp(grid, b.displacements, b.forces)
    expected = np.trapezoid(fa, grid) / np.trapezoid(fb, grid)
    assert rab == pytest.approx(expected, rel=1e-3)


def test_stiffness_ratio_requires_overlap():
    a = ComplianceProfile(((0.0, 0.0), (1.0, 1.0)))
    b = ComplianceProfile(((2.0, 0.0), (3.0, 1.0)))
    with pytest.raises(ComplianceError):
        stiffness_ratio(a, b)


def test_profile_csv_roundtrip(tmp_path):
    prof = ComplianceProfile(((0.0, 0.0), (1.25, 0.733), (2.5, 1.9)))
    path = tmp_path / "prof.csv"
    prof.to_csv(path)
    again = ComplianceProfile.from_csv(path)
    assert again.samples == prof.samples
    prof.to_csv(tmp_path / "prof2.csv")
    assert (tmp_path / "prof.csv").read_bytes() == (tmp_path / "prof2.csv").read_bytes()


def test_profile_csv_rejects_nonmonotone(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("displacement_mm,force_n\n0.0,0.0\n2.0,1.0\n1.0,2.0\n")
    with pytest.raises(ComplianceError):
        ComplianceProfile.from_csv(path)


def test_profile_csv_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("disp,force\n0.0,0.0\n")
    with pytest.raises(ComplianceError):
        ComplianceProfile.from_csv(path)


def test_skin_variant_helper():
    assert skin_for_variant("soft").variant == "soft"
    assert skin_for_variant("rigid").variant == "rigid"
    with pytest.raises(ComplianceError):
        skin_for_variant("squishy")
