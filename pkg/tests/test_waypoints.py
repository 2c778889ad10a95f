import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from handsim import waypoints as wp


def hand_wp(vals, duration=1.0):
    return wp.HandWaypoint(tuple(vals), duration)


def test_single_waypoint_constant():
    seg = wp.Segment("hand", [hand_wp([1.0] * 12)])
    out = wp.interpolate(seg, 5)
    assert len(out) == 1
    assert np.allclose(out[0], 1.0)


def test_two_waypoint_linearity():
    a = hand_wp([0.0] * 12)
    b = hand_wp([10.0] * 12)
    out = wp.interpolate(wp.Segment("hand", [a, b]), 5)
    firsts = [o[0] for o in out]
    assert firsts == pytest.approx([0.0, 2.5, 5.0, 7.5, 10.0])


def test_quaternion_shortest_arc_midpoint():
    q0 = (1.0, 0.0, 0.0, 0.0)
    q1 = (math.cos(math.pi / 4), 0.0, 0.0, math.sin(math.pi / 4))  # 90 deg about z
    a = wp.ArmWaypoint((0, 0, 0), q0, "replay", 1.0)
    b = wp.ArmWaypoint((0, 0, 0), q1, "replay", 1.0)
    out = wp.interpolate(wp.Segment("arm", [a, b]), 3)
    _, quat, _ = out[1]
    yaw = 2.0 * math.atan2(quat[3], quat[0])
    assert yaw == pytest.approx(math.pi / 4, abs=1e-12)


def test_endpoints_reproduced_exactly():
    a = hand_wp(np.linspace(0, 11, 12))
    b = hand_wp(np.linspace(5, -6, 12))
    out = wp.interpolate(wp.Segment("hand", [a, b]), 7)
    assert np.array_equal(out[0], np.asarray(a.displacements))
    assert np.array_equal(out[-1], np.asarray(b.displacements))


@given(st.integers(0, 11), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_channel_independence(channel, delta):
    base = np.linspace(0, 11, 12)
    mod = base.copy()
    mod[channel] += delta
    seg_a = wp.Segment("hand", [hand_wp(base), hand_wp(base * 0.5)])
    changed_end = base * 0.5
    changed_end_full = changed_end.copy()
    changed_end_full[channel] += delta
    seg_b = wp.Segment("hand", [hand_wp(base), hand_wp(changed_end_full)])
    out_a = wp.interpolate(seg_a, 6)
    out_b = wp.interpolate(seg_b, 6)
    for va, vb in zip(out_a, out_b):
        mask = np.ones(12, dtype=bool)
        mask[channel] = False
        assert np.allclose(va[mask], vb[mask])


def test_zero_step_count_rejected():
    seg = wp.Segment("hand", [hand_wp([0] * 12), hand_wp([1] * 12)])
    with pytest.raises(wp.TrajectoryError):
        wp.interpolate(seg, 0)


def test_quaternion_norm_enforced():
    with pytest.raises(wp.TrajectoryError):
        wp.ArmWaypoint((0, 0, 0), (1.0, 0.0, 0.1, 0.0), "replay", 1.0)


def _sample_traj():
    seg1 = wp.Segment("arm", [
        wp.ArmWaypoint((0, 120, 0), (1, 0, 0, 0), "replay", 1.0),
        wp.ArmWaypoint((0, 40.5, 0), (1, 0, 0, 0), "replay", 2.0)])
    seg2 = wp.Segment("hand", [hand_wp(np.linspace(0, 5.5, 12), 1.5)])
    seg3 = wp.Segment("arm", [wp.ArmWaypoint((0, 40.5, 0), (1, 0, 0, 0), "replay", 1.0),
                              wp.ArmWaypoint((-30, 160, 0), (1, 0, 0, 0), "replay", 2.0)])
    return wp.Trajectory("pick", [seg1, seg2, seg3], provenance="authored")


def test_save_load_roundtrip_bit_exact(tmp_path):
    traj = _sample_traj()
    m1 = wp.save(traj, tmp_path / "pick.traj")
    again = wp.load(m1)
    assert again.name == traj.name
    assert again.waypoint_count == traj.waypoint_count
    # save -> load -> save is byte-identical, manifest and all segment files
    out2 = tmp_path / "again"
    out2.mkdir()
    m2 = wp.save(again, out2 / "pick.traj")
    assert m1.read_bytes() == m2.read_bytes()
    for line1, line2 in zip(m1.read_text().splitlines()[1:], m2.read_text().splitlines()[1:]):
        f1 = m1.parent / line1.split(",")[1]
        f2 = m2.parent / line2.split(",")[1]
        assert f1.read_bytes() == f2.read_bytes()


def test_hand_csv_row_count(tmp_path):
    traj = wp.Trajectory("h", [wp.Segment("hand", [hand_wp([0] * 12), hand_wp([1] * 12),
                                                   hand_wp([2] * 12)])])
    m = wp.save(traj, tmp_path / "h.traj")
    seg_file = m.parent / m.read_text().splitlines()[1].split(",")[1]
    rows = seg_file.read_text().strip().splitlines()
    assert len(rows) == 3 + 1  # waypoints + header


def test_missing_segment_file_names_it(tmp_path):
    traj = _sample_traj()
    m = wp.save(traj, tmp_path / "pick.traj")
    victim = m.parent / m.read_text().splitlines()[2].split(",")[1]
    victim.unlink()
    with pytest.raises(wp.TrajectoryError) as ei:
        wp.load(m)
    assert victim.name in str(ei.value)


def test_malformed_rows_report_position(tmp_path):
    path = tmp_path / "seg.csv"
    path.write_text(",".join(wp.HAND_HEADER) + "\n1.0," + ",".join(["0"] * 11) + "\n")
    with pytest.raises(wp.TrajectoryError) as ei:
        wp._load_segment("hand", path)
    assert "row 2" in str(ei.value)


def test_recording_session_groups_segments():
    s = wp.RecordingSession("demo")
    s.record("hand", np.zeros(12))
    s.record("hand", np.zeros(12))
    s.record("arm", (np.array([0, 0, 0.0]), np.array([1, 0, 0, 0.0])))
    traj = s.trajectory()
    assert [seg.kind for seg in traj.segments] == ["hand", "arm"]
    assert len(traj.segments[0].waypoints) == 2
    w0, w1 = traj.segments[0].waypoints
    assert w0.displacements == w1.displacements  # recorded twice without moving


def test_steps_for_ceil():
    assert wp.steps_for(1.0, 0.05) == 20
    assert wp.steps_for(0.01, 0.05) == 2
    assert wp.steps_for(0.30001, 0.05) == 7
