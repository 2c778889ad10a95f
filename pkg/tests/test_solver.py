import math

import numpy as np
import pytest

from handsim.compliance import WristModel
from handsim.hand import ActuatorCommand
from handsim.scene import build_scene
from handsim.solver import (StaticsSolver, SolverNumericError, run_trajectory,
                            solve_equilibrium, total_energy, write_trace)
from handsim.waypoints import HandWaypoint, Segment, Trajectory

from conftest import table_scene_descriptor


def grip_command(spec, mcp=14.0, pip=12.0):
    return ActuatorCommand.from_dict(spec, {
        "index_mcp": mcp, "index_pipdip": pip,
        "middle_mcp": mcp, "middle_pipdip": pip,
        "thumb_mcp": mcp * 0.8, "thumb_pipdip": pip * 0.8})


def test_rest_gauge_energy_zero():
    # hand parked clear of everything, object resting exactly on the table:
    # with gravity referenced to the build pose the initial energy is zero
    scene = build_scene(table_scene_descriptor(
        hand={"mount": [0, 250, 0, 0, 0, 0]}))
    solver = StaticsSolver(scene)
    cmd = ActuatorCommand()
    e, bd = total_energy(scene, cmd, solver.rest_configuration(cmd), solver=solver)
    assert e == pytest.approx(0.0, abs=1e-12)
    assert bd.gravity == 0.0 and bd.contact == 0.0


def test_series_spring_half_k_x_squared():
    # pin the MCP at zero by collapsing its joint limits; 2 mm of commanded
    # displacement on a 1 N/mm spring stores exactly 2.0 N*mm
    desc = table_scene_descriptor(objects=[])
    scene = build_scene(desc)
    spec = scene.hand.spec
    digits = dict(spec.digits)
    index = digits["index"]
    limits = dict(index.joint_limits)
    limits["mcp_flex"] = (0.0, 1e-12)
    from dataclasses import replace
    digits["index"] = replace(index, joint_limits=limits)
    from handsim.hand import HandSpec
    scene.hand.spec = HandSpec(
        digits=digits, actuators=spec.actuators, mcp_series_spring=1.0,
        rigid_mcp_stiffness=spec.rigid_mcp_stiffness,
        pipdip_tendon_stiffness=spec.pipdip_tendon_stiffness,
        palm_geometry=spec.palm_geometry, mount_pose=spec.mount_pose,
        abduction_split=spec.abduction_split)
    solver = StaticsSolver(scene)
    cmd = ActuatorCommand.from_dict(scene.hand.spec, {"index_mcp": 2.0})
    state = solver.solve(cmd)
    assert state.configuration.joints["index.mcp_flex"] == pytest.approx(0.0, abs=1e-9)
    assert state.breakdown.series == pytest.approx(0.5 * 1.0 * 2.0 ** 2, abs=1e-9)


def test_breakdown_sums_to_total(table_scene):
    solver = StaticsSolver(table_scene)
    cmd = grip_command(table_scene.hand.spec)
    state = solver.solve(cmd)
    assert state.breakdown.total == pytest.approx(state.energy, rel=1e-9)
    parts = state.breakdown.as_dict()
    assert state.energy == pytest.approx(sum(parts.values()), rel=1e-9)


def test_gradient_matches_finite_differences(table_scene):
    solver = StaticsSolver(table_scene)
    cmd = grip_command(table_scene.hand.spec)
    state = solver.solve(cmd)
    solver.update_anchors(state)
    solver.arm_command = np.array([5.0, -6.0, 0.0, 0.04])
    state2 = solver.solve(cmd, warm_start=state.configuration)
    rng = np.random.default_rng(42)
    for _ in range(4):
        x = solver.pack(state2.configuration) + rng.normal(0, 0.03, solver.n)
        x = np.clip(x, solver.lower, solver.upper)
        e, g = solver.energy(x, cmd, grad=True)
        fd = np.zeros_like(g)
        h = 1e-6
        for i in range(solver.n):
            xp = x.copy(); xp[i] += h
            xm = x.copy(); xm[i] -= h
            fd[i] = (solver.energy(xp, cmd) - solver.energy(xm, cmd)) / (2 * h)
        err = np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g))
        assert err < 1e-5


def test_no_objects_equals_rest_pose():
    scene = build_scene(table_scene_descriptor(objects=[], fixtures=[]))
    solver = StaticsSolver(scene)
    cmd = grip_command(scene.hand.spec, mcp=8.0, pip=6.0)
    rest = solver.rest_configuration(cmd)
    # cold start from a deliberately wrong warm start
    warm = rest.copy()
    warm.joints.values[:] = 0.1
    state = solver.solve(cmd, warm_start=warm)
    assert state.converged
    assert np.max(np.abs(state.configuration.joints.values - rest.joints.values)) < 1e-8
    assert np.max(np.abs(state.configuration.wrist_deflection)) < 1e-8


def test_no_contact_tensions_equal_spring_stretch_times_stiffness():
    scene = build_scene(table_scene_descriptor(objects=[], fixtures=[]))
    solver = StaticsSolver(scene)
    spec = scene.hand.spec
    cmd = ActuatorCommand.from_dict(spec, {"ring_mcp": 6.0, "ring_pipdip": 5.0})
    state = solver.solve(cmd)
    x = solver.pack(state.configuration)
    di = 3  # ring
    r = spec.digits["ring"].mcp_moment_arm
    expected = spec.mcp_stiffness() * (6.0 - r * x[3 * di])
    assert state.tendon_tensions["ring_mcp"] == pytest.approx(expected, abs=1e-12)
    # unloaded MCP consumes the whole displacement: stretch ~ 0
    assert state.tendon_tensions["ring_mcp"] == pytest.approx(0.0, abs=1e-6)
    assert state.tendon_tensions["ring_pipdip"] > 0.1  # balances the return springs


def test_grid_oracle_single_finger_on_plane():
    # one finger pressing a rigid plane: exhaustive 30^3 grid over
    # (mcp, coupled pip, wrist y) through the solved point must not find a
    #configuration lower than the minimizer beyond the grid-resolution bound
    desc = {
        "schema_version": 1, "plane": "side",
        "hand": {"mount": [0, 70, 0, 0, 0, 0]},
        "fixtures": [{"kind": "plate", "origin": [0, 0], "angle": 0.0,
                      "digits": ["index"]}],
        "objects": [],
    }
    scene = build_scene(desc)
    solver = StaticsSolver(scene)
    cmd = ActuatorCommand.from_dict(scene.hand.spec, {"index_mcp": 12.0, "index_pipdip": 8.0})
    wrist = WristModel.preset("replay")
    state = solver.solve(cmd, wrist=wrist)
    assert state.converged
    x_star = solver.pack(state.configuration)
    e_star = state.energy

    i_mcp, i_pip, i_wy = 3, 5, 16
    lo = [max(solver.lower[i_mcp], x_star[i_mcp] - 0.5),
          max(solver.lower[i_pip], x_star[i_pip] - 0.5),
          max(solver.lower[i_wy], x_star[i_wy] - 10.0)]
    hi = [min(solver.upper[i_mcp], x_star[i_mcp] + 0.5),
          min(solver.upper[i_pip], x_star[i_pip] + 0.5),
          min(solver.upper[i_wy], x_star[i_wy] + 10.0)]
    n = 30
    grids = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    best = np.inf
    x = x_star.copy()
    for a in grids[0]:
        for b in grids[1]:
            for c in grids[2]:
                x[i_mcp], x[i_pip], x[i_wy] = a, b, c
                e = solver.energy(x, cmd)
                if e < best:
                    best = e
    # grid-resolution bound: max curvature * (half cell diagonal)^2
    cell = np.array([(b - a) / (n - 1) for a, b in zip(lo, hi)])
    bound = 0.5 * 5000.0 * float(np.sum((cell / 2) ** 2))
    assert e_star <= best + bound


def test_energy_monotone_over_accepted_iterations(table_scene):
    solver = StaticsSolver(table_scene)
    cmd = grip_command(table_scene.hand.spec)
    energies = []
    solver.solve(cmd, track_energies=energies)
    diffs = np.diff(np.asarray(energies))
    assert np.all(diffs <= 1e-9)


def test_nan_energy_names_term(table_scene):
    solver = StaticsSolver(table_scene)
    cmd = grip_command(table_scene.hand.spec)
    cfg = solver.rest_configuration(cmd)
    cfg.wrist_deflection[0] = np.nan
    with pytest.raises(SolverNumericError):
        total_energy(table_scene, cmd, cfg, solver=solver)


def slide_like_trajectory(spec):
    base = np.zeros(12)
    ids = spec.actuator_ids

    def mk(mcp, pip):
        d = base.copy()
        d[ids.index("index_mcp")] = mcp
        d[ids.index("index_pipdip")] = pip
        return HandWaypoint(tuple(d), 0.5)

    return Trajectory("slide", [Segment("hand", [mk(10, 2), mk(14, 2), mk(14, 10), mk(10, 10)])])


def test_constant_trajectory_fixed_point():
    # a constant trajectory at the replay start posture is a fixed point
    scene = build_scene(table_scene_descriptor(hand={"mount": [0, 250, 0, 0, 0, 0]}))
    w = HandWaypoint(tuple(np.zeros(12)), 0.5)
    traj = Trajectory("hold", [Segment("hand", [w, w, w])])
    run = run_trajectory(scene, traj, dt=0.1)
    first = run.steps[0].state.configuration
    assert len(run.steps) >= 6
    for st in run.steps[1:]:
        assert np.array_equal(st.state.configuration.joints.values, first.joints.values)
        assert np.array_equal(st.state.configuration.wrist_deflection, first.wrist_deflection)


def test_trajectory_determinism_bit_identical(tmp_path, table_scene):
    spec = table_scene.hand.spec
    traj = slide_like_trajectory(spec)
    run1 = run_trajectory(table_scene, traj, dt=0.1)
    run2 = run_trajectory(table_scene, traj, dt=0.1)
    t1 = write_trace(run1.steps, tmp_path / "a.csv")
    t2 = write_trace(run2.steps, tmp_path / "b.csv")
    assert t1.read_bytes() == t2.read_bytes()


def test_wrist_zero_deflection_when_locked(table_scene):
    solver = StaticsSolver(table_scene)
    state = solver.solve(grip_command(table_scene.hand.spec))
    assert np.all(state.configuration.wrist_deflection == 0.0)
