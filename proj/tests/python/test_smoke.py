"""End-to-end smoke tests for the python bindings.

The FLATGEN_PARAMS environment variable must point at a vehicle parameter
file; the ctest wrapper sets it to the nominal one.
"""

import json
import math
import os

import pytest

import flatgen


@pytest.fixture(scope="module")
def params():
    return flatgen.load_params(os.environ["FLATGEN_PARAMS"])


@pytest.fixture(scope="module")
def reposition(params):
    recipe = flatgen.hover_to_hover_recipe(6.0, 0.0, 0.0)
    recipe.total_time = 4.0
    return flatgen.generate_maneuver(recipe, params)


def test_parameter_file_loads_and_validates(params):
    assert params.m > 0
    assert params.omega_max > params.omega_min > 0
    assert params.eta() < 0  # thrust line lifts when pitched back
    params.validate()


def test_min_snap_solve_hits_its_waypoints():
    wps = [flatgen.Waypoint.rest([0, 0, 0], 0.0),
           flatgen.Waypoint.rest([6, 0, -2], 0.5)]
    traj, cost = flatgen.solve_min_snap(wps, [2.5])
    assert cost > 0
    assert traj.total_time() == pytest.approx(2.5)

    q0 = flatgen.sample_flat(traj, 0.0)
    q1 = flatgen.sample_flat(traj, 2.5)
    assert max(abs(a - b) for a, b in zip(q0.x, [0, 0, 0])) < 1e-9
    assert max(abs(a - b) for a, b in zip(q1.x, [6, 0, -2])) < 1e-9
    assert q1.psi == pytest.approx(0.5)
    assert math.hypot(*q0.v) < 1e-9

    coeffs = traj.segments[0].coeffs
    assert coeffs.shape == (4, 10)


def test_generated_reposition_is_feasible(params, reposition):
    assert reposition.report.feasible
    assert reposition.trajectory.total_time() == pytest.approx(4.0)
    report = flatgen.check_trajectory(reposition.trajectory, params)
    assert report.feasible
    assert report.first_violation is None
    assert report.max_speed > 1.0
    assert report.max_load_g >= 1.0


def test_flat_transform_keeps_inputs_inside_the_envelope(params, reposition):
    branch = flatgen.BranchState()
    t = 0.0
    while t <= 4.0:
        q = flatgen.sample_flat(reposition.trajectory, t)
        fs = flatgen.flat_to_full(q, params, branch)
        for w in (fs.input.omega1, fs.input.omega2):
            assert params.omega_min <= w <= params.omega_max
        assert abs(fs.input.delta1) <= params.delta_max
        assert not fs.negative_thrust
        t += 0.1


def test_trajectory_json_round_trip(reposition):
    text = flatgen.trajectory_to_json(reposition.trajectory)
    back = flatgen.trajectory_from_json(text)
    assert back.total_time() == reposition.trajectory.total_time()
    assert flatgen.trajectory_to_json(back) == text

    csv = flatgen.trajectory_to_csv(reposition.trajectory, 0.5)
    assert csv.splitlines()[0].startswith("t,x,y,z,psi,")

    report = json.loads(flatgen.feasibility_to_json(reposition.report))
    assert report["feasible"] is True


def test_circle_checks_and_knife_edge_bound(params):
    hover = flatgen.circle_check(3.0, 0.0, flatgen.CircleMode.coordinated,
                                 params, 0.05)
    assert hover.feasible
    assert hover.max_load_g == pytest.approx(1.0)
    assert flatgen.knife_edge_speed_bound(3.0, params) == pytest.approx(9.5)


def test_open_loop_playback_tracks_the_reference(params, reposition):
    opt = flatgen.SimOptions()
    opt.step = 2e-3
    rt = flatgen.windowed_round_trip(reposition.trajectory, params, 0.5, opt)
    assert rt.max_pos_err < 1e-2
    assert len(rt.windows) == 8

    trace = flatgen.integrate_open_loop(reposition.trajectory, params, opt)
    metrics = flatgen.tracking_metrics(trace, reposition.trajectory, params)
    assert metrics.duration == pytest.approx(4.0)
    assert metrics.rms_pos_err <= metrics.max_pos_err


def test_recipe_json_round_trip():
    recipe = flatgen.make_builtin("loop")
    text = flatgen.recipe_to_json(recipe)
    back = flatgen.recipe_from_json(text)
    assert back.name == recipe.name
    assert len(back.waypoints) == len(recipe.waypoints)
    assert back.mu_psi == pytest.approx(recipe.mu_psi)
