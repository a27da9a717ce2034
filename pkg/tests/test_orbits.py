import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vptransport import (
    DomainError,
    StepSizeError,
    energy_drift_over_periods,
    flow,
    flow_map_area_defect,
    flow_points,
    orbit_trajectory,
    radial_period_from_orbit,
    turning_points,
)
from vptransport.orbits import (
    epicyclic_period,
    orbit_state,
    radial_period_bound_newtonian,
)
from vptransport.projection import admissible_grid

from oracles import kepler_period


def _mid_orbit(state):
    E, L = admissible_grid(state, 5, 5)
    return float(E[2, 2]), float(L[2, 2])


@pytest.mark.parametrize("L", [0.3, 0.5, 0.7])
def test_integrated_period_matches_kepler(point_mass, L):
    T = radial_period_from_orbit(point_mass, -0.5, L, steps_per_period=2000)
    assert_allclose(T, kepler_period(1.0, -0.5), rtol=1e-8)


def test_integrated_period_independent_of_angular_momentum(point_mass):
    # closed orbits around a point mass: the radial period depends on E only
    Ts = [
        radial_period_from_orbit(point_mass, -0.4, L, steps_per_period=2000)
        for L in (0.2, 0.6, 1.0)
    ]
    assert (max(Ts) - min(Ts)) / min(Ts) <= 1e-8


def test_epicyclic_period_closed_form(point_mass):
    for L in (0.2, 0.5, 1.3):
        assert_allclose(epicyclic_period(point_mass, L), 2.0 * math.pi * L**1.5,
                        rtol=1e-10)


def test_period_bound_closed_form():
    assert_allclose(
        radial_period_bound_newtonian(2.0, -0.5, 0.25),
        2.0 * math.pi * 4.0 / (0.25 * 0.5),
        rtol=1e-14,
    )
    with pytest.raises(DomainError):
        radial_period_bound_newtonian(1.0, 0.1, 0.25)
    with pytest.raises(DomainError):
        radial_period_bound_newtonian(1.0, -0.5, 0.0)


def test_trajectory_extremes_match_turning_points(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    T = radial_period_from_orbit(state, E, L, steps_per_period=1000)
    h = epicyclic_period(state, L) / 3000.0
    _, rs, _ = orbit_trajectory(state, (tp.r_minus, 0.0, L), 2.2 * T, h)
    assert np.min(rs) >= tp.r_minus * (1.0 - 1e-7)
    assert np.max(rs) <= tp.r_plus * (1.0 + 1e-7)
    assert_allclose(np.max(rs), tp.r_plus, rtol=1e-5)


def test_flow_is_time_reversible(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    r0 = np.array([0.6 * tp.r_minus + 0.4 * tp.r_plus])
    w0 = np.array([0.7 * math.sqrt(2.0 * (E - L / (2 * r0[0] ** 2)
                                          - state.potential(r0[0])))])
    h = epicyclic_period(state, L) / 500.0
    t = 300.0 * h
    r1, w1 = flow_points(state, r0, w0, np.array([L]), t, h)
    r2, w2 = flow_points(state, r1, w1, np.array([L]), -t, h)
    assert_allclose(r2, r0, rtol=1e-12)
    assert_allclose(w2, w0, rtol=1e-12)


def test_energy_wobble_is_second_order_in_the_step(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    h = epicyclic_period(state, L) / 300.0

    def wobble(step):
        _, rs, ws = orbit_trajectory(state, (tp.r_minus, 0.0, L), 200.0 * h, step)
        energies = 0.5 * ws**2 + L / (2.0 * rs**2) + state.potential(rs)
        return np.max(np.abs(energies - E))

    ratio = wobble(h) / wobble(0.5 * h)
    assert 3.0 < ratio < 5.0


def test_energy_drift_vanishes_at_full_returns(state):
    E, L = _mid_orbit(state)
    drift = energy_drift_over_periods(state, E, L, n_periods=50, steps_per_period=1000)
    assert drift <= 1e-9


def test_flow_map_preserves_area(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    r0 = 0.5 * (tp.r_minus + tp.r_plus)
    h = epicyclic_period(state, L) / 500.0
    assert flow_map_area_defect(state, (r0, 0.1, L), 200.0 * h, h) <= 1e-6


def test_single_state_flow_round_trip(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    z0 = orbit_state(state, 0.5 * (tp.r_minus + tp.r_plus), 0.05, L)
    h = epicyclic_period(state, L) / 4000.0
    z1 = flow(state, z0, 500.0 * h, h)
    assert z1.L == z0.L
    assert abs(z1.energy - z0.energy) <= 1e-8 * abs(z0.energy)
    assert tp.r_minus * 0.99 <= z1.r <= tp.r_plus * 1.01


def test_trajectory_thinning(state):
    E, L = _mid_orbit(state)
    tp = turning_points(state, E, L)
    h = epicyclic_period(state, L) / 100.0
    times, rs, ws = orbit_trajectory(state, (tp.r_minus, 0.0, L), 100.0 * h, h,
                                     record_every=10)
    assert len(times) == len(rs) == len(ws)
    assert len(times) in (11, 12)  # initial sample plus every tenth step
    assert times[0] == 0.0
    assert_allclose(times[-1], 100.0 * h, rtol=1e-12)


def test_flow_rejects_bad_steps(point_mass):
    with pytest.raises(DomainError):
        flow_points(point_mass, np.array([1.0]), np.array([0.0]),
                    np.array([0.5]), 1.0, 0.0)
    with pytest.raises(DomainError):
        orbit_trajectory(point_mass, (1.0, 0.0, 0.5), 0.0, 0.1)
    with pytest.raises(DomainError):
        orbit_trajectory(point_mass, (1.0, 0.0, 0.5), 1.0, -0.1)
    with pytest.raises(StepSizeError):
        flow_points(point_mass, np.array([0.05]), np.array([-3.0]),
                    np.array([1e-9]), 1.0, 0.1)


def test_zero_time_flow_is_identity(point_mass):
    r, w = flow_points(point_mass, np.array([1.0]), np.array([0.2]),
                       np.array([0.5]), 0.0, 0.1)
    assert r[0] == 1.0 and w[0] == 0.2
