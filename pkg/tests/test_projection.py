import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vptransport import (
    admissible_grid,
    band_bump,
    certified_bump,
    el_bump,
    orbit_average_spatial,
    orbit_average_time,
    orbit_average_values,
    period_table,
    project_on_grid,
    projected_pairing,
    radial_period,
    radial_period_bound,
    support_box_norm,
)
from vptransport.hilbert import monte_carlo_weighted_product
from vptransport.projection import critical_angular_momentum, minimum_energy

from oracles import kepler_period


@pytest.mark.parametrize("L", [0.2, 0.5, 0.9])
def test_quadrature_period_matches_kepler(point_mass, L):
    T = radial_period(point_mass, -0.5, L)
    assert_allclose(T, kepler_period(1.0, -0.5), rtol=1e-10)
    assert T <= radial_period_bound(point_mass, -0.5, L)


def test_quadrature_period_independent_of_angular_momentum(point_mass):
    Ts = np.atleast_1d(
        radial_period(point_mass, -0.3, np.array([0.1, 0.8, 1.5]))
    )
    assert (np.max(Ts) - np.min(Ts)) / np.min(Ts) <= 1e-10


def test_period_bound_holds_across_the_grid(state):
    E, L = admissible_grid(state, 10, 10)
    T = radial_period(state, E, L)
    bound = radial_period_bound(state, E, L)
    assert np.all(T < bound)


def test_period_quadrature_agrees_with_orbit_integration(state):
    E, L = admissible_grid(state, 3, 3)
    records = period_table(state, E, L, steps_per_period=2000)
    assert len(records) == 9
    for rec in records:
        assert abs(rec.T_quadrature - rec.T_orbit) / rec.T_quadrature <= 1e-6
        assert rec.bound_ok
        assert rec.T_quadrature <= rec.T_bound
        assert_allclose(rec.T_bound, radial_period_bound(state, rec.E, rec.L),
                        rtol=1e-14)


def test_period_table_is_thread_order_independent(state):
    E, L = admissible_grid(state, 2, 3)
    serial = period_table(state, E, L, steps_per_period=600)
    pooled = period_table(state, E, L, steps_per_period=600, threads=3)
    for a, b in zip(serial, pooled):
        assert a == b


def test_orbit_average_of_constant_is_exact(state):
    E, L = admissible_grid(state, 6, 6)
    ones = orbit_average_values(state, lambda r, w, L: np.ones_like(r), E, L)
    assert np.all(ones == 1.0)


def test_orbit_average_kills_odd_velocity_functions(state):
    # both w branches enter with equal quadrature weights, so odd parts
    # cancel in exact floating point, not merely to quadrature accuracy
    E, L = admissible_grid(state, 6, 6)
    odd = orbit_average_values(state, lambda r, w, L: w**3 + 0.2 * w, E, L)
    assert np.all(odd == 0.0)


def test_functions_of_invariants_are_fixed_points(state):
    f = el_bump(state)
    E, L = admissible_grid(state, 8, 8)
    averaged = orbit_average_values(state, f, E, L)
    # evaluate f at an arbitrary phase point of each orbit: apocenter
    from vptransport.effective_potential import turning_points_arrays

    _, r_plus, _, _ = turning_points_arrays(state, E.ravel(), L.ravel())
    direct = f(r_plus, np.zeros_like(r_plus), L.ravel())
    assert np.max(np.abs(averaged.ravel() - direct)) <= 1e-8
    assert np.max(direct) > 0.1  # the window actually meets the grid


def test_time_and_spatial_averages_agree(state):
    f = band_bump(state)
    (r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi) = f.box
    L = 0.5 * (l_lo + l_hi)
    r_mid, w_mid = 0.5 * (r_lo + r_hi), 0.5 * (w_lo + w_hi)
    E = 0.5 * w_mid**2 + L / (2.0 * r_mid**2) + float(state.potential(r_mid))
    spatial = orbit_average_spatial(state, f, E, L)
    timed = orbit_average_time(state, f, E, L)
    assert spatial > 1e-3
    assert abs(spatial - timed) <= 1e-7


def test_projected_pairing_is_symmetric(state, rng):
    f = band_bump(state, rng)
    g = band_bump(state, rng)
    lhs = projected_pairing(state, f, g)
    rhs = projected_pairing(state, g, f)
    scale = support_box_norm(state, f) * support_box_norm(state, g)
    assert abs(lhs - rhs) <= 1e-6 * scale
    assert abs(lhs) > 1e-12 * scale  # windows overlap, so the pairing is live


def test_projection_table_matches_pointwise_averages(state, rng):
    f = certified_bump(state, rng)
    table = project_on_grid(state, f, n_s=48, n_l=32)
    assert table.values.shape == (48, 32)
    E = table.energies()
    assert E.shape == (48, 32)
    # table lookup at its own nodes reproduces the tabulated averages
    for i in (3, 17, 40):
        for j in (2, 15, 29):
            got = table(float(E[i, j]), float(table.l_centers[j]))
            assert_allclose(got, table.values[i, j], rtol=1e-12, atol=1e-15)


def test_projection_is_idempotent_at_sample_orbits(state, rng):
    f = certified_bump(state, rng)
    table = project_on_grid(state, f, n_s=96, n_l=64)
    g = table.as_phase_function(support=f.support)
    E, L = admissible_grid(state, 4, 4, s_range=(0.2, 0.8), l_range=(0.1, 0.6))
    again = orbit_average_values(state, g, E, L)
    direct = np.array(
        [[table(float(e), float(l)) for e, l in zip(er, lr)]
         for er, lr in zip(E, L)]
    )
    scale = support_box_norm(state, f)
    assert np.max(np.abs(again - direct)) <= 1e-6 * scale


def test_monte_carlo_agrees_with_box_quadrature(state):
    f = band_bump(state)
    box_sq = support_box_norm(state, f, n=32) ** 2
    mc, err = monte_carlo_weighted_product(state, f, f, n_samples=4_000_000, seed=5)
    assert err > 0.0
    assert err <= 0.05 * box_sq  # tight enough for the comparison to mean something
    assert abs(mc - box_sq) <= 4.0 * err


def test_admissible_grid_is_admissible(state):
    E, L = admissible_grid(state, 12, 9)
    assert E.shape == L.shape == (12, 9)
    L_crit = critical_angular_momentum(state)
    assert np.all(L < L_crit) and np.all(L > 0)
    floors = minimum_energy(state, L.ravel())
    assert np.all(E.ravel() > floors)
    assert np.all(E < state.E0)


def test_critical_angular_momentum_closes_the_band(state):
    L_crit = critical_angular_momentum(state)
    assert_allclose(minimum_energy(state, L_crit), state.E0, rtol=1e-9)
    # below the critical value a proper band remains
    assert minimum_energy(state, 0.5 * L_crit) < state.E0
    L = np.array([0.2, 0.4, 0.8]) * L_crit
    floors = minimum_energy(state, L)
    assert np.all(np.diff(floors) > 0)


def test_point_mass_critical_angular_momentum(point_mass):
    # min psi_L = -M^2/(2L) equals E0 at L = M^2 / (2 |E0|)
    L_crit = critical_angular_momentum(point_mass)
    assert_allclose(L_crit, 1.0 / (2.0 * 0.1), rtol=1e-9)
