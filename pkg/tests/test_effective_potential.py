import numpy as np
import pytest
from numpy.testing import assert_allclose

from vptransport import (
    DegenerateOrbitError,
    DomainError,
    UnboundOrbitError,
    turning_points,
)
from vptransport.effective_potential import (
    circular_orbit_radius,
    concavity_gap,
    effective_potential,
    effective_potential_min,
    effective_potential_slope,
    turning_points_arrays,
)
from vptransport.numerics import chebyshev_interior
from vptransport.projection import admissible_grid

from oracles import kepler_turning_points


def test_point_mass_circular_orbits(point_mass):
    # psi_L has its minimum at r = L/M with value -M^2/(2L)
    for L in (0.2, 0.7, 2.0):
        assert_allclose(circular_orbit_radius(point_mass, L), L, rtol=1e-12)
        r_c, psi_min = effective_potential_min(point_mass, L)
        assert_allclose(psi_min, -0.5 / L, rtol=1e-12)
        assert abs(effective_potential_slope(point_mass, L, r_c)) < 1e-12


@pytest.mark.parametrize("E,L", [(-0.5, 0.3), (-0.2, 1.5), (-0.9, 0.1)])
def test_point_mass_turning_points_are_quadratic_roots(point_mass, E, L):
    tp = turning_points(point_mass, E, L)
    r_minus, r_plus = kepler_turning_points(1.0, E, L)
    assert_allclose(tp.r_minus, r_minus, rtol=1e-12)
    assert_allclose(tp.r_plus, r_plus, rtol=1e-12)
    assert tp.r_minus < tp.r_circular < tp.r_plus


def test_point_mass_concavity_is_an_identity(point_mass):
    # for the pure 1/r potential the concavity estimate is an equality:
    # E - psi_L(r) = L (r_plus - r)(r - r_minus) / (2 r_minus r_plus r^2)
    tp = turning_points(point_mass, -0.5, 0.5)
    r = np.linspace(tp.r_minus, tp.r_plus, 33)
    lhs, rhs = concavity_gap(point_mass, tp, r)
    assert_allclose(lhs, rhs, rtol=0, atol=1e-14)


def test_turning_points_bracket_the_orbit(state):
    E, L = admissible_grid(state, 8, 8)
    E, L = E.ravel(), L.ravel()
    r_minus, r_plus, r_c, psi_min = turning_points_arrays(state, E, L)
    assert np.all(r_minus < r_c) and np.all(r_c < r_plus)
    assert np.all(psi_min < E)
    assert np.all(r_plus < -state.M0 / E)
    res_minus = np.abs(effective_potential(state, L, r_minus) - E)
    res_plus = np.abs(effective_potential(state, L, r_plus) - E)
    assert np.max(res_minus / np.abs(E)) <= 1e-10
    assert np.max(res_plus / np.abs(E)) <= 1e-10


def test_concavity_estimate_on_solved_state(state):
    E, L = admissible_grid(state, 5, 5)
    for e, l in zip(E.ravel(), L.ravel()):
        tp = turning_points(state, float(e), float(l))
        r = chebyshev_interior(tp.r_minus, tp.r_plus, 50)
        lhs, rhs = concavity_gap(state, tp, r)
        assert np.min(lhs - rhs) >= -1e-10


def test_slope_matches_finite_differences(state):
    L = 0.02 * state.R**2
    r = np.linspace(0.2, 0.9, 15) * state.R
    h = 1e-7
    fd = (
        effective_potential(state, L, r + h) - effective_potential(state, L, r - h)
    ) / (2.0 * h)
    assert_allclose(effective_potential_slope(state, L, r), fd, rtol=1e-5, atol=1e-8)


def test_degenerate_and_unbound_orbits_rejected(state):
    L = 0.02 * state.R**2
    _, psi_min = effective_potential_min(state, L)
    with pytest.raises(UnboundOrbitError):
        turning_points(state, 0.0, L)
    with pytest.raises(UnboundOrbitError):
        turning_points(state, 0.3, L)
    with pytest.raises(DegenerateOrbitError):
        turning_points(state, psi_min, L)
    with pytest.raises(DegenerateOrbitError):
        turning_points(state, psi_min - 0.05, L)


def test_domain_validation(state):
    with pytest.raises(DomainError):
        effective_potential(state, 0.01, 0.0)
    with pytest.raises(DomainError):
        effective_potential(state, 0.01, -0.3)
    with pytest.raises(DomainError):
        circular_orbit_radius(state, 0.0)
    with pytest.raises(DomainError):
        turning_points_arrays(state, np.array([-0.3]), np.array([-0.01]))


def test_concavity_gap_rejects_points_outside_the_orbit(state):
    L = 0.02 * state.R**2
    _, psi_min = effective_potential_min(state, L)
    tp = turning_points(state, 0.5 * (psi_min + state.E0), L)
    with pytest.raises(DomainError):
        concavity_gap(state, tp, np.array([0.5 * tp.r_minus]))
    with pytest.raises(DomainError):
        concavity_gap(state, tp, np.array([1.5 * tp.r_plus]))
