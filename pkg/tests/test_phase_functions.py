import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from vptransport import (
    angular_momentum_coordinate,
    band_bump,
    bump_product,
    certified_bump,
    el_bump,
    energy_coordinate,
    offset_bump,
    smooth_bump,
)
from vptransport.phase_functions import (
    difference,
    scale_by_energy_function,
    scale_by_l_function,
)
from vptransport.effective_potential import turning_points
from vptransport.projection import critical_angular_momentum, minimum_energy
from vptransport.transport import radial_acceleration


@given(lo=st.floats(-2.0, 2.0), width=st.floats(0.1, 3.0))
def test_smooth_bump_support_and_peak(lo, width):
    hi = lo + width
    b, b_prime = smooth_bump(lo, hi)
    assert b(lo) == 0.0 and b(hi) == 0.0
    assert b(lo - 1.0) == 0.0 and b(hi + 1.0) == 0.0
    assert b_prime(lo) == 0.0 and b_prime(hi + 0.5) == 0.0
    assert b(lo + 0.5 * width) == 1.0
    inside = np.linspace(lo + 0.05 * width, hi - 0.05 * width, 17)
    assert np.all(b(inside) > 0.0)
    assert np.all(b(inside) <= 1.0)


def test_smooth_bump_derivative_matches_finite_differences():
    b, b_prime = smooth_bump(0.3, 1.7)
    x = np.linspace(0.4, 1.6, 25)
    h = 1e-6
    fd = (b(x + h) - b(x - h)) / (2.0 * h)
    assert_allclose(b_prime(x), fd, rtol=2e-8, atol=1e-10)


def _fd_partials(f, r, w, L, h=1e-7):
    dr = (f(r + h, w, L) - f(r - h, w, L)) / (2.0 * h)
    dw = (f(r, w + h, L) - f(r, w - h, L)) / (2.0 * h)
    return dr, dw


def test_bump_product_partials_and_box(rng):
    f = bump_product((0.2, 0.8), (-0.5, 0.3), (0.01, 0.05))
    (r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi) = f.box
    r = rng.uniform(r_lo + 0.05, r_hi - 0.05, 40)
    w = rng.uniform(w_lo + 0.05, w_hi - 0.05, 40)
    L = rng.uniform(l_lo + 0.002, l_hi - 0.002, 40)
    dr, dw = _fd_partials(f, r, w, L)
    assert_allclose(f.d_r(r, w, L), dr, rtol=1e-6, atol=1e-9)
    assert_allclose(f.d_w(r, w, L), dw, rtol=1e-6, atol=1e-9)
    # identically zero outside the box, including the partials
    assert f(r_hi + 0.1, 0.0, 0.03) == 0.0
    assert f.d_r(r_hi + 0.1, 0.0, 0.03) == 0.0
    assert f(0.5, w_lo - 0.1, 0.03) == 0.0
    assert f(0.5, 0.0, l_hi + 0.01) == 0.0


def _assert_certificate_sound(state, f, n_samples, rng):
    """Sampled check that the declared support bounds actually hold."""
    (r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi) = f.box
    r = rng.uniform(r_lo, r_hi, n_samples)
    w = rng.uniform(w_lo, w_hi, n_samples)
    L = rng.uniform(l_lo, l_hi, n_samples)
    alive = f(r, w, L) != 0.0
    assert l_lo >= f.support.l_min - 1e-15
    E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    slack = 1e-12 * abs(state.E0)
    assert np.all(E[alive] <= state.E0 - f.support.energy_margin + slack)
    assert f.support.energy_margin > 0.0


def test_certified_bump_certificate(state, rng):
    for _ in range(3):
        _assert_certificate_sound(state, certified_bump(state, rng), 20_000, rng)


def test_narrow_certified_bump_certificate(state, rng):
    _assert_certificate_sound(state, certified_bump(state, rng, wide=False), 20_000, rng)


def test_band_bump_certificate(state, rng):
    _assert_certificate_sound(state, band_bump(state, rng), 20_000, rng)
    _assert_certificate_sound(state, band_bump(state), 20_000, rng)


def test_offset_bump_is_asymmetric_in_velocity(state, rng):
    f = offset_bump(state, rng)
    w_lo, w_hi = f.box[1]
    assert w_lo < 0.0 < w_hi
    assert abs(abs(w_lo) - w_hi) > 0.1 * w_hi
    _assert_certificate_sound(state, f, 20_000, rng)


def test_el_bump_depends_only_on_invariants(state):
    f = el_bump(state)
    assert f.box is None
    assert f.support is not None
    L = 0.3 * critical_angular_momentum(state)
    E = 0.5 * (minimum_energy(state, L) + state.E0)  # mid strip, inside the bump
    tp = turning_points(state, E, L)
    for frac in (0.25, 0.5, 0.8):
        r1 = tp.r_minus + frac * (tp.r_plus - tp.r_minus)
        r2 = tp.r_minus + (1.0 - 0.7 * frac) * (tp.r_plus - tp.r_minus)
        w1 = math.sqrt(2.0 * (E - 0.5 * L / r1**2 - state.potential(r1)))
        w2 = -math.sqrt(2.0 * (E - 0.5 * L / r2**2 - state.potential(r2)))
        v1, v2 = f(r1, w1, L), f(r2, w2, L)
        assert v1 > 0.0
        assert_allclose(v1, v2, rtol=1e-10)
    dr, dw = _fd_partials(f, np.asarray(0.5 * (tp.r_minus + tp.r_plus)), 0.1, L)
    assert_allclose(f.d_r(0.5 * (tp.r_minus + tp.r_plus), 0.1, L), dr, rtol=1e-5)
    assert_allclose(f.d_w(0.5 * (tp.r_minus + tp.r_plus), 0.1, L), dw, rtol=1e-5)


def test_energy_coordinate_partials_are_exact(state, rng):
    f = energy_coordinate(state)
    r = rng.uniform(0.1, 0.9, 50) * state.R
    L = rng.uniform(0.01, 0.3, 50) * state.R**2
    w = rng.uniform(-0.5, 0.5, 50)
    assert_allclose(f(r, w, L), 0.5 * w**2 + L / (2 * r**2) + state.potential(r))
    # bitwise: transport of E must cancel against the acceleration term
    assert np.all(f.d_r(r, w, L) == -radial_acceleration(state, r, L))
    assert np.all(f.d_w(r, w, L) == w)


def test_angular_momentum_coordinate_is_flat():
    f = angular_momentum_coordinate()
    r, w, L = np.array([0.3, 0.5]), np.array([0.1, -0.2]), np.array([0.02, 0.07])
    assert np.all(f(r, w, L) == L)
    assert np.all(f.d_r(r, w, L) == 0.0)
    assert np.all(f.d_w(r, w, L) == 0.0)
    assert f.d_r(0.3, 0.1, 0.02) == 0.0


def test_multiplier_wrappers_track_partials(state, rng):
    f = certified_bump(state, rng)
    g_l = scale_by_l_function(f, lambda L: np.sin(40.0 * L) + 2.0)
    g_e = scale_by_energy_function(
        state, f, lambda E: np.cos(E), lambda E: -np.sin(E)
    )
    (r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi) = f.box
    r = rng.uniform(r_lo + 0.02, r_hi - 0.02, 30)
    w = rng.uniform(w_lo + 0.02, w_hi - 0.02, 30)
    L = rng.uniform(l_lo, l_hi, 30)
    for g in (g_l, g_e):
        dr, dw = _fd_partials(g, r, w, L)
        assert_allclose(g.d_r(r, w, L), dr, rtol=1e-5, atol=1e-9)
        assert_allclose(g.d_w(r, w, L), dw, rtol=1e-5, atol=1e-9)
        assert g.support == f.support
        assert g.box == f.box


def test_difference_merges_support_conservatively(state, rng):
    f = certified_bump(state, rng)
    g = certified_bump(state, rng)
    d = difference(f, g)
    r, w, L = 0.5 * state.R, 0.05, 0.5 * (f.box[2][0] + f.box[2][1])
    assert_allclose(d(r, w, L), f(r, w, L) - g(r, w, L), rtol=1e-14)
    assert_allclose(d.d_w(r, w, L), f.d_w(r, w, L) - g.d_w(r, w, L), rtol=1e-13)
    assert d.support.l_min == min(f.support.l_min, g.support.l_min)
    assert d.support.energy_margin == min(
        f.support.energy_margin, g.support.energy_margin
    )
    assert d.box is None
