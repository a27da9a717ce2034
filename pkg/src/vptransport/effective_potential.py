"""Effective one-dimensional potential for fixed squared angular momentum.

psi_L(r) = U0(r) + L/(2 r^2).  Its slope is evaluated through the enclosed
mass, psi_L'(r) = (m0(r) - L/r) / r^2, never by differencing the potential
table.  All root finding is plain bisection on monotone functions; every
routine is vectorized over (E, L) arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOrbitError, DomainError, UnboundOrbitError
from .numerics import bisect_root


@dataclass(frozen=True)
class TurningPointData:
    """Radial oscillation interval [r_minus, r_plus] for one bound orbit."""

    E: float
    L: float
    r_minus: float
    r_plus: float
    r_circular: float
    psi_min: float


def effective_potential(state, L, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("effective potential needs r > 0")
    out = state.potential(r_arr) + np.asarray(L, dtype=float) / (2.0 * r_arr**2)
    return out if out.ndim else float(out)


def effective_potential_slope(state, L, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("effective potential slope needs r > 0")
    out = (state.mass_within(r_arr) - np.asarray(L, dtype=float) / r_arr) / r_arr**2
    return out if out.ndim else float(out)


def circular_orbit_radius(state, L):
    """Unique minimizer of psi_L: the root of m0(r) - L/r, found by bisection.

    Accepts scalars or arrays of L > 0.
    """
    L_arr = np.asarray(L, dtype=float)
    scalar = L_arr.ndim == 0
    L_arr = np.atleast_1d(L_arr)
    if np.any(L_arr <= 0):
        raise DomainError("angular momentum must be positive")

    def locator(r):
        return state.mass_within(r) - L_arr / r

    hi = 1.0000001 * np.maximum(state.support_radius, L_arr / state.M0)
    lo = np.minimum(state.support_radius, L_arr / state.M0)
    for _ in range(600):
        bad = locator(lo) >= 0
        if not np.any(bad):
            break
        lo = np.where(bad, 0.5 * lo, lo)
    else:
        raise DomainError("could not bracket the circular-orbit radius")
    out = bisect_root(locator, lo, hi)
    return float(out[0]) if scalar else out


def effective_potential_min(state, L):
    """(r_circular, psi_L(r_circular)) for scalar or array L."""
    r_c = circular_orbit_radius(state, L)
    return r_c, effective_potential(state, L, r_c)


def turning_points_arrays(state, E, L):
    """Vectorized turning points; returns (r_minus, r_plus, r_circ, psi_min)."""
    E_arr, L_arr = np.broadcast_arrays(
        np.asarray(E, dtype=float), np.asarray(L, dtype=float)
    )
    shape = E_arr.shape
    E_arr = np.atleast_1d(E_arr).ravel()
    L_arr = np.atleast_1d(L_arr).ravel()
    if np.any(L_arr <= 0):
        raise DomainError("angular momentum must be positive")
    if np.any(E_arr >= 0):
        raise UnboundOrbitError("E >= 0: orbit is not radially bound")

    r_c = circular_orbit_radius(state, L_arr)
    psi_min = effective_potential(state, L_arr, r_c)
    if np.any(E_arr <= psi_min):
        raise DegenerateOrbitError(
            "E <= min psi_L: no radial oscillation at this (E, L)"
        )

    def gap(r):
        return effective_potential(state, L_arr, r) - E_arr

    # Inner bracket: at r = L/(2 M0) the centrifugal term beats M0/r, so
    # psi_L >= 0 > E there; U0 >= -M0/r makes this state-independent.
    lo_in = L_arr / (2.0 * state.M0)
    for _ in range(200):
        bad = gap(lo_in) <= 0
        if not np.any(bad):
            break
        lo_in = np.where(bad, 0.5 * lo_in, lo_in)
    else:
        raise DomainError("failed to bracket the inner turning point")
    r_minus = bisect_root(gap, lo_in, r_c)

    # Outer bracket: r_plus < -M0/E strictly.
    hi_out = -state.M0 / E_arr
    for _ in range(200):
        bad = gap(hi_out) <= 0
        if not np.any(bad):
            break
        hi_out = np.where(bad, 1.25 * hi_out, hi_out)
    else:
        raise DomainError("failed to bracket the outer turning point")
    r_plus = bisect_root(gap, r_c, hi_out)

    return (
        r_minus.reshape(shape),
        r_plus.reshape(shape),
        r_c.reshape(shape),
        psi_min.reshape(shape),
    )


def turning_points(state, E, L):
    """Turning points of the orbit with invariants (E, L); scalar interface."""
    r_minus, r_plus, r_c, psi_min = turning_points_arrays(state, E, L)
    return TurningPointData(
        E=float(E),
        L=float(L),
        r_minus=float(r_minus),
        r_plus=float(r_plus),
        r_circular=float(r_c),
        psi_min=float(psi_min),
    )


def concavity_gap(state, tp, r):
    """(lhs, rhs) of the lower concavity estimate

        E - psi_L(r) >= L (r_plus - r)(r - r_minus) / (2 r^2 r_minus r_plus)

    on the oscillation interval; equality in the point-mass limit."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < tp.r_minus) or np.any(r_arr > tp.r_plus):
        raise DomainError("concavity estimate only holds between turning points")
    lhs = tp.E - effective_potential(state, tp.L, r_arr)
    rhs = (
        tp.L
        * (tp.r_plus - r_arr)
        * (r_arr - tp.r_minus)
        / (2.0 * r_arr**2 * tp.r_minus * tp.r_plus)
    )
    return lhs, rhs
