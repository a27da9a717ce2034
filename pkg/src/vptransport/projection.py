"""Radial periods and the orbit-average projection.

The period integral 2 int dr / sqrt(2E - 2 psi_L) is regularized with
r = r_minus + (r_plus - r_minus) sin^2(theta), which absorbs both
inverse-square-root endpoints; Gauss-Legendre in theta then converges
spectrally.  The same nodes evaluate the orbit average in its spatial
form, so a constant function projects to exactly 1.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .effective_potential import (
    circular_orbit_radius,
    effective_potential,
    turning_points_arrays,
)
from .errors import DomainError
from .numerics import bisect_root, gauss_nodes
from .orbits import radial_period_bound_newtonian


@dataclass(frozen=True)
class PeriodRecord:
    E: float
    L: float
    T_quadrature: float
    T_orbit: float
    T_bound: float
    bound_ok: bool


def _theta_geometry(state, E, L, n_nodes):
    """Common substitution data: nodes, weights, radii, and 2(E - psi)."""
    E_arr = np.atleast_1d(np.asarray(E, dtype=float)).ravel()
    L_arr = np.atleast_1d(np.asarray(L, dtype=float)).ravel()
    r_minus, r_plus, _, _ = turning_points_arrays(state, E_arr, L_arr)
    theta, wq = gauss_nodes(n_nodes, 0.0, 0.5 * math.pi)
    s, c = np.sin(theta), np.cos(theta)
    width = (r_plus - r_minus)[:, None]
    r = r_minus[:, None] + width * s**2
    two_gap = 2.0 * (
        E_arr[:, None] - effective_potential(state, L_arr[:, None], r)
    )
    # interior nodes keep a positive gap analytically; guard rounding only
    two_gap = np.maximum(two_gap, 1e-300)
    jac = width * 2.0 * s * c
    return E_arr, L_arr, r, two_gap, jac, wq


def radial_period(state, E, L, n_nodes=64, *, check=False):
    """Radial period T(E, L) by the regularized quadrature.

    Vectorized over arrays E, L (broadcast together).  With check=True a
    doubled-order evaluation is compared and a warning is emitted if the
    two differ by more than 1e-8 relative.
    """
    E_b, L_b = np.broadcast_arrays(
        np.asarray(E, dtype=float), np.asarray(L, dtype=float)
    )
    shape = E_b.shape
    _, _, _, two_gap, jac, wq = _theta_geometry(state, E_b, L_b, n_nodes)
    T = 2.0 * np.sum(wq * jac / np.sqrt(two_gap), axis=-1)
    if check:
        T2 = radial_period(state, E_b, L_b, n_nodes=2 * n_nodes)
        rel = np.max(np.abs(T - T2) / np.abs(T2))
        if rel > 1e-8:
            warnings.warn(
                f"period quadrature not converged: doubling changed it by {rel:.2e}",
                stacklevel=2,
            )
    T = T.reshape(shape)
    return T if T.ndim else float(T)


def radial_period_bound(state, E, L):
    """Closed-form majorant 2 pi M0^2 / (E^2 sqrt(L))."""
    return radial_period_bound_newtonian(state.M0, E, L)


def orbit_average_values(state, f, E, L, n_nodes=48):
    """Orbit average of a phase-space function at arrays of (E, L).

    Spatial form: both w-branches are sampled at the theta nodes and the
    result is normalized by the period computed on the same nodes.
    """
    E_b, L_b = np.broadcast_arrays(
        np.asarray(E, dtype=float), np.asarray(L, dtype=float)
    )
    shape = E_b.shape
    _, L_arr, r, two_gap, jac, wq = _theta_geometry(state, E_b, L_b, n_nodes)
    w_abs = np.sqrt(two_gap)
    L_full = np.broadcast_to(L_arr[:, None], r.shape)
    fvals = f(r, w_abs, L_full) + f(r, -w_abs, L_full)
    denom = np.sum(wq * jac / w_abs, axis=-1)
    numer = np.sum(wq * jac * fvals / w_abs, axis=-1)
    out = (numer / denom) / 2.0
    out = out.reshape(shape)
    return out if out.ndim else float(out)


def orbit_average_spatial(state, f, E, L, n_nodes=48):
    """Scalar orbit average in the spatial (turning-point quadrature) form."""
    return float(orbit_average_values(state, f, E, L, n_nodes=n_nodes))


def orbit_average_time(state, f, E, L, n_samples=1024, substeps=64):
    """Orbit average as a time average over one period.

    Integrates one orbit from (r_minus, 0) with a leapfrog step of
    T/(n_samples*substeps) and averages f over n_samples equispaced times;
    the trapezoid rule on a periodic function is spectrally accurate, so
    the sampling bias of the integrator dominates the error.
    """
    from .effective_potential import turning_points

    tp = turning_points(state, E, L)
    T = radial_period(state, E, L)
    n_steps = n_samples * substeps
    h = T / n_steps
    mass = state.mass_scalar
    r, w = tp.r_minus, 0.0
    a = (L / r - mass(r)) / r**2
    rs = np.empty(n_samples)
    ws = np.empty(n_samples)
    rs[0], ws[0] = r, w
    idx = 1
    for i in range(1, n_steps):
        w_half = w + 0.5 * h * a
        r = r + h * w_half
        a = (L / r - mass(r)) / r**2
        w = w_half + 0.5 * h * a
        if i % substeps == 0:
            rs[idx], ws[idx] = r, w
            idx += 1
    Ls = np.full(n_samples, L)
    return float(np.mean(f(rs, ws, Ls)))


def projected_pairing(state, f, g, n=24, n_nodes=64, chunk=16384):
    """Weighted inner product <Pf, g> resolved on g's support box.

    The angular-momentum rule runs over the window both boxes share: Pf
    falls smoothly to zero at the edge of f's window and g at its own,
    so the integrand vanishes at every face of the tensor box and the
    rule converges spectrally.  Both arguments need a support box.
    """
    from .hilbert import support_box_nodes

    window = (max(f.box[2][0], g.box[2][0]), min(f.box[2][1], g.box[2][1]))
    if window[0] >= window[1]:
        return 0.0
    rg, wg, lg, wt, E, weight = support_box_nodes(state, g.box, l_window=window, n=n)
    pf = np.empty_like(E)
    for lo in range(0, E.size, chunk):
        hi = lo + chunk
        pf[lo:hi] = orbit_average_values(state, f, E[lo:hi], lg[lo:hi], n_nodes=n_nodes)
    return float(np.sum(wt * pf * g(rg, wg, lg) * weight))


def critical_angular_momentum(state):
    """Largest L carrying bound orbits inside the cutoff region:
    the root of min psi_L = E0 (min psi_L increases with L)."""

    def gap(L):
        r_c = circular_orbit_radius(state, L)
        return effective_potential(state, L, r_c) - state.E0

    lo = np.asarray(1e-12 * state.M0**2 / abs(state.E0))
    hi = np.asarray(state.M0**2 / abs(state.E0))
    for _ in range(200):
        if gap(hi) > 0:
            break
        hi = 2.0 * hi
    else:
        raise DomainError("failed to bracket the critical angular momentum")
    for _ in range(200):
        if gap(lo) < 0:
            break
        lo = 0.5 * lo
    else:
        raise DomainError("failed to bracket the critical angular momentum")
    return float(bisect_root(gap, lo, hi))


def minimum_energy(state, L):
    """min psi_L for scalar or array L: lower edge of the admissible band."""
    r_c = circular_orbit_radius(state, L)
    return effective_potential(state, L, r_c)


def admissible_grid(state, n_e, n_l, s_range=(0.05, 0.95), l_range=(0.05, 0.90)):
    """Rectangular grid of admissible (E, L) pairs.

    L spans the given fractions of the critical angular momentum; for each
    L, E spans the fractions s_range of (min psi_L, E0).  Returns 2D arrays
    of shape (n_e, n_l).
    """
    L_crit = critical_angular_momentum(state)
    L = np.linspace(l_range[0], l_range[1], n_l) * L_crit
    psi_min = minimum_energy(state, L)
    s = np.linspace(s_range[0], s_range[1], n_e)
    E = psi_min[None, :] + s[:, None] * (state.E0 - psi_min[None, :])
    return E, np.broadcast_to(L[None, :], E.shape).copy()


class ProjectionTable:
    """Cell-centered table of an orbit-averaged function.

    The admissible strip is rectangular in (s, L) with the normalized
    energy s = (E - min psi_L) / (E0 - min psi_L) in (0, 1), so every cell
    is admissible.  Evaluation is bilinear in (s, L); queries beyond the
    outermost cell centers are clamped to them, never extrapolated.
    """

    def __init__(self, state, s_centers, l_centers, values):
        self._state = state
        self.s_centers = s_centers
        self.l_centers = l_centers
        self.values = values

    def energies(self):
        """Actual energies at the cell centers, shape (n_s, n_l)."""
        psi_min = minimum_energy(self._state, self.l_centers)
        return psi_min[None, :] + self.s_centers[:, None] * (
            self._state.E0 - psi_min[None, :]
        )

    def __call__(self, E, L):
        E_arr = np.atleast_1d(np.asarray(E, dtype=float))
        L_arr = np.atleast_1d(np.asarray(L, dtype=float))
        E_arr, L_arr = np.broadcast_arrays(E_arr, L_arr)
        shape = E_arr.shape
        E_flat = E_arr.ravel()
        L_flat = np.clip(
            L_arr.ravel(), self.l_centers[0], self.l_centers[-1]
        )
        psi_min = minimum_energy(self._state, L_flat)
        s = (E_flat - psi_min) / (self._state.E0 - psi_min)
        s = np.clip(s, self.s_centers[0], self.s_centers[-1])

        i = np.clip(np.searchsorted(self.s_centers, s) - 1, 0, len(self.s_centers) - 2)
        j = np.clip(np.searchsorted(self.l_centers, L_flat) - 1, 0, len(self.l_centers) - 2)
        ds = (s - self.s_centers[i]) / (self.s_centers[i + 1] - self.s_centers[i])
        dl = (L_flat - self.l_centers[j]) / (self.l_centers[j + 1] - self.l_centers[j])
        v = (
            self.values[i, j] * (1 - ds) * (1 - dl)
            + self.values[i + 1, j] * ds * (1 - dl)
            + self.values[i, j + 1] * (1 - ds) * dl
            + self.values[i + 1, j + 1] * ds * dl
        )
        v = v.reshape(shape)
        return v if np.ndim(E) or np.ndim(L) else float(v[0])

    def as_phase_function(self, support=None):
        """Composed evaluable (r, w, L) -> table(E(r, w, L), L)."""
        from .phase_functions import PhaseFunction

        state = self._state

        def value(r, w, L):
            E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
            return self(E, L)

        return PhaseFunction(value=value, support=support, label="projected")


def project_on_grid(
    state, f, n_s=96, n_l=64, l_range=(1e-3, 0.999), n_nodes=48
):
    """Tabulate the orbit average of f on the cell-centered (s, L) grid."""
    L_crit = critical_angular_momentum(state)
    l_lo, l_hi = l_range[0] * L_crit, l_range[1] * L_crit
    l_centers = l_lo + (np.arange(n_l) + 0.5) / n_l * (l_hi - l_lo)
    s_centers = (np.arange(n_s) + 0.5) / n_s
    psi_min = minimum_energy(state, l_centers)
    E = psi_min[None, :] + s_centers[:, None] * (state.E0 - psi_min[None, :])
    L = np.broadcast_to(l_centers[None, :], E.shape)
    values = orbit_average_values(state, f, E, L, n_nodes=n_nodes)
    return ProjectionTable(state, s_centers, l_centers, values.reshape(n_s, n_l))


def period_table(state, E, L, *, steps_per_period=2000, n_nodes=64, threads=1):
    """PeriodRecord list for flattened (E, L) arrays; the orbit route may be
    spread over a thread pool, with results assembled in input order."""
    from concurrent.futures import ThreadPoolExecutor

    from .orbits import radial_period_from_orbit

    E_flat = np.asarray(E, dtype=float).ravel()
    L_flat = np.asarray(L, dtype=float).ravel()
    T_quad = np.atleast_1d(radial_period(state, E_flat, L_flat, n_nodes=n_nodes))
    T_bound = np.atleast_1d(radial_period_bound(state, E_flat, L_flat))

    def one(idx):
        return radial_period_from_orbit(
            state, E_flat[idx], L_flat[idx], steps_per_period=steps_per_period
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            T_orbit = list(pool.map(one, range(E_flat.size)))
    else:
        T_orbit = [one(i) for i in range(E_flat.size)]

    return [
        PeriodRecord(
            E=float(E_flat[i]),
            L=float(L_flat[i]),
            T_quadrature=float(T_quad[i]),
            T_orbit=float(T_orbit[i]),
            T_bound=float(T_bound[i]),
            bound_ok=bool(T_quad[i] <= T_bound[i]),
        )
        for i in range(E_flat.size)
    ]
