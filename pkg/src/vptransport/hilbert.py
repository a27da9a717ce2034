"""Weighted phase-space inner products over the steady-state support.

<f, g> = 4 pi^2 iiint f g / |phi'(E)| dr dw dL, integrated over the
region E(r, w, L) < E0 inside the support.  The region is swept as a
tensor product r -> L -> w with analytic section limits

    0 < r < R,   0 < L < 2 r^2 (E0 - U(r)),   |w| < sqrt(2 (E0 - psi_L)),

each mapped by Gauss-Legendre.  The sections are smooth in the interior,
so the product rule converges fast for smooth integrands; the weight
1/|phi'| is constant for the k = 1 polytrope and integrable for k < 1,
while for k > 1 it diverges at the cutoff and a support certificate
keeping the integrand away from E0 is required of at least one factor.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .effective_potential import effective_potential
from .errors import IntegrabilityError


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre orders for the (r, L, w) sweep."""

    n_r: int = 64
    n_l: int = 40
    n_w: int = 40

    def doubled(self):
        return replace(
            self, n_r=2 * self.n_r, n_l=2 * self.n_l, n_w=2 * self.n_w
        )


def region_nodes(state, spec=QuadratureSpec(), l_window=None):
    """Flattened nodes and weights covering {E < E0} once (w of both signs).

    Returns (r, w, L, wt) 1D arrays; wt includes the 4 pi^2 coordinate
    factor, so sum(wt * F(r, w, L)) approximates the phase-space integral
    of F without any weight function.  An optional l_window restricts the
    angular-momentum rule to a band; radii whose admissible range misses
    the band get zero-weight placeholder nodes.  Integrands supported
    inside the band with a positive cutoff margin lose nothing.
    """
    from .numerics import gauss_nodes

    R = state.support_radius
    r, wr = gauss_nodes(spec.n_r, 0.0, R)

    depth = state.E0 - state.potential(r)
    depth = np.maximum(depth, 0.0)
    l_max = 2.0 * r**2 * depth
    if l_window is None:
        l_lo, l_hi = np.zeros_like(l_max), l_max
    else:
        l_lo = np.minimum(l_window[0], 0.999 * l_max)
        l_hi = np.minimum(l_window[1], 0.999 * l_max)
    L, wl = gauss_nodes(spec.n_l, l_lo, l_hi)  # shape (n_r, n_l)

    r2 = r[:, None]
    gap = state.E0 - effective_potential(state, L, np.broadcast_to(r2, L.shape))
    w_max = np.sqrt(2.0 * np.maximum(gap, 0.0))
    w, ww = gauss_nodes(spec.n_w, -w_max, w_max)  # shape (n_r, n_l, n_w)

    wt = 4.0 * math.pi**2 * wr[:, None, None] * wl[:, :, None] * ww
    r_full = np.broadcast_to(r[:, None, None], w.shape)
    L_full = np.broadcast_to(L[:, :, None], w.shape)
    return r_full.ravel(), w.ravel(), L_full.ravel(), wt.ravel()


def support_box_nodes(state, box, l_window=None, n=24):
    """Tensor rule over a bump's support box instead of the whole region.

    Integrands that vanish smoothly at every box face are resolved
    spectrally here even when their windows are narrow relative to the
    section bounds, which the region sweep cannot see.  n is the order
    per axis, an int or an (n_r, n_w, n_l) triple.  Returns (r, w, L,
    wt, E, weight) with wt carrying the 4 pi^2 factor.
    """
    from .numerics import gauss_nodes

    (r_lo, r_hi), (w_lo, w_hi), (bl_lo, bl_hi) = box
    if l_window is None:
        l_window = (bl_lo, bl_hi)
    try:
        n_r, n_w, n_l = n
    except TypeError:
        n_r = n_w = n_l = n
    r, wr = gauss_nodes(n_r, r_lo, r_hi)
    w, ww = gauss_nodes(n_w, w_lo, w_hi)
    L, wl = gauss_nodes(n_l, l_window[0], l_window[1])
    rg, wg, lg = np.meshgrid(r, w, L, indexing="ij")
    rg, wg, lg = rg.ravel(), wg.ravel(), lg.ravel()
    wt = (wr[:, None, None] * ww[None, :, None] * wl[None, None, :]).ravel()
    E = 0.5 * wg**2 + lg / (2.0 * rg**2) + state.potential(rg)
    # rounding can push boundary-adjacent nodes a few ulp past the cutoff
    E = np.minimum(E, state.E0 - 1e-14 * abs(state.E0))
    return rg, wg, lg, 4.0 * math.pi**2 * wt, E, state.ansatz.weight(E)


def support_box_norm(state, f, n=24):
    """Weighted norm of a bump, resolved on its own support box."""
    rg, wg, lg, wt, _, weight = support_box_nodes(state, f.box, n=n)
    return math.sqrt(max(float(np.sum(wt * f(rg, wg, lg) ** 2 * weight)), 0.0))


def _needs_certificate(state, f, g):
    k = state.ansatz.k
    if k <= 1.0:
        return
    fs = getattr(f, "support", None)
    gs = getattr(g, "support", None)
    if fs is None and gs is None:
        raise IntegrabilityError(
            "the cutoff weight is non-integrable for exponent k > 1; "
            "at least one factor must certify an energy margin"
        )


def inner_product(state, f, g, spec=QuadratureSpec(), l_window=None):
    """Weighted inner product of two phase functions.

    An l_window confines the angular-momentum rule to where the product
    lives; without it, factors concentrated in a band far below the
    section bound are badly undersampled.
    """
    _needs_certificate(state, f, g)
    r, w, L, wt = region_nodes(state, spec, l_window=l_window)
    E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    # rounding can push boundary-adjacent nodes a few ulp past the cutoff
    E_safe = np.minimum(E, state.E0 - 1e-14 * abs(state.E0))
    weight = state.ansatz.weight(E_safe)
    fv = f(r, w, L) if callable(f) else f.value(r, w, L)
    gv = g(r, w, L) if callable(g) else g.value(r, w, L)
    return float(np.sum(wt * fv * gv * weight))


def norm(state, f, spec=QuadratureSpec(), l_window=None):
    return math.sqrt(max(inner_product(state, f, f, spec=spec, l_window=l_window), 0.0))


def phase_space_integral(state, f, spec=QuadratureSpec()):
    """Unweighted integral 4 pi^2 iiint f dr dw dL over {E < E0}."""
    r, w, L, wt = region_nodes(state, spec)
    fv = f(r, w, L) if callable(f) else f.value(r, w, L)
    return float(np.sum(wt * fv))


def monte_carlo_weighted_product(
    state, f, g, n_samples=10_000_000, seed=0, chunk=1_000_000
):
    """Monte-Carlo estimate of <f, g> over an enclosing box.

    Uniform sampling of (r, w, L) in the box [0, R] x [-w_cap, w_cap] x
    [0, l_cap] with the indicator of {E < E0}; used as an independent
    cross-check of the coordinate volume element in the tensor rule.
    Returns (estimate, standard_error).
    """
    rng = np.random.default_rng(seed)
    R = state.support_radius
    depth_max = float(state.E0 - state.potential(0.0))
    w_cap = math.sqrt(2.0 * depth_max)
    l_cap = float(np.max(2.0 * np.linspace(1e-9, R, 4096) ** 2
                         * np.maximum(state.E0 - state.potential(np.linspace(1e-9, R, 4096)), 0.0)))
    box_volume = R * (2.0 * w_cap) * l_cap

    total = 0.0
    total_sq = 0.0
    n_done = 0
    while n_done < n_samples:
        m = min(chunk, n_samples - n_done)
        r = rng.uniform(0.0, R, m)
        w = rng.uniform(-w_cap, w_cap, m)
        L = rng.uniform(0.0, l_cap, m)
        E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
        inside = E < state.E0
        vals = np.zeros(m)
        if np.any(inside):
            ri, wi, Li, Ei = r[inside], w[inside], L[inside], E[inside]
            weight = state.ansatz.weight(Ei)
            fv = f(ri, wi, Li) if callable(f) else f.value(ri, wi, Li)
            gv = g(ri, wi, Li) if callable(g) else g.value(ri, wi, Li)
            vals[inside] = fv * gv * weight
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals**2))
        n_done += m

    scale = 4.0 * math.pi**2 * box_volume
    mean = total / n_samples
    var = total_sq / n_samples - mean**2
    estimate = scale * mean
    stderr = scale * math.sqrt(max(var, 0.0) / n_samples)
    return estimate, stderr
