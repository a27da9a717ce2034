"""Smooth compactly supported test functions on phase space.

Functions are bundles (value, d_r, d_w) of closures over (r, w, L); the
angular-momentum derivative never enters the radial transport operator,
so it is not tracked.  A SupportDescriptor certifies quantitative
support bounds (L bounded away from zero, energy bounded away from the
cutoff) for the integrability guards and the kernel estimate.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SupportDescriptor:
    """Certified support bounds: L >= l_min on the support, and
    E <= E0 - energy_margin there."""

    l_min: float
    energy_margin: float


@dataclass(frozen=True)
class PhaseFunction:
    """A function of (r, w, L) with optional partials and support data.

    value, d_r, d_w are broadcasting callables.  box, when present, is
    ((r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi)) enclosing the support.
    """

    value: object
    d_r: object = None
    d_w: object = None
    support: SupportDescriptor | None = None
    label: str = ""
    box: tuple | None = None

    def __call__(self, r, w, L):
        return self.value(r, w, L)


def smooth_bump(lo, hi):
    """Standard mollifier on (lo, hi), peak-normalized to 1 at the center.

    Returns (b, b_prime); both vanish identically outside (lo, hi) and
    all derivatives vanish at the endpoints.
    """
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    def b(x):
        s = (np.asarray(x, dtype=float) - mid) / half
        inside = np.abs(s) < 1.0
        s2 = np.where(inside, s * s, 0.0)
        out = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - s2)), 0.0)
        return out if out.ndim else float(out)

    def b_prime(x):
        s = (np.asarray(x, dtype=float) - mid) / half
        inside = np.abs(s) < 1.0
        s2 = np.where(inside, s * s, 0.0)
        g = 1.0 - s2
        out = np.where(
            inside, np.exp(1.0 - 1.0 / g) * (-2.0 * s / g**2) / half, 0.0
        )
        return out if out.ndim else float(out)

    return b, b_prime


def bump_product(r_window, w_window, l_window, label="bump"):
    """Separable bump a(r) b(w) c(L) with closed-form r and w partials."""
    a, a_p = smooth_bump(*r_window)
    b, b_p = smooth_bump(*w_window)
    c, _ = smooth_bump(*l_window)

    def value(r, w, L):
        return a(r) * b(w) * c(L)

    def d_r(r, w, L):
        return a_p(r) * b(w) * c(L)

    def d_w(r, w, L):
        return a(r) * b_p(w) * c(L)

    box = (tuple(r_window), tuple(w_window), tuple(l_window))
    return PhaseFunction(value=value, d_r=d_r, d_w=d_w, label=label, box=box)


def certified_bump(state, rng, label="bump", wide=True):
    """Random separable bump whose support certificate is exact.

    The budget of available depth at the outer radius splits three ways:
    the L window consumes at most 30% (through L/(2 r^2) evaluated at the
    inner radius), the w window at most 50%, leaving a 20% energy margin
    to the cutoff.  Wide windows keep quadrature spectral; narrow ones
    stress resolution.
    """
    R, E0 = state.support_radius, state.E0

    lo_frac = rng.uniform(0.10, 0.20)
    hi_frac = rng.uniform(0.75, 0.90) if wide else lo_frac + rng.uniform(0.10, 0.25)
    a_r, b_r = lo_frac * R, hi_frac * R

    avail = E0 - state.potential(b_r)
    if avail <= 0:
        raise ValueError("outer radius beyond the support of the state")

    l_budget = 0.30 * avail
    l_hi = l_budget * 2.0 * a_r**2
    l_lo = rng.uniform(0.05, 0.25) * l_hi
    if not wide:
        l_lo = rng.uniform(0.55, 0.70) * l_hi

    w_budget = 0.50 * avail
    w_max = math.sqrt(2.0 * w_budget)
    w_half = (rng.uniform(0.80, 1.00) if wide else rng.uniform(0.25, 0.45)) * w_max

    f = bump_product((a_r, b_r), (-w_half, w_half), (l_lo, l_hi), label=label)
    # on the support: E <= U(b_r) + l_budget + w_budget = E0 - 0.2 avail
    support = SupportDescriptor(l_min=l_lo, energy_margin=0.20 * avail)
    return PhaseFunction(
        value=f.value,
        d_r=f.d_r,
        d_w=f.d_w,
        support=support,
        label=label,
        box=f.box,
    )


def offset_bump(state, rng=None, label="offset-bump"):
    """Band bump whose velocity window is shifted off w = 0.

    Without even symmetry in w, integrals of transport derivatives keep
    a residual that only quadrature resolution kills; pairs of these
    probe the region sweep where symmetric bumps would cancel by parity.
    Built on the band design so the support still fills its velocity
    sections and stays inside the sweep's resolving power.
    """
    if rng is not None:
        w_frac = (-float(rng.uniform(0.35, 0.50)), float(rng.uniform(0.85, 1.00)))
    else:
        w_frac = (-0.42, 0.92)
    return band_bump(
        state,
        rng,
        l_window_frac=(0.32, 0.62),
        w_window_frac=w_frac,
        label=label,
    )


def band_bump(
    state,
    rng=None,
    l_window_frac=(0.35, 0.65),
    w_window_frac=(-1.0, 1.0),
    label="band-bump",
):
    """Bump concentrated around the circular-orbit band of a mid-range
    angular-momentum window.

    Orbits meeting its support keep a pericenter of order l_lo / (2 M0),
    far from the center, which makes it the safe test function for
    fixed-step flow experiments.  The energy margin is rigorous: the
    sampled maximum of the effective potential over the radial window is
    inflated by the exact second-derivative bound

        |psi_L''| <= 4 pi rho(0) + 2 M0 / a^3 + 3 L / a^4,

    so the certificate survives the sampling.
    """
    from .effective_potential import circular_orbit_radius, effective_potential
    from .projection import critical_angular_momentum

    L_crit = critical_angular_momentum(state)
    jitter = float(rng.uniform(-0.03, 0.03)) if rng is not None else 0.0
    l_lo = (l_window_frac[0] + jitter) * L_crit
    l_hi = (l_window_frac[1] + jitter) * L_crit
    r_c = circular_orbit_radius(state, l_hi)

    for shrink in (1.0, 0.5, 0.25, 0.1):
        a_r = r_c * (1.0 - 0.25 * shrink)
        b_r = min(r_c * (1.0 + 0.35 * shrink), 0.98 * state.support_radius)
        rs = np.linspace(a_r, b_r, 1024)
        step = rs[1] - rs[0]
        curvature = (
            4.0 * math.pi * float(state.density(0.0))
            + 2.0 * state.M0 / a_r**3
            + 3.0 * l_hi / a_r**4
        )
        psi_cap = float(np.max(effective_potential(state, l_hi, rs)))
        psi_cap += step**2 / 8.0 * curvature
        avail = state.E0 - psi_cap
        if avail > 0:
            break
    else:
        raise ValueError("no radial window fits under the cutoff at this L")

    w_half = math.sqrt(avail)
    w_lo, w_hi = w_window_frac[0] * w_half, w_window_frac[1] * w_half
    f = bump_product((a_r, b_r), (w_lo, w_hi), (l_lo, l_hi), label=label)
    # E <= psi_cap + max(w_lo, w_hi)^2 / 2 <= E0 - avail / 2 on the support
    margin = avail - 0.5 * max(w_lo**2, w_hi**2)
    support = SupportDescriptor(l_min=l_lo, energy_margin=margin)
    return PhaseFunction(
        value=f.value,
        d_r=f.d_r,
        d_w=f.d_w,
        support=support,
        label=label,
        box=f.box,
    )


def energy_coordinate(state):
    """The particle energy itself as a phase function (unbounded support)."""

    def value(r, w, L):
        return 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)

    def d_r(r, w, L):
        # written as the exact negation of the radial acceleration so the
        # transport of E cancels to the last bit
        return (state.mass_within(r) - L / r) / r**2

    def d_w(r, w, L):
        return np.asarray(w, dtype=float) + 0.0

    return PhaseFunction(value=value, d_r=d_r, d_w=d_w, label="energy")


def angular_momentum_coordinate():
    """L as a phase function; both tracked partials vanish."""

    def value(r, w, L):
        return np.asarray(L, dtype=float) + 0.0

    def zero(r, w, L):
        z = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(w), np.shape(L)))
        return z if z.ndim else 0.0

    return PhaseFunction(value=value, d_r=zero, d_w=zero, label="ang-mom")


def el_bump(state, s_window=(0.15, 0.85), l_window_frac=(0.10, 0.80), label="el-bump"):
    """Bump depending on (E, L) only, via the normalized energy s.

    Built in the (s, L) strip so the support is automatically admissible;
    such functions are fixed by the orbit-average projection.
    """
    from scipy.interpolate import PchipInterpolator

    from .projection import critical_angular_momentum, minimum_energy

    L_crit = critical_angular_momentum(state)
    l_lo, l_hi = l_window_frac[0] * L_crit, l_window_frac[1] * L_crit
    b, b_p = smooth_bump(*s_window)
    c, _ = smooth_bump(l_lo, l_hi)
    E0 = state.E0

    # Freeze the minimum-energy curve as a smooth interpolant; the bump
    # only has to be *some* function of (E, L), and an interpolated floor
    # avoids a root solve at every evaluation point.  psi_min -> U(0) as
    # L -> 0, which anchors the first knot.
    L_samples = np.linspace(L_crit / 512.0, L_crit, 512)
    knots = np.concatenate(([0.0], L_samples))
    floors = np.concatenate(
        ([float(state.potential(0.0))], np.atleast_1d(minimum_energy(state, L_samples)))
    )
    interp = PchipInterpolator(knots, floors)

    def _s_and_depth(r, w, L):
        E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
        psi_min = interp(np.clip(L, 0.0, L_crit))
        depth = E0 - psi_min
        return (E - psi_min) / depth, depth

    def value(r, w, L):
        s, _ = _s_and_depth(r, w, L)
        return b(s) * c(L)

    def d_r(r, w, L):
        s, depth = _s_and_depth(r, w, L)
        dE_dr = (state.mass_within(r) - L / r) / r**2
        return b_p(s) * dE_dr / depth * c(L)

    def d_w(r, w, L):
        s, depth = _s_and_depth(r, w, L)
        return b_p(s) * w / depth * c(L)

    # s <= s_hi < 1 gives margin (1 - s_hi) (E0 - psi_min), smallest at l_hi
    margin = (1.0 - s_window[1]) * float(E0 - minimum_energy(state, l_hi))
    support = SupportDescriptor(l_min=l_lo, energy_margin=margin)
    return PhaseFunction(value=value, d_r=d_r, d_w=d_w, support=support, label=label)


def scale_by_l_function(f, chi, chi_label="chi"):
    """Pointwise product (chi . L) f, keeping the partials and support."""

    def value(r, w, L):
        return chi(L) * f.value(r, w, L)

    def d_r(r, w, L):
        return chi(L) * f.d_r(r, w, L)

    def d_w(r, w, L):
        return chi(L) * f.d_w(r, w, L)

    return PhaseFunction(
        value=value,
        d_r=d_r if f.d_r is not None else None,
        d_w=d_w if f.d_w is not None else None,
        support=f.support,
        label=f"{chi_label}(L)*{f.label}",
        box=f.box,
    )


def scale_by_energy_function(state, f, chi, chi_prime, chi_label="chi"):
    """Pointwise product (chi . E) f; the partials pick up chi' dE terms."""

    def energy(r, w, L):
        return 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)

    def value(r, w, L):
        return chi(energy(r, w, L)) * f.value(r, w, L)

    def d_r(r, w, L):
        E = energy(r, w, L)
        dE_dr = (state.mass_within(r) - L / r) / r**2
        return chi(E) * f.d_r(r, w, L) + chi_prime(E) * dE_dr * f.value(r, w, L)

    def d_w(r, w, L):
        E = energy(r, w, L)
        return chi(E) * f.d_w(r, w, L) + chi_prime(E) * w * f.value(r, w, L)

    return PhaseFunction(
        value=value,
        d_r=d_r if f.d_r is not None else None,
        d_w=d_w if f.d_w is not None else None,
        support=f.support,
        label=f"{chi_label}(E)*{f.label}",
        box=f.box,
    )


def difference(f, g, label=None):
    """f - g, with partials where both carry them; support data merges to
    the weaker certificate."""

    def value(r, w, L):
        return f.value(r, w, L) - g.value(r, w, L)

    d_r = d_w = None
    if f.d_r is not None and g.d_r is not None:
        def d_r(r, w, L):
            return f.d_r(r, w, L) - g.d_r(r, w, L)
    if f.d_w is not None and g.d_w is not None:
        def d_w(r, w, L):
            return f.d_w(r, w, L) - g.d_w(r, w, L)

    support = None
    if f.support is not None and g.support is not None:
        support = SupportDescriptor(
            l_min=min(f.support.l_min, g.support.l_min),
            energy_margin=min(f.support.energy_margin, g.support.energy_margin),
        )
    return PhaseFunction(
        value=value,
        d_r=d_r,
        d_w=d_w,
        support=support,
        label=label or f"{f.label}-{g.label}",
    )
