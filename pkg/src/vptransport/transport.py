"""The linearized transport operator and its quantitative identities.

T f = w d_r f + a(r, L) d_w f, with a = (L/r - m(r))/r^2 the net radial
acceleration.  T differentiates along the characteristic flow, so it
annihilates conserved quantities, commutes with multiplication by
functions of E or of L, and is skew-adjoint in the weighted inner
product.  Functions of (E, L) alone span its kernel on bound orbits; the
quantitative version is a Poincare-type bound for the distance to the
kernel in terms of ||T f||, with a constant built from the mass, the
cutoff, and the support certificate of f.
"""

import math
from dataclasses import dataclass

import numpy as np

from .effective_potential import circular_orbit_radius, effective_potential
from .errors import IntegrabilityError, MissingPartialsError
from .hilbert import (
    QuadratureSpec,
    inner_product,
    norm,
    phase_space_integral,
    region_nodes,
    support_box_nodes,
    support_box_norm,
)
from .numerics import gauss_nodes
from .phase_functions import PhaseFunction, difference, energy_coordinate
from .projection import (
    critical_angular_momentum,
    minimum_energy,
    orbit_average_values,
    project_on_grid,
    radial_period,
)


def radial_acceleration(state, r, L):
    """Centrifugal push minus enclosed-mass pull, (L/r - m(r))/r^2."""
    return (L / r - state.mass_within(r)) / r**2


def apply_transport(state, f):
    """T f as a new phase function; support and box carry over since the
    derivative of f vanishes wherever f vanishes identically."""
    if f.d_r is None or f.d_w is None:
        raise MissingPartialsError(
            f"transport needs both tracked partials; {f.label or 'function'!r} lacks them"
        )

    def value(r, w, L):
        a = radial_acceleration(state, r, L)
        return w * f.d_r(r, w, L) + a * f.d_w(r, w, L)

    return PhaseFunction(value=value, support=f.support, label=f"T[{f.label}]", box=f.box)


def _box_intersection(a, b):
    box = tuple(
        (max(lo_a, lo_b), min(hi_a, hi_b))
        for (lo_a, hi_a), (lo_b, hi_b) in zip(a, b)
    )
    if any(lo >= hi for lo, hi in box):
        return None
    return box


def skew_symmetry_defect(state, f, g, spec=QuadratureSpec()):
    """|<f, T g> + <T f, g>| / (||f|| ||g||); zero in exact arithmetic.

    When both arguments carry support boxes, the products are integrated
    on the intersection box and the norms on each factor's own box, at
    the orders of spec: the region sweep clusters its nodes at the
    domain ends and cannot resolve an interior bump, while the box rule
    is spectral there.  Boxless arguments fall back to the region sweep.
    """
    Tf = apply_transport(state, f)
    Tg = apply_transport(state, g)
    if f.box is not None and g.box is not None:
        n = (spec.n_r, spec.n_w, spec.n_l)
        scale = support_box_norm(state, f, n=n) * support_box_norm(state, g, n=n)
        box = _box_intersection(f.box, g.box)
        if box is None:
            return 0.0
        r, w, L, wt, _, weight = support_box_nodes(state, box, n=n)
        raw = float(
            np.sum(wt * (f(r, w, L) * Tg(r, w, L) + Tf(r, w, L) * g(r, w, L)) * weight)
        )
    else:
        raw = inner_product(state, f, Tg, spec=spec) + inner_product(
            state, Tf, g, spec=spec
        )
        scale = norm(state, f, spec=spec) * norm(state, g, spec=spec)
    return abs(raw) / scale


def transport_of_energy_max(state, r, w, L):
    """max |T E| over the given points; identically zero, and the partials
    are arranged so the cancellation is exact in floating point."""
    TE = apply_transport(state, energy_coordinate(state))
    return float(np.max(np.abs(TE(r, w, L))))


def multiplier_commutation_defect(state, f, chi, r, w, L):
    """Relative pointwise defect of T[(chi . L) f] = (chi . L) T f."""
    from .phase_functions import scale_by_l_function

    Tf = apply_transport(state, f)
    Tg = apply_transport(state, scale_by_l_function(f, chi))
    lhs = Tg(r, w, L)
    rhs = chi(np.asarray(L, dtype=float)) * Tf(r, w, L)
    scale = float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs))) / (scale if scale > 0 else 1.0)


def energy_multiplier_commutation_defect(state, f, chi, chi_prime, r, w, L):
    """Relative pointwise defect of T[(chi . E) f] = (chi . E) T f; the
    extra chi' (T E) f term vanishes with T E."""
    from .phase_functions import scale_by_energy_function

    Tf = apply_transport(state, f)
    Tg = apply_transport(state, scale_by_energy_function(state, f, chi, chi_prime))
    E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    lhs = Tg(r, w, L)
    rhs = chi(E) * Tf(r, w, L)
    scale = float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs))) / (scale if scale > 0 else 1.0)


def flow_unitarity_defect(state, f, t, spec=QuadratureSpec(), n_steps=4000):
    """Relative defect of ||f . flow_t|| = ||f||.

    The weight is evaluated at the unflowed nodes, where the energy is
    known exactly; since the leapfrog map preserves phase-space volume
    exactly, the residual is quadrature error plus (for non-constant
    weights) the integrator's bounded energy wobble.  Nodes outside the
    angular-momentum window of the support box cannot contribute (L is
    constant along the flow) and are not propagated.
    """
    from .orbits import flow_points

    r, w, L, wt = region_nodes(state, spec)
    E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    weight = state.ansatz.weight(np.minimum(E, state.E0 - 1e-14 * abs(state.E0)))

    base_sq = float(np.sum(wt * f(r, w, L) ** 2 * weight))

    if f.box is not None:
        l_lo, l_hi = f.box[2]
        mask = (L > l_lo) & (L < l_hi)
    else:
        mask = np.ones(L.shape, dtype=bool)

    h = abs(t) / n_steps
    r_t, w_t = flow_points(state, r[mask], w[mask], L[mask], t, h)
    vals = np.zeros_like(r)
    vals[mask] = f(r_t, w_t, L[mask])
    moved_sq = float(np.sum(wt * vals**2 * weight))

    base = math.sqrt(max(base_sq, 0.0))
    moved = math.sqrt(max(moved_sq, 0.0))
    return abs(moved - base) / base


@dataclass(frozen=True)
class KernelReport:
    """Both sides of the kernel bound ||f - P f||^2 <= C ||T f||^2."""

    distance_sq: float
    transport_norm_sq: float
    constant: float
    margin_parameter: float

    @property
    def bound(self):
        return self.constant * self.transport_norm_sq

    @property
    def ok(self):
        return self.distance_sq <= self.bound


def support_margin_parameter(descriptor):
    """Smallest m with L >= 1/(2m) and cutoff margin >= 1/m certified."""
    return max(1.0 / (2.0 * descriptor.l_min), 1.0 / descriptor.energy_margin)


def kernel_inequality(
    state, f, spec=QuadratureSpec(), table_shape=(192, 256), n_nodes=48
):
    """Evaluate the distance-to-kernel bound for a certified function.

    P f is tabulated on a fine (s, L) grid covering the support window
    and the distance is integrated with the tensor rule; the constant is
    16 pi^2 M0^4 m / E0^4 with m the certified margin parameter.
    """
    sup = f.support
    if sup is None:
        raise IntegrabilityError(
            "the kernel bound needs a support certificate for its constant"
        )
    m = support_margin_parameter(sup)

    L_crit = critical_angular_momentum(state)
    if f.box is not None:
        l_lo, l_hi = f.box[2]
        l_range = (
            max(0.98 * l_lo / L_crit, 1e-4),
            min(1.02 * l_hi / L_crit, 0.9995),
        )
    else:
        l_range = (1e-3, 0.9995)
    table = project_on_grid(
        state, f, n_s=table_shape[0], n_l=table_shape[1],
        l_range=l_range, n_nodes=n_nodes,
    )
    Pf = table.as_phase_function(support=sup)
    resid = difference(f, Pf, label="distance-to-kernel")
    distance_sq = inner_product(state, resid, resid, spec=spec)

    Tf = apply_transport(state, f)
    transport_norm_sq = inner_product(state, Tf, Tf, spec=spec)

    constant = 16.0 * math.pi**2 * state.M0**4 * m / state.E0**4
    return KernelReport(
        distance_sq=distance_sq,
        transport_norm_sq=transport_norm_sq,
        constant=constant,
        margin_parameter=m,
    )


def mass_identity(state, f, n_e=80, n_l=80, n_nodes=96, spec=None):
    """Both sides of the reduced-measure identity

        4 pi^2 int T(E, L) (P f)(E, L) dE dL = (phase-space integral of f).

    The left side integrates over the admissible (E, L) strip with the
    period as density of states; the right side uses the tensor rule in
    (r, w, L).  Returns (lhs, rhs, relative_defect).
    """
    L_crit = critical_angular_momentum(state)
    if f.box is not None:
        l_lo = max(f.box[2][0], 1e-6 * L_crit)
        l_hi = min(f.box[2][1], 0.999999 * L_crit)
    else:
        l_lo, l_hi = 1e-4 * L_crit, 0.999 * L_crit

    L_nodes, wl = gauss_nodes(n_l, l_lo, l_hi)
    psi_min = minimum_energy(state, L_nodes)
    if f.box is not None:
        # Orbits that never reach the radial window contribute nothing,
        # so start the energy integral at the window entry threshold.
        r_lo, r_hi = f.box[0]
        r_c = circular_orbit_radius(state, L_nodes)
        entry = effective_potential(state, L_nodes, np.clip(r_c, r_lo, r_hi))
        e_lo = np.maximum(psi_min, entry)
    else:
        e_lo = psi_min
    E_nodes, we = gauss_nodes(n_e, e_lo, state.E0)  # (n_l, n_e)
    L_full = np.broadcast_to(L_nodes[:, None], E_nodes.shape)

    T = radial_period(state, E_nodes, L_full, n_nodes=64)
    P = orbit_average_values(state, f, E_nodes, L_full, n_nodes=n_nodes)
    lhs = 4.0 * math.pi**2 * float(np.sum(wl[:, None] * we * T * P))

    if f.box is not None:
        # A box-supported function vanishes smoothly at every face, so a
        # tensor rule over the box alone converges spectrally; the generic
        # region rule cannot resolve a narrow angular-momentum window.
        rhs = _box_phase_space_integral(f, n_nodes=max(n_nodes, 48))
    else:
        rhs = phase_space_integral(state, f, spec=spec or QuadratureSpec())
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def _box_phase_space_integral(f, n_nodes=48):
    (r_lo, r_hi), (w_lo, w_hi), (l_lo, l_hi) = f.box
    r, wr = gauss_nodes(n_nodes, r_lo, r_hi)
    w, ww = gauss_nodes(n_nodes, w_lo, w_hi)
    l_vals, wl = gauss_nodes(n_nodes, l_lo, l_hi)
    rg, wg, lg = np.meshgrid(r, w, l_vals, indexing="ij")
    vals = f(rg.ravel(), wg.ravel(), lg.ravel())
    wt = (wr[:, None, None] * ww[None, :, None] * wl[None, None, :]).ravel()
    return 4.0 * math.pi**2 * float(np.sum(wt * vals))
