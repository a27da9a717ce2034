"""Named quantitative claims about a solved equilibrium, with a report.

Every claim compares one measured number against one bound and the
report serializes to canonical JSON (sorted keys, stable float repr, no
wall-clock data), so identical configurations produce byte-identical
reports; timings travel in a separate mapping.
"""

import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from .config import build_state, quadrature_spec
from .version import __version__


@dataclass(frozen=True)
class ClaimResult:
    name: str
    statement: str
    measured: float
    bound: float
    passed: bool


def claim(name, statement, measured, bound):
    measured = float(measured)
    bound = float(bound)
    return ClaimResult(name, statement, measured, bound, bool(measured <= bound))


@dataclass(frozen=True)
class VerifyReport:
    mode: str
    claims: tuple
    config: dict
    version: str

    @property
    def all_passed(self):
        return all(c.passed for c in self.claims)

    def to_dict(self):
        return {
            "mode": self.mode,
            "version": self.version,
            "config": self.config,
            "all_passed": self.all_passed,
            "claims": [asdict(c) for c in self.claims],
        }


def _newtonian_checks(state, config, rng):
    from .effective_potential import (
        effective_potential,
        turning_points,
        turning_points_arrays,
    )
    from .hilbert import QuadratureSpec, region_nodes, support_box_norm
    from .numerics import chebyshev_interior
    from .orbits import (
        energy_drift_over_periods,
        flow_map_area_defect,
        radial_period_from_orbit,
    )
    from .phase_functions import (
        band_bump,
        certified_bump,
        el_bump,
        offset_bump,
        smooth_bump,
    )
    from .projection import (
        admissible_grid,
        minimum_energy,
        orbit_average_time,
        orbit_average_values,
        project_on_grid,
        projected_pairing,
        radial_period,
        radial_period_bound,
    )
    from .steady_state import poisson_residual
    from .transport import (
        apply_transport,
        energy_multiplier_commutation_defect,
        flow_unitarity_defect,
        kernel_inequality,
        mass_identity,
        multiplier_commutation_defect,
        skew_symmetry_defect,
        transport_of_energy_max,
    )

    spec = quadrature_spec(config)
    bump_a = certified_bump(state, rng, label="bump-a")
    bump_b = certified_bump(state, rng, label="bump-b")
    band = band_bump(state, rng)
    # Jittered copies of one moderate angular-momentum band: every pair
    # keeps a wide window overlap and comparable velocity scales, so the
    # support-box rules in the pairwise projection claims stay resolved.
    family = [
        band_bump(state, rng, l_window_frac=(0.32, 0.62), label=f"band-{i}")
        for i in range(5)
    ]
    # not even in w, so the skew integrand has no parity cancellation and
    # the defect measures the region rule instead of a symmetry
    skew_pair = (
        offset_bump(state, rng, label="offset-a"),
        offset_bump(state, rng, label="offset-b"),
    )
    E_grid, L_grid = admissible_grid(state, 12, 10)
    E_fine, L_fine = admissible_grid(state, 20, 20)
    cache = {}

    def _make_nodes(node_spec, l_window):
        r, w, L, wt = region_nodes(state, node_spec, l_window=l_window)
        E = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
        # rounding can push boundary-adjacent nodes a few ulp past the cutoff
        E = np.minimum(E, state.E0 - 1e-14 * abs(state.E0))
        return (r, w, L, wt, E, state.ansatz.weight(E))

    def plain_nodes():
        if "plain" not in cache:
            cache["plain"] = _make_nodes(spec, None)
        return cache["plain"]

    def window_nodes():
        if "window" not in cache:
            window = (
                min(b.box[2][0] for b in family),
                max(b.box[2][1] for b in family),
            )
            cache["window"] = _make_nodes(QuadratureSpec(32, 24, 24), window)
        return cache["window"]

    def node_norm(nodes, vals):
        _, _, _, wt, _, weight = nodes
        return math.sqrt(max(float(np.sum(wt * vals**2 * weight)), 0.0))

    def project_at_nodes(nodes, f, n_nodes=64, chunk=16384):
        _, _, L, wt, E, _ = nodes
        out = np.zeros_like(E)
        live = np.flatnonzero(wt != 0.0)
        for lo in range(0, live.size, chunk):
            idx = live[lo : lo + chunk]
            out[idx] = orbit_average_values(
                state, f, E[idx], L[idx], n_nodes=n_nodes
            )
        return out

    def projections():
        if "proj" not in cache:
            nodes = window_nodes()
            r, w, L = nodes[0], nodes[1], nodes[2]
            vals = [b(r, w, L) for b in family]
            avgs = [project_at_nodes(nodes, b) for b in family]
            cache["proj"] = (vals, avgs)
        return cache["proj"]

    def check_field_residual():
        return claim(
            "field-residual",
            "the sampled potential solves the field equation to stencil accuracy",
            poisson_residual(state),
            1e-6,
        )

    def check_mass_consistency():
        integral = 4.0 * math.pi * simpson(
            state.r_grid**2 * state.rho_grid, x=state.r_grid
        )
        return claim(
            "mass-consistency",
            "the enclosed mass at the surface equals the integrated density",
            abs(integral - state.M0) / state.M0,
            1e-8,
        )

    def check_potential_monotonic():
        return claim(
            "potential-monotonic",
            "the potential increases strictly from the center to the surface",
            float(-np.min(np.diff(state.u_grid))),
            0.0,
        )

    def check_potential_floor():
        violation = np.max(
            -(state.u_grid[1:] + state.M0 / state.r_grid[1:])
        )
        return claim(
            "potential-floor",
            "the potential never drops below the equivalent point-mass one",
            max(violation, 0.0),
            0.0,
        )

    def check_exterior_match():
        r_out = np.linspace(state.R, 3.0 * state.R, 64)
        defect = np.max(np.abs(state.potential(r_out) + state.M0 / r_out))
        return claim(
            "exterior-match",
            "outside the support the potential is the point-mass one",
            defect / abs(state.E0),
            1e-10,
        )

    def check_turning_points():
        E, L = E_fine.ravel(), L_fine.ravel()
        r_minus, r_plus, _, _ = turning_points_arrays(state, E, L)
        res = np.maximum(
            np.abs(effective_potential(state, L, r_minus) - E),
            np.abs(effective_potential(state, L, r_plus) - E),
        )
        return claim(
            "turning-point-residual",
            "the effective potential equals the energy at both turning points",
            float(np.max(res / np.abs(E))),
            1e-10,
        )

    def check_apocenter_bound():
        E, L = E_fine.ravel(), L_fine.ravel()
        _, r_plus, _, _ = turning_points_arrays(state, E, L)
        return claim(
            "apocenter-bound",
            "every apocenter stays strictly inside the point-mass ceiling",
            float(np.max(r_plus + state.M0 / E)),
            0.0,
        )

    def check_concavity():
        E, L = E_fine.ravel(), L_fine.ravel()
        r_minus, r_plus, _, _ = turning_points_arrays(state, E, L)
        r = chebyshev_interior(r_minus, r_plus, 50)
        lhs = E[:, None] - effective_potential(state, L[:, None], r)
        rhs = (
            L[:, None]
            * (r_plus[:, None] - r)
            * (r - r_minus[:, None])
            / (2.0 * r**2 * r_minus[:, None] * r_plus[:, None])
        )
        return claim(
            "concavity-estimate",
            "the oscillation gap dominates its two-sided concavity minorant",
            float(np.max(rhs - lhs)),
            1e-10,
        )

    def check_period_bound():
        T = radial_period(state, E_grid, L_grid)
        cap = radial_period_bound(state, E_grid, L_grid)
        return claim(
            "period-bound",
            "radial periods stay below the closed-form majorant",
            float(np.max(T / cap)),
            1.0,
        )

    def check_period_consistency():
        worst = 0.0
        for i in range(0, 12, 3):
            j = min(i // 2, 9)
            E, L = float(E_grid[i, j]), float(L_grid[i, j])
            T_quad = radial_period(state, E, L)
            T_orbit = radial_period_from_orbit(
                state, E, L, steps_per_period=config.steps_per_period
            )
            worst = max(worst, abs(T_quad - T_orbit) / T_quad)
        return claim(
            "period-consistency",
            "quadrature and time-integration periods agree",
            worst,
            1e-6,
        )

    def check_projection_constant():
        vals = orbit_average_values(state, lambda r, w, L: np.ones_like(r), E_grid, L_grid)
        return claim(
            "projection-of-constant",
            "the orbit average maps the constant one to exactly one",
            float(np.max(np.abs(vals - 1.0))),
            0.0,
        )

    def check_projection_fixes_el():
        h = el_bump(state)
        vals = orbit_average_values(state, h, E_grid, L_grid)
        # at the outer turning point w = 0 and the energy is E exactly,
        # so h evaluated there is the expected fixed-point value
        _, r_plus, _, _ = turning_points_arrays(
            state, E_grid.ravel(), L_grid.ravel()
        )
        expected = h(r_plus, np.zeros_like(r_plus), L_grid.ravel())
        return claim(
            "projection-fixes-invariants",
            "functions of energy and angular momentum are fixed points of the average",
            float(np.max(np.abs(vals.ravel() - expected))),
            1e-8,
        )

    def check_projection_kills_odd():
        h = el_bump(state)

        def odd(r, w, L):
            return h(r, w, L) * w

        vals = orbit_average_values(state, odd, E_grid, L_grid)
        return claim(
            "projection-kills-odd",
            "functions odd in the radial velocity average to exactly zero",
            float(np.max(np.abs(vals))),
            0.0,
        )

    def check_projection_idempotent():
        vals, avgs = projections()
        nodes = window_nodes()
        r, w, L = nodes[0], nodes[1], nodes[2]
        worst = 0.0
        for b, fv in zip(family, vals):
            table = project_on_grid(
                state, b, n_s=config.table_n_s, n_l=config.table_n_l
            )
            g = table.as_phase_function()
            g_nodes = g(r, w, L)
            pg = project_at_nodes(nodes, g, n_nodes=48)
            worst = max(worst, node_norm(nodes, pg - g_nodes) / node_norm(nodes, fv))
        return claim(
            "projection-idempotent",
            "averaging an already averaged function changes nothing",
            worst,
            1e-6,
        )

    def check_projection_self_adjoint():
        norms = [support_box_norm(state, b) for b in family]
        worst = 0.0
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                lhs = projected_pairing(state, family[i], family[j])
                rhs = projected_pairing(state, family[j], family[i])
                worst = max(worst, abs(lhs - rhs) / (norms[i] * norms[j]))
        return claim(
            "projection-self-adjoint",
            "the orbit average is symmetric in the weighted product",
            worst,
            1e-6,
        )

    def check_projection_contraction():
        vals, avgs = projections()
        nodes = window_nodes()
        worst = -np.inf
        for fv, pv in zip(vals, avgs):
            worst = max(worst, node_norm(nodes, pv) / node_norm(nodes, fv) - 1.0)
        return claim(
            "projection-contraction",
            "the orbit average never increases the weighted norm",
            worst,
            1e-10,
        )

    def check_projection_forms():
        from .effective_potential import effective_potential as psi

        (r_lo, r_hi), (_, w_half), (l_lo, l_hi) = band.box
        l_mid = 0.5 * (l_lo + l_hi)
        rs = np.linspace(r_lo, r_hi, 512)
        psi_floor = float(np.min(psi(state, l_mid, rs)))
        worst = 0.0
        # stay under half the squared velocity half-width so the orbit
        # crosses the support with room to spare
        for frac in (0.4, 0.8):
            E = psi_floor + 0.5 * frac * w_half**2
            spatial = float(orbit_average_values(state, band, E, l_mid, n_nodes=96))
            timed = float(
                orbit_average_time(state, band, E, l_mid, n_samples=1024, substeps=64)
            )
            worst = max(
                worst,
                abs(spatial - timed) / max(abs(spatial), abs(timed), 1e-300),
            )
        return claim(
            "projection-forms-agree",
            "the spatial and time-average forms of the orbit average coincide",
            worst,
            1e-7,
        )

    def check_mass_identity():
        lhs, rhs, defect = mass_identity(state, bump_a, spec=spec)
        return claim(
            "reduced-measure-identity",
            "integrating the period-weighted average reproduces the full integral",
            defect,
            1e-4,
        )

    def check_skew_symmetry():
        return claim(
            "transport-skew-symmetry",
            "the transport operator is skew-adjoint in the weighted product",
            skew_symmetry_defect(state, bump_a, bump_b, spec=spec),
            1e-6,
        )

    def check_skew_generic():
        # parity gives nothing here, so a coarsened rule makes this fail
        return claim(
            "transport-skew-generic",
            "skew-adjointness survives without velocity parity in the pair",
            skew_symmetry_defect(state, skew_pair[0], skew_pair[1], spec=spec),
            1e-6,
        )

    def check_transport_kills_energy():
        r, w, L, _ = region_nodes(state, QuadratureSpec(16, 12, 12))
        return claim(
            "transport-kills-energy",
            "the transport of the particle energy vanishes to the last bit",
            transport_of_energy_max(state, r, w, L),
            0.0,
        )

    def check_multiplier_commutation():
        r, w, L, _ = region_nodes(state, QuadratureSpec(16, 12, 12))
        chi, _ = smooth_bump(0.0, 2.0 * float(np.max(L)))
        return claim(
            "transport-commutes-with-multipliers",
            "multiplication by functions of angular momentum commutes with transport",
            multiplier_commutation_defect(state, bump_a, chi, r, w, L),
            1e-12,
        )

    def check_energy_multiplier_commutation():
        r, w, L, _ = region_nodes(state, QuadratureSpec(16, 12, 12))
        chi, chi_p = smooth_bump(2.0 * min(float(np.min(state.u_grid)), state.E0), 0.0)
        return claim(
            "transport-commutes-with-energy-multipliers",
            "multiplication by functions of energy commutes with transport",
            energy_multiplier_commutation_defect(state, bump_a, chi, chi_p, r, w, L),
            1e-12,
        )

    def check_flow_unitarity():
        l_mid = 0.5 * (band.box[2][0] + band.box[2][1])
        psi_min = float(minimum_energy(state, l_mid))
        E_mid = psi_min + 0.6 * (state.E0 - psi_min)
        T = float(radial_period(state, E_mid, l_mid))
        # The doubled rule is needed to resolve the evolved (sheared) bump;
        # the defect is quadrature-limited, not integrator-limited.
        fine = spec.doubled()
        worst = 0.0
        for frac in (0.1, 0.37, 0.5, 0.75, 1.0):
            n_steps = max(200, int(500 * frac))
            d = flow_unitarity_defect(state, band, frac * T, spec=fine, n_steps=n_steps)
            worst = max(worst, d)
        return claim(
            "flow-preserves-norm",
            "composition with the characteristic flow preserves the weighted norm "
            "at five evolution times",
            worst,
            1e-5,
        )

    def check_flow_reversal():
        l_mid = 0.5 * (band.box[2][0] + band.box[2][1])
        psi_min = float(minimum_energy(state, l_mid))
        E_mid = psi_min + 0.6 * (state.E0 - psi_min)
        t = 0.37 * float(radial_period(state, E_mid, l_mid))
        fine = spec.doubled()
        forward = flow_unitarity_defect(state, band, t, spec=fine, n_steps=300)
        backward = flow_unitarity_defect(state, band, -t, spec=fine, n_steps=300)
        return claim(
            "flow-time-reversal",
            "evolving forward and backward in time gives equal norms",
            abs(forward - backward),
            1e-5,
        )

    def check_area_preservation():
        E, L = float(E_grid[6, 5]), float(L_grid[6, 5])
        tp = turning_points(state, E, L)
        z0 = (0.5 * (tp.r_minus + tp.r_plus), 0.3, L)
        T = float(radial_period(state, E, L))
        defect = flow_map_area_defect(state, z0, T, T / config.steps_per_period)
        return claim(
            "flow-preserves-area",
            "the discrete flow map has unit Jacobian in the radial plane",
            defect,
            1e-6,
        )

    def check_energy_drift():
        E, L = float(E_grid[6, 5]), float(L_grid[6, 5])
        drift = energy_drift_over_periods(
            state, E, L, n_periods=100, steps_per_period=config.steps_per_period
        )
        return claim(
            "orbit-energy-drift",
            "leapfrog energy error at whole-period returns stays at rounding level",
            drift,
            1e-8,
        )

    def check_kernel_inequality():
        report = kernel_inequality(
            state,
            bump_a,
            spec=spec,
            table_shape=(config.table_n_s, config.table_n_l),
        )
        return claim(
            "kernel-distance-bound",
            "distance to the projection kernel is controlled by the transport norm",
            report.distance_sq,
            report.bound + 1e-8,
        )

    def check_kernel_forward():
        h = el_bump(state)
        Th = apply_transport(state, h)
        nodes = plain_nodes()
        r, w, L, wt, _, weight = nodes
        transport_sq = float(np.sum(wt * Th(r, w, L) ** 2 * weight))
        ph = project_at_nodes(nodes, h)
        distance_sq = float(np.sum(wt * (h(r, w, L) - ph) ** 2 * weight))
        return claim(
            "kernel-forward-inclusion",
            "functions of the invariants lie in the kernel of the transport "
            "operator and are fixed by the average",
            max(distance_sq, transport_sq),
            1e-8,
        )

    return [
        check_field_residual,
        check_mass_consistency,
        check_potential_monotonic,
        check_potential_floor,
        check_exterior_match,
        check_turning_points,
        check_apocenter_bound,
        check_concavity,
        check_period_bound,
        check_period_consistency,
        check_projection_constant,
        check_projection_fixes_el,
        check_projection_kills_odd,
        check_projection_idempotent,
        check_projection_self_adjoint,
        check_projection_contraction,
        check_projection_forms,
        check_mass_identity,
        check_skew_symmetry,
        check_skew_generic,
        check_transport_kills_energy,
        check_multiplier_commutation,
        check_energy_multiplier_commutation,
        check_flow_unitarity,
        check_flow_reversal,
        check_area_preservation,
        check_energy_drift,
        check_kernel_inequality,
        check_kernel_forward,
    ]


def _relativistic_bump(state, rng, label="bump"):
    """Separable bump inside the bound region of a relativistic state.

    Windows are sized from the depth at the outer radius so the whole box
    sits strictly inside {E < E0}: on the box E <= e^(mu(b)) sqrt(1 +
    w_half^2 + l_hi/a^2) and the window fractions keep the bracket at
    0.8 e^(2 q(b)).  The angular-momentum band is deliberately high, so
    supported orbits precess gently instead of plunging, which keeps the
    sheared pullback resolvable by the node rule.
    """
    from .phase_functions import bump_product

    R = state.support_radius
    a_r = (0.36 + float(rng.uniform(0.0, 0.04))) * R
    b_r = (0.64 + float(rng.uniform(0.0, 0.04))) * R
    ball_outer = float(np.expm1(2.0 * state.depth(b_r)))
    l_hi = 0.45 * a_r**2 * ball_outer
    l_lo = 0.6 * l_hi
    w_half = math.sqrt(0.35 * ball_outer)
    return bump_product((a_r, b_r), (-w_half, w_half), (l_lo, l_hi), label=label)


def _relativistic_checks(state, config, rng):
    from .relativistic import (
        field_equation_residuals,
        relativistic_flow,
        relativistic_flow_norm_defect,
        relativistic_skew_defect,
    )

    spec = quadrature_spec(config)
    bump_a = _relativistic_bump(state, rng, label="bump-a")
    bump_b = _relativistic_bump(state, rng, label="bump-b")
    residuals = field_equation_residuals(state)
    t_dyn = 2.0 * math.pi * math.sqrt(state.R**3 / state.M0)

    def check_density_equation():
        return claim(
            "field-density-equation",
            "the radial metric satisfies its field equation to stencil accuracy",
            residuals["density_equation"],
            1e-6,
        )

    def check_pressure_equation():
        return claim(
            "field-pressure-equation",
            "the time metric satisfies its field equation to stencil accuracy",
            residuals["pressure_equation"],
            1e-6,
        )

    def check_compactness():
        ratio = np.max(
            2.0 * state.m_grid[1:] / state.r_grid[1:]
        )
        return claim(
            "compactness",
            "the compactness 2m/r stays below the static-star ceiling 8/9",
            float(ratio),
            8.0 / 9.0,
        )

    def check_pressure_ratio():
        positive = state.rho_grid > 0
        ratio = np.max(state.p_grid[positive] / state.rho_grid[positive])
        return claim(
            "pressure-density-ratio",
            "the pressure never exceeds a third of the energy density",
            float(ratio),
            1.0 / 3.0,
        )

    def check_exterior_matching():
        interior = math.log(state.E0) - float(state.q_grid[-1])
        exterior = 0.5 * math.log1p(-2.0 * state.M0 / state.R)
        return claim(
            "exterior-matching",
            "the time metric matches the vacuum exterior at the surface",
            abs(interior - exterior),
            1e-8,
        )

    def check_skew_symmetry():
        return claim(
            "transport-skew-symmetry",
            "the transport operator is skew-adjoint in the weighted product",
            relativistic_skew_defect(state, bump_a, bump_b, spec=spec),
            1e-5,
        )

    def check_flow_norm():
        # short times: the node rule must resolve the sheared pullback,
        # and shear in these strongly precessing potentials grows fast
        worst = 0.0
        for frac in (0.02, 0.035, 0.05):
            worst = max(
                worst,
                relativistic_flow_norm_defect(
                    state, bump_a, frac * t_dyn, spec=spec, n_steps=150
                ),
            )
        return claim(
            "flow-preserves-norm",
            "composition with the characteristic flow preserves the weighted norm "
            "at three evolution times",
            worst,
            1e-4,
        )

    def check_energy_drift():
        r0 = 0.45 * state.R
        L0 = 0.3 * r0**2 * float(np.expm1(2.0 * state.depth(r0)))
        z0 = (r0, 0.0, L0)
        E_start = state.energy(*z0)
        r1, w1, _ = relativistic_flow(state, z0, t_dyn, t_dyn / config.steps_per_period)
        E_end = state.energy(r1, w1, L0)
        return claim(
            "orbit-energy-drift",
            "the integrated characteristic conserves the particle energy",
            abs(E_end - E_start) / E_start,
            1e-8,
        )

    return [
        check_density_equation,
        check_pressure_equation,
        check_compactness,
        check_pressure_ratio,
        check_exterior_matching,
        check_skew_symmetry,
        check_flow_norm,
        check_energy_drift,
    ]


def run_verification(config):
    """Solve the configured equilibrium and evaluate every claim.

    Returns (VerifyReport, timings); timings maps claim names to seconds
    and carries the only nondeterministic data.
    """
    rng = np.random.default_rng(config.seed)
    t0 = time.perf_counter()
    state = build_state(config)
    timings = {"solve": time.perf_counter() - t0}

    if config.mode == "newtonian":
        checks = _newtonian_checks(state, config, rng)
    else:
        checks = _relativistic_checks(state, config, rng)

    results = []
    for check in checks:
        t0 = time.perf_counter()
        result = check()
        timings[result.name] = time.perf_counter() - t0
        results.append(result)

    report = VerifyReport(
        mode=config.mode,
        claims=tuple(results),
        config=config.to_dict(),
        version=__version__,
    )
    return report, timings
