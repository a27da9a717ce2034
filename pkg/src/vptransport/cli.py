"""Command-line interface.

Every subcommand reads one JSON run configuration, writes its artifacts
into the output directory (CSV tables, JSON summaries, and a provenance
file echoing the configuration), and keeps byte-identical outputs for
identical inputs.  Exit codes: 0 success, 1 usage or configuration
error, 2 numerical failure, 3 verification failure.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, build_state, load_config
from .errors import ConfigError, NumericalError
from .version import __version__


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; remap to the documented 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _write_provenance(out_dir, command, config, arguments):
    _write_json(
        out_dir / "provenance.json",
        {
            "version": __version__,
            "command": command,
            "config": config.to_dict(),
            "arguments": arguments,
        },
    )


def _resolve_out(args):
    if args.out:
        return Path(args.out)
    env = os.environ.get("VPTRANSPORT_OUT")
    return Path(env) if env else Path("out")


def _resolve_threads(args, config):
    if args.threads is not None:
        value = args.threads
    else:
        env = os.environ.get("VPTRANSPORT_THREADS")
        if env is None:
            return config.threads
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError("VPTRANSPORT_THREADS must be an integer") from exc
    if value < 1:
        raise ConfigError("thread count must be at least 1")
    return value


def _require_newtonian(config, command):
    if config.mode != "newtonian":
        raise ConfigError(f"the {command} command needs mode = \"newtonian\"")


def cmd_steady_state(args, config, out_dir, threads):
    state = build_state(config)
    if config.mode == "newtonian":
        header = ("r", "potential", "enclosed_mass", "density")
        rows = zip(state.r_grid, state.u_grid, state.m_grid, state.rho_grid)
        summary = {
            "mode": config.mode,
            "support_radius": state.R,
            "total_mass": state.M0,
            "cutoff_energy": state.E0,
            "central_potential": float(state.u_grid[0]),
            "central_density": float(state.rho_grid[0]),
        }
    else:
        mu = np.log(state.E0) - state.q_grid
        lam = np.asarray(state.lam(state.r_grid))
        header = ("r", "mu", "lam", "enclosed_mass", "density", "pressure")
        rows = zip(state.r_grid, mu, lam, state.m_grid, state.rho_grid, state.p_grid)
        summary = {
            "mode": config.mode,
            "support_radius": state.R,
            "total_mass": state.M0,
            "cutoff_energy": state.E0,
            "central_depth": float(state.q_grid[0]),
            "central_density": float(state.rho_grid[0]),
            "central_pressure": float(state.p_grid[0]),
            "max_compactness": float(
                np.max(2.0 * state.m_grid[1:] / state.r_grid[1:])
            ),
        }
    _write_csv(out_dir / "profile.csv", header, ([float(v) for v in row] for row in rows))
    _write_json(out_dir / "summary.json", summary)
    return 0


def cmd_potential(args, config, out_dir, threads):
    state = build_state(config)
    R = state.support_radius
    n = args.n_samples
    r = np.linspace(args.r_max_factor * R / n, args.r_max_factor * R, n)
    if config.mode == "newtonian":
        columns = [r, state.potential(r), state.mass_within(r), state.density(r)]
        header = ["r", "potential", "enclosed_mass", "density"]
        if args.l is not None:
            from .effective_potential import effective_potential

            if not args.l > 0:
                raise ConfigError("--l must be positive")
            columns.append(effective_potential(state, args.l, r))
            header.append("effective_potential")
    else:
        if args.l is not None:
            raise ConfigError("--l applies to the newtonian mode only")
        columns = [
            r,
            np.asarray(state.mu(r)),
            np.asarray(state.lam(r)),
            state.mass_within(r),
            state.density(r),
            state.pressure(r),
        ]
        header = ["r", "mu", "lam", "enclosed_mass", "density", "pressure"]
    rows = ([float(c[i]) for c in columns] for i in range(n))
    _write_csv(out_dir / "potential.csv", header, rows)
    return 0


def cmd_orbit(args, config, out_dir, threads):
    _require_newtonian(config, "orbit")
    from .effective_potential import turning_points
    from .orbits import orbit_trajectory, radial_period_from_orbit
    from .projection import radial_period, radial_period_bound

    state = build_state(config)
    E, L = args.energy, args.l
    tp = turning_points(state, E, L)
    T_quad = float(radial_period(state, E, L))
    T_orbit = float(
        radial_period_from_orbit(state, E, L, steps_per_period=config.steps_per_period)
    )
    T_bound = float(radial_period_bound(state, E, L))

    h = T_quad / config.steps_per_period
    total = args.periods * T_quad
    times, rs, ws = orbit_trajectory(
        state, (tp.r_minus, 0.0, L), total, h, record_every=args.record_every
    )
    energies = 0.5 * ws**2 + L / (2.0 * rs**2) + state.potential(rs)
    _write_csv(
        out_dir / "orbit.csv",
        ("t", "r", "w"),
        ([float(t), float(r), float(w)] for t, r, w in zip(times, rs, ws)),
    )
    _write_json(
        out_dir / "orbit.json",
        {
            "energy": E,
            "angular_momentum": L,
            "r_minus": tp.r_minus,
            "r_plus": tp.r_plus,
            "period_quadrature": T_quad,
            "period_orbit": T_orbit,
            "period_bound": T_bound,
            "bound_ok": bool(T_quad <= T_bound),
            "max_energy_defect": float(np.max(np.abs(energies - E))),
            "samples": int(times.size),
        },
    )
    return 0


def cmd_period_table(args, config, out_dir, threads):
    _require_newtonian(config, "period-table")
    from .projection import admissible_grid, period_table

    state = build_state(config)
    E, L = admissible_grid(state, args.n_e, args.n_l)
    records = period_table(
        state,
        E,
        L,
        steps_per_period=config.steps_per_period,
        threads=threads,
    )
    _write_csv(
        out_dir / "periods.csv",
        ("E", "L", "T_quadrature", "T_orbit", "T_bound", "bound_ok"),
        (
            [r.E, r.L, r.T_quadrature, r.T_orbit, r.T_bound, r.bound_ok]
            for r in records
        ),
    )
    _write_json(
        out_dir / "periods.json",
        {
            "n_e": args.n_e,
            "n_l": args.n_l,
            "records": len(records),
            "all_bounded": all(r.bound_ok for r in records),
        },
    )
    return 0


def cmd_project(args, config, out_dir, threads):
    _require_newtonian(config, "project")
    from .phase_functions import certified_bump, energy_coordinate
    from .projection import project_on_grid

    state = build_state(config)
    if args.function == "bump":
        rng = np.random.default_rng(config.seed)
        f = certified_bump(state, rng)
    elif args.function == "energy":
        f = energy_coordinate(state)
    else:
        from .phase_functions import PhaseFunction

        f = PhaseFunction(value=lambda r, w, L: np.ones_like(r), label="one")

    table = project_on_grid(state, f, n_s=args.n_s, n_l=args.n_l)
    energies = table.energies()
    rows = []
    for i, s in enumerate(table.s_centers):
        for j, l_val in enumerate(table.l_centers):
            rows.append(
                [float(s), float(l_val), float(energies[i, j]), float(table.values[i, j])]
            )
    _write_csv(out_dir / "projection.csv", ("s", "L", "E", "value"), rows)
    _write_json(
        out_dir / "projection.json",
        {
            "function": args.function,
            "n_s": args.n_s,
            "n_l": args.n_l,
            "l_min": float(table.l_centers[0]),
            "l_max": float(table.l_centers[-1]),
        },
    )
    return 0


def cmd_verify(args, config, out_dir, threads):
    from .verify import run_verification

    report, timings = run_verification(config)
    _write_json(out_dir / "report.json", report.to_dict())
    _write_json(
        out_dir / "report_timing.json",
        {"seconds": timings, "total_seconds": sum(timings.values())},
    )
    for c in report.claims:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: measured {c.measured:.6e} vs bound {c.bound:.6e}")
    if not report.all_passed:
        return 3
    return 0


def _shared_options(parser, in_subcommand=False):
    # defined on the main parser and again on every subcommand so both
    # "vptransport --out d verify" and "vptransport verify --out d" work;
    # SUPPRESS keeps the subcommand from clobbering a pre-subcommand value
    extra = {"default": argparse.SUPPRESS} if in_subcommand else {}
    parser.add_argument("--config", help="path to a JSON run configuration", **extra)
    parser.add_argument(
        "--out", help="output directory (default: $VPTRANSPORT_OUT or ./out)", **extra
    )
    parser.add_argument(
        "--threads",
        type=int,
        help="worker threads (default: $VPTRANSPORT_THREADS or the configured value)",
        **extra,
    )
    parser.add_argument(
        "--seed", type=int, help="override the configured seed", **extra
    )


def build_parser():
    parser = _Parser(
        prog="vptransport",
        description=(
            "Isotropic self-gravitating equilibria, radial orbit geometry, "
            "and orbit-averaged transport checks."
        ),
    )
    _shared_options(parser)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("steady-state", help="solve the configured equilibrium")
    _shared_options(p, in_subcommand=True)
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("potential", help="sample the potential and profiles")
    _shared_options(p, in_subcommand=True)
    p.add_argument("--n-samples", type=int, default=512)
    p.add_argument(
        "--r-max-factor",
        type=float,
        default=2.0,
        help="sample out to this multiple of the support radius",
    )
    p.add_argument(
        "--l", type=float, help="add the effective potential at this angular momentum"
    )
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("orbit", help="integrate one radial orbit")
    _shared_options(p, in_subcommand=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--periods", type=float, default=3.0)
    p.add_argument("--record-every", type=int, default=10)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("period-table", help="tabulate radial periods on a grid")
    _shared_options(p, in_subcommand=True)
    p.add_argument("--n-e", type=int, default=8)
    p.add_argument("--n-l", type=int, default=6)
    p.set_defaults(func=cmd_period_table)

    p = sub.add_parser("project", help="tabulate an orbit-averaged function")
    _shared_options(p, in_subcommand=True)
    p.add_argument(
        "--function", choices=("bump", "energy", "one"), default="bump"
    )
    p.add_argument("--n-s", type=int, default=96)
    p.add_argument("--n-l", type=int, default=64)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("verify", help="run every verification claim")
    _shared_options(p, in_subcommand=True)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            config = config.replace(seed=args.seed)
        threads = _resolve_threads(args, config)
        out_dir = _resolve_out(args)
        out_dir.mkdir(parents=True, exist_ok=True)
        code = args.func(args, config, out_dir, threads)
        _write_provenance(
            out_dir,
            args.command,
            config,
            {
                "config_path": args.config,
                "out": str(out_dir),
                "threads": threads,
                "seed": config.seed,
            },
        )
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
