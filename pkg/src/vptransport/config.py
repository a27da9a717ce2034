"""Validated run configuration shared by the CLI and the verification suite."""

import json
from dataclasses import asdict, dataclass, fields

from .ansatz import NEWTONIAN_MAX_EXPONENT, AnsatzFunction
from .errors import ConfigError

MODES = ("newtonian", "relativistic")


@dataclass(frozen=True)
class RunConfig:
    """Model choice plus every resolution knob with a validated default.

    The cutoff sign must match the mode: negative for newtonian, in (0, 1)
    for relativistic.  In the newtonian mode the equilibrium is generated
    from y_center and the cutoff is informative only unless match_cutoff
    rescales the solution onto it.
    """

    mode: str = "newtonian"
    k: float = 1.0
    amplitude: float = 1.0
    cutoff_energy: float = -0.1
    y_center: float = 1.0
    match_cutoff: bool = False
    n_grid: int = 2001
    n_r: int = 64
    n_l: int = 40
    n_w: int = 40
    table_n_s: int = 96
    table_n_l: int = 64
    steps_per_period: int = 2000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.k > 0:
            raise ConfigError("k must be positive")
        if self.mode == "newtonian":
            if self.k >= NEWTONIAN_MAX_EXPONENT:
                raise ConfigError(
                    f"newtonian mode needs k < {NEWTONIAN_MAX_EXPONENT}"
                )
            if not self.cutoff_energy < 0:
                raise ConfigError("newtonian mode needs a negative cutoff energy")
        else:
            if not 0.0 < self.cutoff_energy < 1.0:
                raise ConfigError("relativistic mode needs a cutoff in (0, 1)")
        if not self.amplitude > 0:
            raise ConfigError("amplitude must be positive")
        if not self.y_center > 0:
            raise ConfigError("y_center must be positive")
        if self.n_grid < 16:
            raise ConfigError("n_grid must be at least 16")
        for name in ("n_r", "n_l", "n_w"):
            if getattr(self, name) < 4:
                raise ConfigError(f"{name} must be at least 4")
        for name in ("table_n_s", "table_n_l"):
            if getattr(self, name) < 4:
                raise ConfigError(f"{name} must be at least 4")
        if self.steps_per_period < 16:
            raise ConfigError("steps_per_period must be at least 16")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")

    def to_dict(self):
        return asdict(self)

    def replace(self, **kwargs):
        data = self.to_dict()
        data.update(kwargs)
        return parse_config(data)


def _type_name(annotation):
    return annotation if isinstance(annotation, str) else annotation.__name__


_FIELD_TYPES = {f.name: _type_name(f.type) for f in fields(RunConfig)}


def parse_config(data):
    """Build a RunConfig from a mapping, rejecting unknown keys and wrong
    scalar types so config typos fail loudly."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    coerced = {}
    for name, value in data.items():
        kind = _FIELD_TYPES[name]
        if kind == "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"{name} must be a boolean")
            coerced[name] = value
        elif kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer")
            coerced[name] = value
        elif kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number")
            coerced[name] = float(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{name} must be a string")
            coerced[name] = value
    return RunConfig(**coerced)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return parse_config(data)


def build_ansatz(config):
    return AnsatzFunction(
        k=config.k,
        amplitude=config.amplitude,
        cutoff_energy=config.cutoff_energy,
    )


def build_state(config):
    """Solve the equilibrium the configuration describes."""
    if config.mode == "newtonian":
        from .steady_state import solve_steady_state

        return solve_steady_state(
            build_ansatz(config),
            y_center=config.y_center,
            match_cutoff=config.match_cutoff,
            n_grid=config.n_grid,
        )
    from .relativistic import solve_relativistic_steady_state

    return solve_relativistic_steady_state(build_ansatz(config), n_grid=config.n_grid)


def quadrature_spec(config):
    from .hilbert import QuadratureSpec

    return QuadratureSpec(n_r=config.n_r, n_l=config.n_l, n_w=config.n_w)
