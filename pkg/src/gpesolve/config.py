"""Run configuration: flat `key = value` text with dotted sections.

Lines are `section.key = value`; `#` starts a comment.  Unknown keys are
rejected so typos fail fast.  `--set key=value` overrides are applied on
the parsed mapping before typing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import classic, model, optim, precond
from .model import ModelParams, PotentialSpec
from .spectral import Grid

OPTIM_METHODS = ("pg", "pcg")
SCHEME_METHODS = classic.SCHEMES


class ConfigError(ValueError):
    """Invalid or missing configuration; carries the offending key."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def format_config(mapping: dict[str, str]) -> str:
    return "\n".join(f"{key} = {mapping[key]}" for key in sorted(mapping)) + "\n"


def apply_overrides(mapping: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(mapping)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_DEFAULTS: dict[str, str] = {
    "grid.d": "",
    "grid.L": "",
    "grid.M": "",
    "model.eta": "0",
    "model.omega": "0",
    "potential.kind": "harmonic",
    "potential.gamma": "1",
    "potential.kappa": "0",
    "potential.q": "0",
    "potential.alpha": "0",
    "potential.kappa_quartic": "0",
    "potential.lattice_argument": "nu_squared",
    "potential.harmonic_coeffs": "",
    "solver.method": "pcg",
    "solver.precond": "sym",
    "solver.shift": "adaptive",
    "solver.stop": "energy_diff",
    "solver.tol": "1e-12",
    "solver.max_iter": "10000",
    "solver.theta_default": "0.1",
    "solver.backtrack_factor": "0.5",
    "solver.max_backtracks": "30",
    "solver.full_linesearch": "false",
    "solver.dt": "0.01",
    "solver.inner_tol": "1e-10",
    "solver.inner_max_iter": "2000",
    "init.kind": "auto",
    "multigrid.levels": "",
    "output.dir": "",
    "seed": "0",
}

_REQUIRED = ("grid.d", "grid.L", "grid.M")


def _to_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}", key)


def _to_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}", key) from None


def _to_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}", key) from None


def _to_floats(value: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {value!r}", key) from None


@dataclass
class RunConfig:
    """Typed view of one run's configuration."""

    mapping: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        unknown = sorted(set(self.mapping) - set(_DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown configuration key {unknown[0]!r}", unknown[0])
        for key in _REQUIRED:
            if not self.mapping.get(key, ""):
                raise ConfigError(f"missing required configuration key {key!r}", key)
        merged = dict(_DEFAULTS)
        merged.update(self.mapping)
        self.mapping = merged
        # eager validation of the typed views
        self.grid()
        self.model_params()
        if self.method in OPTIM_METHODS:
            self.solver_config()
        elif self.method in SCHEME_METHODS:
            self.scheme()
        else:
            raise ConfigError(f"solver.method: unknown method {self.method!r}", "solver.method")
        if self.mapping["init.kind"] not in model.GUESS_KINDS + ("auto",):
            raise ConfigError(
                f"init.kind: unknown initial guess {self.mapping['init.kind']!r}", "init.kind")
        self.multigrid_schedule()

    @classmethod
    def from_text(cls, text: str, overrides: list[str] | None = None) -> "RunConfig":
        mapping = parse_config_text(text)
        if overrides:
            mapping = apply_overrides(mapping, overrides)
        return cls(mapping)

    @classmethod
    def from_file(cls, path: str, overrides: list[str] | None = None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read(), overrides)

    def to_text(self) -> str:
        return format_config({k: v for k, v in self.mapping.items() if v != ""})

    # -- typed accessors ----------------------------------------------------
    @property
    def method(self) -> str:
        return self.mapping["solver.method"]

    @property
    def seed(self) -> int:
        return _to_int(self.mapping["seed"], "seed")

    @property
    def output_dir(self) -> str:
        return self.mapping["output.dir"]

    def grid(self) -> Grid:
        try:
            return Grid(
                _to_int(self.mapping["grid.d"], "grid.d"),
                _to_float(self.mapping["grid.L"], "grid.L"),
                _to_int(self.mapping["grid.M"], "grid.M"),
            )
        except ValueError as err:
            raise ConfigError(f"grid: {err}", "grid.M") from None

    def potential(self) -> PotentialSpec:
        m = self.mapping
        coeffs = _to_floats(m["potential.harmonic_coeffs"], "potential.harmonic_coeffs")
        try:
            return PotentialSpec(
                kind=m["potential.kind"],
                gamma=_pad3(_to_floats(m["potential.gamma"], "potential.gamma"), 1.0),
                kappa=_pad3(_to_floats(m["potential.kappa"], "potential.kappa"), 0.0),
                q=_pad3(_to_floats(m["potential.q"], "potential.q"), 0.0),
                alpha=_to_float(m["potential.alpha"], "potential.alpha"),
                kappa_quartic=_to_float(m["potential.kappa_quartic"], "potential.kappa_quartic"),
                lattice_argument=m["potential.lattice_argument"],
                harmonic_coeffs=coeffs if coeffs else None,
            )
        except ValueError as err:
            raise ConfigError(f"potential: {err}", "potential.kind") from None

    def model_params(self) -> ModelParams:
        try:
            return ModelParams(
                eta=_to_float(self.mapping["model.eta"], "model.eta"),
                omega=_to_float(self.mapping["model.omega"], "model.omega"),
                potential=self.potential(),
            )
        except ValueError as err:
            raise ConfigError(f"model: {err}", "model.eta") from None

    def solver_config(self) -> optim.SolverConfig:
        m = self.mapping
        shift = m["solver.shift"]
        try:
            return optim.SolverConfig(
                method=m["solver.method"],
                precond=m["solver.precond"],
                shift="adaptive" if shift == "adaptive" else _to_float(shift, "solver.shift"),
                stop=m["solver.stop"],
                tol=_to_float(m["solver.tol"], "solver.tol"),
                max_iter=_to_int(m["solver.max_iter"], "solver.max_iter"),
                theta_default=_to_float(m["solver.theta_default"], "solver.theta_default"),
                backtrack_factor=_to_float(m["solver.backtrack_factor"], "solver.backtrack_factor"),
                max_backtracks=_to_int(m["solver.max_backtracks"], "solver.max_backtracks"),
                full_linesearch=_to_bool(m["solver.full_linesearch"], "solver.full_linesearch"),
            )
        except ValueError as err:
            raise ConfigError(f"solver: {err}", "solver.method") from None

    def scheme(self) -> classic.SchemeKind:
        m = self.mapping
        try:
            return classic.SchemeKind(
                scheme=m["solver.method"],
                dt=_to_float(m["solver.dt"], "solver.dt"),
                inner_tol=_to_float(m["solver.inner_tol"], "solver.inner_tol"),
                inner_max_iter=_to_int(m["solver.inner_max_iter"], "solver.inner_max_iter"),
            )
        except ValueError as err:
            raise ConfigError(f"solver: {err}", "solver.dt") from None

    def init_kind(self) -> str:
        kind = self.mapping["init.kind"]
        if kind == "auto":
            eta = _to_float(self.mapping["model.eta"], "model.eta")
            return "tf" if eta > 0 else "gauss"
        return kind

    def multigrid_schedule(self) -> list[tuple[int, float]]:
        """Parse `multigrid.levels` entries `M:eps` into an increasing schedule."""
        raw = self.mapping["multigrid.levels"]
        if not raw:
            return []
        schedule: list[tuple[int, float]] = []
        for item in raw.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" in item:
                m_str, eps_str = item.split(":", 1)
                eps = _to_float(eps_str, "multigrid.levels")
            else:
                m_str = item
                eps = _to_float(self.mapping["solver.tol"], "solver.tol")
            level_m = _to_int(m_str, "multigrid.levels")
            if eps <= 0 or math.isnan(eps):
                raise ConfigError("multigrid.levels: tolerances must be positive", "multigrid.levels")
            schedule.append((level_m, eps))
        for (m0, _), (m1, _) in zip(schedule, schedule[1:]):
            if m1 <= m0:
                raise ConfigError(
                    "multigrid.levels: grid sizes must be strictly increasing", "multigrid.levels")
        return schedule

    def precond_kind(self) -> str:
        kind = self.mapping["solver.precond"]
        if kind not in precond.KINDS:
            raise ConfigError(f"solver.precond: unknown kind {kind!r}", "solver.precond")
        return kind


def _pad3(values: tuple[float, ...], fill: float) -> tuple[float, ...]:
    if len(values) == 0:
        return (fill, fill, fill)
    if len(values) == 1:
        return (values[0],) * 3
    while len(values) < 3:
        values = values + (values[-1],)
    return values
