"""Experiment configuration stored as an INI file.

Defaults follow the full evaluation protocol (100 graphs per generator,
``n`` in ``[5, 500]``, the complete parameter grids, ranking budget 100);
:meth:`ExperimentConfig.desk_scale` gives a population small enough for a
laptop.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields, replace

from .bop import ALGORITHM, DIRECTIONS, STANDARD, VARIANTS
from .measures import ALL_MEASURES, MeasureId

THETA_GRID = (1e-6, 1e-3, 1e-2, 1e-1, 1.0, 10.0)
H_GRID = (1, 2, 3, 4, 5, 6)
POLICIES = ("reciprocal", "unit")
KINDS = ("ab", "er")

# field -> INI section
_SECTIONS = {
    "kinds": "population",
    "count": "population",
    "n_min": "population",
    "n_max": "population",
    "measures": "measures",
    "theta_grid": "measures",
    "h_grid": "measures",
    "variant": "measures",
    "direction": "measures",
    "policy": "measures",
    "correlation_measures": "measures",
    "strategy": "attack",
    "budget": "attack",
    "seed": "run",
    "out": "run",
    "jobs": "run",
    "alpha": "run",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kinds: tuple = KINDS
    count: int = 100
    n_min: int = 5
    n_max: int = 500
    measures: tuple = ALL_MEASURES
    theta_grid: tuple = THETA_GRID
    h_grid: tuple = H_GRID
    variant: str = STANDARD
    direction: str = ALGORITHM
    policy: str = "reciprocal"
    correlation_measures: tuple = ("ec", "spb", "rwb", "est", "wk:h=1", "kle", "wie", "kir", "kem", "shv", "bpcf:theta=1", "bpc:theta=1")
    strategy: str = "single"
    budget: int = 100
    seed: int = 0
    out: str = "results"
    jobs: int = 1
    alpha: float = 0.05

    def __post_init__(self):
        for name in ("kinds", "measures", "theta_grid", "h_grid", "correlation_measures"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "theta_grid", tuple(float(t) for t in self.theta_grid))
        object.__setattr__(self, "h_grid", tuple(int(h) for h in self.h_grid))
        self.validate()

    def validate(self) -> None:
        if not self.kinds or any(k not in KINDS for k in self.kinds):
            raise ConfigError(f"kinds must be drawn from {KINDS}, got {self.kinds}")
        if self.count < 1:
            raise ConfigError("count must be at least 1")
        if not 2 <= self.n_min <= self.n_max:
            raise ConfigError(f"need 2 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if not self.measures:
            raise ConfigError("measure list is empty")
        try:
            for m in (*self.measures, *self.correlation_measures):
                MeasureId.parse(m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.theta_grid or any(not t > 0 for t in self.theta_grid):
            raise ConfigError("theta grid must be non-empty and positive")
        if not self.h_grid or any(h < 1 for h in self.h_grid):
            raise ConfigError("h grid must be non-empty with h >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if self.strategy not in ("single", "periodic"):
            raise ConfigError("strategy must be 'single' or 'periodic'")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.alpha not in (0.05, 0.10):
            raise ConfigError("alpha must be 0.05 or 0.10")

    @classmethod
    def desk_scale(cls, **overrides) -> "ExperimentConfig":
        """30 AB and 30 ER graphs with ``n`` in ``[30, 150]``."""
        return cls(**{"count": 30, "n_min": 30, "n_max": 150, **overrides})

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for name, value in asdict(self).items():
            section = _SECTIONS[name]
            if not cp.has_section(section):
                cp.add_section(section)
            if isinstance(value, tuple):
                text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            cp.set(section, name, text)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for section in cp.sections():
            for key, raw in cp.items(section):
                if key not in known:
                    raise ConfigError(f"unknown config key {section}.{key}")
                kw[key] = _parse_value(key, raw, cls.__dataclass_fields__[key].default)
        return cls(**kw)


def _parse_value(key: str, raw: str, default):
    try:
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if key == "theta_grid":
                return tuple(float(s) for s in items)
            if key == "h_grid":
                return tuple(int(s) for s in items)
            return tuple(items)
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw.strip()


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_ini(fh.read())
