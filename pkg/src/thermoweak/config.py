"""Sweep configuration: a flat ``key = value`` file plus command-line overrides.

Example::

    # SNR vs temperature sweep
    quantity = snr_numeric
    axis = temperature
    start = 0
    stop = 300
    points = 31
    theta = 0.025
    phi = 1.1623
    n_trials = 10000
    output = snr.csv

The selection is either ``phi`` (|i> = cos phi |0> + i sin phi |1>, |f> = |0>,
A = sigma_x) or explicit ``pre``, ``post`` and ``observable`` given as
comma-separated complex literals, rows of the observable separated by ``;``::

    pre = 0.6, 0.8j
    post = 1, 0
    observable = 0, 1; 1, 0
"""

import dataclasses
import math
from dataclasses import dataclass, fields
from typing import Optional, Tuple

from .errors import ConfigError
from .probe import K_BOLTZMANN_AU, ThermalGaussianProbe
from .selection import SelectionContext

QUANTITIES = (
    "snr_numeric",
    "snr_closed",
    "snr_weak",
    "qfi_weak",
    "qfi_numeric",
    "qfi_effective",
    "purity",
    "appendix_b",
)
AXES = ("temperature", "theta", "phi", "p_max")
SPACINGS = ("linear", "log")


@dataclass(frozen=True)
class SweepConfig:
    quantity: str = "snr_numeric"
    axis: str = "temperature"
    start: float = 0.0
    stop: float = 300.0
    points: int = 31
    spacing: str = "linear"
    sigma: float = 1.0
    mass: float = 50.0
    temperature: float = 0.0
    hbar: float = 1.0
    k_boltzmann: float = K_BOLTZMANN_AU
    theta: float = 0.025
    phi: Optional[float] = math.atan(2.31)
    pre: Optional[Tuple[complex, ...]] = None
    post: Optional[Tuple[complex, ...]] = None
    observable: Optional[Tuple[Tuple[complex, ...], ...]] = None
    n_trials: int = 10000
    p_max: Optional[float] = None
    n_points: Optional[int] = None
    validity_threshold: float = 0.1
    output: str = "sweep.csv"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"unknown quantity {self.quantity!r}; choose from {QUANTITIES}", field="quantity")
        if self.axis not in AXES:
            raise ConfigError(f"unknown axis {self.axis!r}; choose from {AXES}", field="axis")
        if self.spacing not in SPACINGS:
            raise ConfigError(f"spacing must be one of {SPACINGS}", field="spacing")
        if not self.start < self.stop:
            raise ConfigError(f"start ({self.start}) must be < stop ({self.stop})", field="start")
        if self.points < 2:
            raise ConfigError(f"points must be >= 2, got {self.points}", field="points")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError("log spacing needs start > 0", field="start")
        if self.n_trials <= 0:
            raise ConfigError("n_trials must be positive", field="n_trials")
        if self.p_max is not None and self.p_max <= 0:
            raise ConfigError("p_max must be positive", field="p_max")
        if self.n_points is not None and (self.n_points < 64 or self.n_points % 2):
            raise ConfigError("n_points must be an even integer >= 64", field="n_points")
        explicit = (self.pre, self.post, self.observable)
        if any(v is not None for v in explicit):
            if any(v is None for v in explicit):
                raise ConfigError("pre, post and observable must be given together", field="pre")
        elif self.phi is None:
            raise ConfigError("give either phi or pre/post/observable", field="phi")
        try:
            self.make_probe()
            self.make_context()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def make_probe(self, **changes) -> ThermalGaussianProbe:
        return ThermalGaussianProbe(
            sigma=self.sigma,
            mass=self.mass,
            temperature=self.temperature,
            hbar=self.hbar,
            k_boltzmann=self.k_boltzmann,
        ).replace(**changes)

    def make_context(self, phi=None) -> SelectionContext:
        if phi is not None:
            return SelectionContext.from_phi(phi)
        if self.pre is not None:
            return SelectionContext.from_vectors(self.pre, self.post, [list(r) for r in self.observable])
        return SelectionContext.from_phi(self.phi)

    def replace(self, **changes) -> "SweepConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {_format_value(f.name, value)}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f for f in fields(SweepConfig)}
_INT_FIELDS = {"points", "n_trials", "n_points"}
_STR_FIELDS = {"quantity", "axis", "spacing", "output"}
_VECTOR_FIELDS = {"pre", "post"}


def _format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return repr(z).strip("()")


def _format_value(name, value):
    if name in _VECTOR_FIELDS:
        return ", ".join(_format_complex(z) for z in value)
    if name == "observable":
        return "; ".join(", ".join(_format_complex(z) for z in row) for row in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_complex_list(text):
    return tuple(complex(item.strip().replace(" ", "")) for item in text.split(","))


def parse_value(name, text, line=None):
    """Convert the text of one field to its typed value."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown key {name!r}", line=line, field=name)
    text = text.strip()
    try:
        if text.lower() in ("none", ""):
            return None
        if name in _STR_FIELDS:
            return text
        if name in _INT_FIELDS:
            as_float = float(text)
            if as_float != int(as_float):
                raise ValueError(f"expected an integer, got {text!r}")
            return int(as_float)
        if name in _VECTOR_FIELDS:
            vec = _parse_complex_list(text)
            if len(vec) != 2:
                raise ValueError(f"expected 2 components, got {len(vec)}")
            return vec
        if name == "observable":
            rows = tuple(_parse_complex_list(r) for r in text.split(";"))
            if len(rows) != 2 or any(len(r) != 2 for r in rows):
                raise ValueError("observable must be 2x2, rows separated by ';'")
            return rows
        return float(text)
    except ValueError as exc:
        raise ConfigError(str(exc), line=line, field=name) from None


def parse_config_text(text, overrides=None) -> SweepConfig:
    """Parse ``key = value`` lines; ``overrides`` (already typed) win over the file."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        values[key] = (parse_value(key, value, lineno), lineno)
    merged = {k: v for k, (v, _) in values.items()}
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SweepConfig(**merged)
    except ConfigError as exc:
        if exc.field in values and exc.line is None and not (overrides and exc.field in overrides):
            raise ConfigError(str(exc).split(": ", 1)[-1], line=values[exc.field][1], field=exc.field) from None
        raise


def load_config(path, overrides=None) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), overrides)
