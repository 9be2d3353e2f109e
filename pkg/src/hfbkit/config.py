"""Run configuration: flat ``key = value`` text with dotted section keys.

Example::

    # reference run
    grid.n = 64
    potential.N = 16
    stepping.dt = 1e-3
    analysis.family = 4:inf, 6:6, 8:4, inf:2

Blank lines and ``#`` comments are ignored; unknown keys are errors.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .grid import Grid, make_grid
from .potential import PotentialSpec


@dataclass
class GridConfig:
    d: int = 1
    n: int = 64
    L: float = 10.0


@dataclass
class PotentialConfig:
    beta: float = 0.5
    N: float = 16.0
    eps: float = 0.1
    r0: float = 2.0
    amplitude: "float | None" = None
    strength: float = 1.0


@dataclass
class DataConfig:
    phi_center: "float | None" = None
    phi_width: float = 1.0
    phi_momentum: float = 1.0
    k_norm: float = 0.5
    k_width: float = 0.5
    k_envelope: float = 1.0
    k_random: bool = False
    small_exponent: float = 0.1


@dataclass
class SteppingConfig:
    dt: float = 1e-3
    T: float = 1.0
    stride: int = 10


@dataclass
class AnalysisConfig:
    alpha: float = 0.6
    family: "pairs | None" = None
    p0: float = 3.0
    p1: float = 8.0
    j_max: int = 1
    window: "pair | None" = None
    taper: float = 0.1
    pad: int = 4


@dataclass
class OutputConfig:
    dir: str = "out"
    run_id: str = "run"


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    data: DataConfig = field(default_factory=DataConfig)
    stepping: SteppingConfig = field(default_factory=SteppingConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def validate(self) -> "RunConfig":
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}")

        if self.grid.d not in (1, 2, 3):
            bad("grid.d", "must be 1, 2 or 3")
        if self.grid.n < 4:
            bad("grid.n", "must be at least 4")
        if self.grid.d == 3 and self.grid.n > 12:
            bad("grid.n", "d=3 is supported only for n <= 12")
        if not (self.grid.L > 0 and math.isfinite(self.grid.L)):
            bad("grid.L", "must be finite and positive")
        if not 0 < self.potential.beta < 1:
            bad("potential.beta", "must lie in (0, 1)")
        if self.potential.N < 1:
            bad("potential.N", "must be >= 1")
        if self.potential.eps <= 0:
            bad("potential.eps", "must be positive")
        if self.potential.r0 <= 0:
            bad("potential.r0", "must be positive")
        if self.data.phi_width <= 0:
            bad("data.phi_width", "must be positive")
        if self.data.k_norm < 0:
            bad("data.k_norm", "must be non-negative")
        if self.stepping.dt <= 0 or not math.isfinite(self.stepping.dt):
            bad("stepping.dt", "must be finite and positive")
        if self.stepping.T < 0:
            bad("stepping.T", "must be non-negative")
        if self.stepping.stride < 1:
            bad("stepping.stride", "must be >= 1")
        steps = self.steps
        if steps % self.stepping.stride:
            bad("stepping.stride", f"must divide the step count {steps}")
        if not self.analysis.alpha > 0.5:
            bad("analysis.alpha", "must exceed 1/2")
        if self.analysis.j_max < 0:
            bad("analysis.j_max", "must be >= 0")
        if not (2 < self.analysis.p0 <= self.analysis.p1 < math.inf):
            bad("analysis.p0", "dual bounds need 2 < p0 <= p1 < inf")
        if not 0 <= self.analysis.taper <= 1:
            bad("analysis.taper", "must lie in [0, 1]")
        if self.analysis.pad < 1:
            bad("analysis.pad", "must be >= 1")
        return self

    @property
    def steps(self) -> int:
        ratio = self.stepping.T / self.stepping.dt
        steps = int(round(ratio))
        if abs(steps - ratio) > 1e-9 * max(1.0, ratio):
            raise ConfigError("stepping.T: must be an integer multiple of stepping.dt")
        return steps

    def make_grid(self) -> Grid:
        return make_grid(self.grid.d, self.grid.n, self.grid.L)

    def potential_spec(self) -> PotentialSpec:
        p = self.potential
        return PotentialSpec(beta=p.beta, N=p.N, eps=p.eps, r0=p.r0, amplitude=p.amplitude,
                             d=self.grid.d, strength=p.strength)


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""


SECTIONS = ("grid", "potential", "data", "stepping", "analysis", "output")


def _parse_float(s: str) -> float:
    s = s.strip().lower()
    if s in ("inf", "+inf", "infinity"):
        return math.inf
    return float(s)


def _parse_pairs(s: str):
    out = []
    for item in s.split(","):
        a, _, b = item.strip().partition(":")
        if not b:
            raise ValueError(f"expected p:q, got {item.strip()!r}")
        out.append((_parse_float(a), _parse_float(b)))
    return tuple(out)


def _parse_pair(s: str):
    parts = [p for p in s.replace(":", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {s!r}")
    return (_parse_float(parts[0]), _parse_float(parts[1]))


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parser(annotation: str):
    annotation = annotation.strip("'\"")
    optional = annotation.endswith("| None")
    base = annotation.replace("| None", "").strip()
    conv = {"int": int, "float": _parse_float, "bool": _parse_bool, "str": str,
            "pairs": _parse_pairs, "pair": _parse_pair}[base]

    def parse(s: str):
        if optional and s.strip().lower() in ("none", ""):
            return None
        return conv(s.strip())

    return parse


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{_format(a)}:{_format(b)}" for a, b in value)
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def schema() -> dict:
    """``{dotted key: annotation}`` for every accepted key."""
    out = {"seed": "int"}
    for sec in SECTIONS:
        cls = type(getattr(RunConfig(), sec))
        for f in dataclasses.fields(cls):
            out[f"{sec}.{f.name}"] = f.type.strip("'\"")
    return out


def apply_overrides(cfg: RunConfig, items: dict) -> RunConfig:
    types = schema()
    for key, raw in items.items():
        if key not in types:
            raise ConfigError(f"{key}: unknown key")
        try:
            value = _parser(types[key])(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        if key == "seed":
            cfg.seed = value
        else:
            sec, name = key.split(".", 1)
            setattr(getattr(cfg, sec), name, value)
    return cfg


def parse_config(text: str) -> RunConfig:
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key in items:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        items[key] = value.strip()
    return apply_overrides(RunConfig(), items).validate()


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(cfg: RunConfig) -> str:
    lines = [f"seed = {cfg.seed}"]
    for sec in SECTIONS:
        obj = getattr(cfg, sec)
        for f in dataclasses.fields(obj):
            lines.append(f"{sec}.{f.name} = {_format(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def sweep_preset() -> RunConfig:
    """Default data and potential on a grid that resolves ``V_N`` up to ``N = 128``."""
    cfg = RunConfig()
    cfg.grid.n = 128
    cfg.output.run_id = "sweep"
    return cfg.validate()
