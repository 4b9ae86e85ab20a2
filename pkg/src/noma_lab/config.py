"""Experiment configuration: a flat ``key = value`` text format.

Example::

    # Fig. 2: ergodic sum rate versus transmit SNR
    metric = ergodic_sum
    scheme = [single, mrc]
    rho_db = 0:40:5          # inclusive range start:stop:step
    a1 = [0.6, 0.9]          # point list
    b1 = [0.9, 0.6]
    zip = a1, b1             # a1 and b1 vary together instead of as a grid
    alpha_su1 = 5

Lists and ranges form a Cartesian grid unless tied together by ``zip``.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Union

from .analytic import MrcVariant
from .model import OutageSpec, Scheme, SystemParams
from .montecarlo import McConfig

__all__ = [
    "ConfigError",
    "Metric",
    "Range",
    "ExperimentConfig",
    "SweepPoint",
    "parse_config",
    "load_config",
    "load_preset",
    "preset_names",
    "PARAM_KEYS",
]


class ConfigError(ValueError):
    pass


class Metric(enum.Enum):
    ERGODIC_SUM = "ergodic_sum"
    PER_SYMBOL_RATES = "per_symbol_rates"
    OUTAGE = "outage"
    OUTAGE_CAPACITY = "outage_capacity"


# Sweepable numeric keys, in the order used for grid nesting (last = fastest).
PARAM_KEYS = (
    "a1", "b1", "alpha_su1", "alpha_su2", "alpha_su3", "alpha_ru2", "alpha_ru3",
    "target_rate", "r_t_x1", "r_t_x2", "r_t_xr", "epsilon", "rho_db",
)
_SYSTEM_KEYS = ("a1", "b1", "alpha_su1", "alpha_su2", "alpha_su3", "alpha_ru2", "alpha_ru3")
_RATE_KEYS = ("r_t_x1", "r_t_x2", "r_t_xr")
_REQUIRED = ("rho_db",) + _SYSTEM_KEYS


@dataclass(frozen=True)
class Range:
    """Inclusive arithmetic range ``start:stop:step``."""

    start: float
    stop: float
    step: float

    def values(self) -> tuple[float, ...]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return tuple(round(self.start + i * self.step, 10) for i in range(n))

    def __str__(self) -> str:
        return f"{_fmt(self.start)}:{_fmt(self.stop)}:{_fmt(self.step)}"


FieldValue = Union[float, tuple, Range]


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def _values(v: FieldValue) -> tuple[float, ...]:
    if isinstance(v, Range):
        return v.values()
    if isinstance(v, tuple):
        return v
    return (v,)


@dataclass(frozen=True)
class SweepPoint:
    """One fully specified evaluation point."""

    scheme: Scheme
    values: dict

    @property
    def params(self) -> SystemParams:
        return SystemParams.from_db(self.values["rho_db"],
                                    **{k: self.values[k] for k in _SYSTEM_KEYS})

    def outage_spec(self, convention: str) -> OutageSpec | None:
        rates = [self.values.get(k, self.values.get("target_rate")) for k in _RATE_KEYS]
        if any(r is None for r in rates):
            return None
        return OutageSpec(*rates, convention=convention)

    @property
    def epsilon(self) -> float | None:
        return self.values.get("epsilon")


@dataclass(frozen=True)
class ExperimentConfig:
    metric: Metric
    schemes: tuple[Scheme, ...]
    fields: dict = field(default_factory=dict)
    zip_groups: tuple[tuple[str, ...], ...] = ()
    convention: str = "two_phase"
    mrc_variant: MrcVariant = MrcVariant.RETAIN_FACTOR
    mc: McConfig = McConfig()
    plot: str = "lines"
    x_axis: str = "rho_db"
    title: str = ""

    def axes(self) -> list[tuple[tuple[str, ...], list[tuple[float, ...]]]]:
        """Sweep axes as ``(keys, rows)``; a zipped group is a single axis."""
        grouped = {k: g for g in self.zip_groups for k in g}
        seen: set[str] = set()
        out = []
        for key in PARAM_KEYS:
            if key not in self.fields or key in seen:
                continue
            group = grouped.get(key, (key,))
            seen.update(group)
            columns = [_values(self.fields[k]) for k in group]
            out.append((group, list(zip(*columns))))
        return out

    def points(self) -> list[SweepPoint]:
        """All evaluation points in output order: scheme outermost, ``rho_db`` fastest."""
        axes = self.axes()
        pts = []
        for scheme in self.schemes:
            for combo in itertools.product(*(rows for _, rows in axes)):
                vals = {}
                for (keys, _), row in zip(axes, combo):
                    vals.update(zip(keys, row))
                pts.append(SweepPoint(scheme, vals))
        return pts

    def swept_keys(self) -> list[str]:
        return [k for k in PARAM_KEYS if k in self.fields and len(_values(self.fields[k])) > 1]

    def echo(self) -> str:
        """Config text that parses back to an equal ``ExperimentConfig``."""
        lines = [f"metric = {self.metric.value}",
                 "scheme = [" + ", ".join(s.value for s in self.schemes) + "]"]
        for key in PARAM_KEYS:
            if key not in self.fields:
                continue
            v = self.fields[key]
            if isinstance(v, tuple):
                text = "[" + ", ".join(_fmt(x) for x in v) + "]"
            elif isinstance(v, Range):
                text = str(v)
            else:
                text = _fmt(v)
            lines.append(f"{key} = {text}")
        for group in self.zip_groups:
            lines.append("zip = " + ", ".join(group))
        lines += [
            f"convention = {self.convention}",
            f"mrc_variant = {self.mrc_variant.value}",
            f"samples = {self.mc.samples}",
            f"seed = {self.mc.seed}",
            f"chunk_size = {self.mc.chunk_size}",
            f"plot = {self.plot}",
            f"x_axis = {self.x_axis}",
        ]
        if self.title:
            lines.append(f"title = {self.title}")
        return "\n".join(lines) + "\n"

    def with_mc(self, samples: int | None = None, seed: int | None = None) -> "ExperimentConfig":
        mc = self.mc
        if samples is not None:
            mc = replace(mc, samples=int(samples))
        if seed is not None:
            mc = replace(mc, seed=int(seed))
        return replace(self, mc=mc)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RANGE_RE = re.compile(rf"^({_NUM})\s*:\s*({_NUM})\s*:\s*({_NUM})$")


def _number(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{where}: value must be finite, got {text!r}")
    return v


def _field_value(text: str, where: str) -> FieldValue:
    m = _RANGE_RE.match(text)
    if m:
        start, stop, step = (float(g) for g in m.groups())
        if step <= 0:
            raise ConfigError(f"{where}: range step must be > 0")
        if stop < start:
            raise ConfigError(f"{where}: empty range {text!r}")
        return Range(start, stop, step)
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"{where}: unterminated list {text!r}")
        items = [t.strip() for t in text[1:-1].split(",") if t.strip()]
        if not items:
            raise ConfigError(f"{where}: empty list")
        return tuple(_number(t, where) for t in items)
    return _number(text, where)


def _word_list(text: str) -> list[str]:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    return [t.strip() for t in text.split(",") if t.strip()]


def _int(text: str, where: str, lo: int = 0, hi: int | None = None) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {text!r}") from None
    if v < lo:
        raise ConfigError(f"{where}: must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{where}: must be <= {hi}")
    return v


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse config text.

    Raises
    ------
    ConfigError
        With ``source:line: key`` diagnostics on any malformed or missing entry.
    """
    fields: dict = {}
    zips: list[tuple[str, ...]] = []
    opts: dict = {}
    metric = None
    schemes = None
    mc_kw = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        where = f"{source}:{lineno}: {key}"
        if not value:
            raise ConfigError(f"{where}: missing value")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key")
        if key != "zip":
            seen.add(key)
        if key in PARAM_KEYS:
            fields[key] = _field_value(value, where)
        elif key == "metric":
            try:
                metric = Metric(value.lower())
            except ValueError:
                raise ConfigError(f"{where}: unknown metric {value!r}; expected one of "
                                  f"{[m.value for m in Metric]}") from None
        elif key == "scheme":
            try:
                schemes = tuple(Scheme.parse(s) for s in _word_list(value))
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from None
            if not schemes:
                raise ConfigError(f"{where}: no scheme given")
        elif key == "zip":
            group = tuple(_word_list(value))
            bad = [k for k in group if k not in PARAM_KEYS]
            if bad or len(group) < 2:
                raise ConfigError(f"{where}: zip needs two or more sweep keys, got {value!r}")
            zips.append(group)
        elif key in ("samples", "chunk_size"):
            mc_kw[key] = _int(value, where, lo=1)
        elif key == "seed":
            mc_kw[key] = _int(value, where, hi=2**64 - 1)
        elif key == "convention":
            if value not in OutageSpec.CONVENTIONS:
                raise ConfigError(f"{where}: expected one of {OutageSpec.CONVENTIONS}")
            opts[key] = value
        elif key == "mrc_variant":
            try:
                opts[key] = MrcVariant(value)
            except ValueError:
                raise ConfigError(f"{where}: unknown variant {value!r}") from None
        elif key == "plot":
            if value not in ("lines", "surface"):
                raise ConfigError(f"{where}: expected 'lines' or 'surface'")
            opts[key] = value
        elif key == "x_axis":
            if value not in PARAM_KEYS:
                raise ConfigError(f"{where}: unknown axis {value!r}")
            opts[key] = value
        elif key == "title":
            opts[key] = value
        else:
            raise ConfigError(f"{where}: unknown key")

    if metric is None:
        raise ConfigError(f"{source}: missing 'metric'")
    if schemes is None:
        raise ConfigError(f"{source}: missing 'scheme'")
    for key in _REQUIRED:
        if key not in fields:
            raise ConfigError(f"{source}: missing '{key}'")
    for group in zips:
        missing = [k for k in group if k not in fields]
        if missing:
            raise ConfigError(f"{source}: zip references unset key(s) {missing}")
        lengths = {len(_values(fields[k])) for k in group}
        if len(lengths) != 1:
            raise ConfigError(f"{source}: zipped keys {list(group)} have different lengths")
    flat = [k for g in zips for k in g]
    if len(flat) != len(set(flat)):
        raise ConfigError(f"{source}: a key appears in more than one zip group")
    if metric is Metric.OUTAGE:
        if "target_rate" not in fields and not all(k in fields for k in _RATE_KEYS):
            raise ConfigError(f"{source}: metric 'outage' needs target_rate or r_t_x1/r_t_x2/r_t_xr")
    if metric is Metric.OUTAGE_CAPACITY and "epsilon" not in fields:
        raise ConfigError(f"{source}: metric 'outage_capacity' needs epsilon")
    try:
        mc = McConfig(**mc_kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = ExperimentConfig(metric=metric, schemes=schemes, fields=fields,
                           zip_groups=tuple(zips), mc=mc, **opts)
    _validate_points(cfg, source)
    return cfg


def _validate_points(cfg: ExperimentConfig, source: str) -> None:
    for keys, rows in cfg.axes():
        if not rows:
            raise ConfigError(f"{source}: empty sweep for {', '.join(keys)}")
    for pt in cfg.points():
        try:
            pt.params
            if cfg.metric is Metric.OUTAGE:
                pt.outage_spec(cfg.convention)
            eps = pt.epsilon
            if cfg.metric is Metric.OUTAGE_CAPACITY and not 0.0 < eps < 1.0:
                raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
        except ValueError as exc:
            raise ConfigError(f"{source}: invalid sweep point {pt.values}: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def preset_names() -> list[str]:
    root = resources.files("noma_lab") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str) -> ExperimentConfig:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    res = resources.files("noma_lab") / "presets" / f"{name}.cfg"
    return parse_config(res.read_text(), f"preset:{name}")
