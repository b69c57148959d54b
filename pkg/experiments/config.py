"""
Config - Experiment Configuration

Parses the flat, sectioned key-value experiment files (and metadata sidecars,
which are JSON with the same sections) into a validated ExperimentConfig.

Grammar::

    [experiment]
    kind = bench-table        ; sample | bench-table | ks-experiment |
                              ; scaling-curves | drift-check | moments-check
    seed = 20140101           ; required, unsigned 64-bit
    out = results/bench       ; optional
    threads = 4               ; optional, defaults to machine parallelism

    [target]
    component = gaussian
    variance = 1.0
    d = 10

    [bench-table]             ; one section named after the kind
    n_iter = 100000
    ...

Lists are comma separated. Comments start with ';' or '#'. Unknown sections,
unknown keys and duplicated keys are errors reported with their line.
"""

import configparser
import json
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from core.errors import ConfigError
from core.samplers import KINDS

EXPERIMENT_KINDS = (
    "sample",
    "bench-table",
    "ks-experiment",
    "scaling-curves",
    "drift-check",
    "moments-check",
)

DEFAULT_SEED = 20140101

# Cells of the acceptance-rate table: l = 10 is not run for d >= 100.
TABLE_CELLS = (
    (2, 2.4), (2, 6.0), (2, 10.0),
    (5, 2.4), (5, 6.0), (5, 10.0),
    (10, 2.4), (10, 6.0), (10, 10.0),
    (100, 2.4), (100, 6.0),
    (200, 2.4), (200, 6.0),
)

Value = Union[str, int, float, list, None]


# Value converters accept INI strings and already-typed JSON values alike.

def _to_int(value: Value) -> int:
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, str):
        text = value.strip()
        if re.fullmatch(r"[+-]?\d+", text):
            return int(text)
        value = float(text)
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer, got {value}")
    return int(value)


def _to_float(value: Value) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a number")
    return float(value.strip() if isinstance(value, str) else value)


def _to_str(value: Value) -> str:
    return str(value).strip()


def _split(value: Value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, (int, float)):
        return [value]
    parts = [p.strip() for p in str(value).split(",")]
    return [p for p in parts if p]


def _to_floats(value: Value) -> Tuple[float, ...]:
    return tuple(_to_float(v) for v in _split(value))


def _to_ints(value: Value) -> Tuple[int, ...]:
    return tuple(_to_int(v) for v in _split(value))


def _to_strs(value: Value) -> Tuple[str, ...]:
    return tuple(_to_str(v) for v in _split(value))


def _optional(convert: Callable[[Value], object]) -> Callable[[Value], object]:
    def wrapped(value: Value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
            return None
        return convert(value)
    return wrapped


def _cells(value: Value) -> Tuple[Tuple[int, float], ...]:
    """'2:2.4, 2:6' -> ((2, 2.4), (2, 6.0))."""
    cells = []
    for item in _split(value):
        if isinstance(item, (list, tuple)):
            d, l = item
        else:
            d, l = str(item).split(":")
        cells.append((_to_int(d), _to_float(l)))
    return tuple(cells)


def _check(condition: bool, message: str, section: str, key: str):
    if not condition:
        raise ConfigError(message, field=f"{section}.{key}")


def _check_kernel(kind: str, section: str, key: str):
    _check(kind in KINDS, f"unknown kernel '{kind}' (expected one of {', '.join(KINDS)})", section, key)


def _check_scale(l: float, section: str, key: str = "l"):
    _check(l > 0.0 and l == l and l != float("inf"), f"scaling l must be positive and finite, got {l}", section, key)


def _check_c(kernel: str, c, d: int, section: str):
    if kernel == "atmcmc_scaled":
        _check(c is not None, "atmcmc_scaled needs per-coordinate scalars c", section, "c")
        _check(len(c) == d, f"c has {len(c)} entries, expected d = {d}", section, "c")
        _check(all(v > 0.0 for v in c), "entries of c must be positive", section, "c")
        _check(len(set(c)) >= 2, "entries of c must not all be equal", section, "c")
    else:
        _check(c is None, f"c is only valid with kernel atmcmc_scaled, not {kernel}", section, "c")


# Sections


@dataclass(frozen=True)
class TargetConfig:
    """[target] section."""

    component: str = "gaussian"
    variance: float = 1.0
    d: int = 10

    CONVERTERS = {"component": _to_str, "variance": _to_float, "d": _to_int}

    def validate(self):
        _check(self.component == "gaussian", f"unsupported component '{self.component}' (available: gaussian)",
               "target", "component")
        _check(self.variance > 0.0, f"variance must be positive, got {self.variance}", "target", "variance")
        _check(self.d >= 1, f"dimension must satisfy d >= 1, got {self.d}", "target", "d")


@dataclass(frozen=True)
class SampleParams:
    """[sample]: one chain with a stored trace."""

    kernel: str = "atmcmc"
    l: float = 2.4
    c: Optional[Tuple[float, ...]] = None
    n_iter: int = 10000
    thin: int = 1
    x0: Optional[Tuple[float, ...]] = None
    coords: Optional[Tuple[int, ...]] = None
    burn_in: int = 0

    CONVERTERS = {
        "kernel": _to_str, "l": _to_float, "c": _optional(_to_floats), "n_iter": _to_int,
        "thin": _to_int, "x0": _optional(_to_floats), "coords": _optional(_to_ints), "burn_in": _to_int,
    }

    def validate(self, target: TargetConfig):
        s = "sample"
        _check_kernel(self.kernel, s, "kernel")
        _check_scale(self.l, s)
        _check_c(self.kernel, self.c, target.d, s)
        _check(self.n_iter >= 1, f"n_iter must be >= 1, got {self.n_iter}", s, "n_iter")
        _check(self.thin >= 1, f"thin must be >= 1, got {self.thin}", s, "thin")
        _check(0 <= self.burn_in < self.n_iter, f"burn_in must lie in [0, n_iter), got {self.burn_in}", s, "burn_in")
        if self.x0 is not None:
            _check(len(self.x0) in (1, target.d), f"x0 needs 1 or d = {target.d} entries", s, "x0")
        if self.coords is not None:
            _check(bool(self.coords) and all(1 <= i <= target.d for i in self.coords),
                   f"coords are 1-based indices in [1, {target.d}]", s, "coords")


@dataclass(frozen=True)
class BenchTableParams:
    """[bench-table]: acceptance rates over a (d, l) grid."""

    kernels: Tuple[str, ...] = ("rwmh", "atmcmc")
    cells: Tuple[Tuple[int, float], ...] = TABLE_CELLS
    dims: Optional[Tuple[int, ...]] = None
    scales: Optional[Tuple[float, ...]] = None
    n_iter: int = 100000

    CONVERTERS = {
        "kernels": _to_strs, "cells": _cells, "dims": _optional(_to_ints),
        "scales": _optional(_to_floats), "n_iter": _to_int,
    }

    def grid(self) -> Tuple[Tuple[int, float], ...]:
        """dims x scales when either is given, otherwise the explicit cells."""
        if self.dims is None and self.scales is None:
            return self.cells
        dims = self.dims or tuple(sorted({d for d, _ in self.cells}))
        scales = self.scales or tuple(sorted({l for _, l in self.cells}))
        return tuple((d, l) for d in dims for l in scales)

    def validate(self, target: TargetConfig):
        s = "bench-table"
        _check(bool(self.kernels), "at least one kernel is required", s, "kernels")
        for kernel in self.kernels:
            _check(kernel in ("rwmh", "atmcmc"), f"bench-table runs rwmh/atmcmc only, got '{kernel}'", s, "kernels")
        for d, l in self.grid():
            _check(d >= 1, f"dimension must satisfy d >= 1, got {d}", s, "dims" if self.dims else "cells")
            _check_scale(l, s, "scales" if self.scales else "cells")
        _check(self.n_iter >= 1, f"n_iter must be >= 1, got {self.n_iter}", s, "n_iter")


@dataclass(frozen=True)
class KsParams:
    """[ks-experiment]: ensemble KS curves for two kernels."""

    kernel_a: str = "atmcmc"
    kernel_b: str = "rwmh"
    l: float = 2.4
    c: Optional[Tuple[float, ...]] = None
    chains: int = 500
    horizon: int = 5000
    x0: Tuple[float, ...] = (3.0,)
    coords: Tuple[int, ...] = (1,)

    CONVERTERS = {
        "kernel_a": _to_str, "kernel_b": _to_str, "l": _to_float, "c": _optional(_to_floats),
        "chains": _to_int, "horizon": _to_int, "x0": _to_floats, "coords": _to_ints,
    }

    def validate(self, target: TargetConfig):
        s = "ks-experiment"
        _check_kernel(self.kernel_a, s, "kernel_a")
        _check_kernel(self.kernel_b, s, "kernel_b")
        _check(self.kernel_a != self.kernel_b, "kernel_a and kernel_b must differ", s, "kernel_b")
        _check_scale(self.l, s)
        if "atmcmc_scaled" not in (self.kernel_a, self.kernel_b):
            _check(self.c is None, "c is only valid with kernel atmcmc_scaled", s, "c")
        else:
            _check_c("atmcmc_scaled", self.c, target.d, s)
        _check(self.chains >= 2, f"the ensemble needs L >= 2 chains, got {self.chains}", s, "chains")
        _check(self.horizon >= 1, f"horizon must be >= 1, got {self.horizon}", s, "horizon")
        _check(len(self.x0) in (1, target.d), f"x0 needs 1 or d = {target.d} entries", s, "x0")
        _check(bool(self.coords) and all(1 <= i <= target.d for i in self.coords),
               f"coords are 1-based indices in [1, {target.d}]", s, "coords")


@dataclass(frozen=True)
class ScalingParams:
    """[scaling-curves]: diffusion speeds and acceptance rates on an l grid."""

    points: int = 200
    l_min: float = 0.1
    l_max: float = 10.0
    upper: float = 8.0
    abs_tol: float = 1e-10

    CONVERTERS = {"points": _to_int, "l_min": _to_float, "l_max": _to_float,
                  "upper": _to_float, "abs_tol": _to_float}

    def validate(self, target: TargetConfig):
        s = "scaling-curves"
        _check(self.points >= 2, f"points must be >= 2, got {self.points}", s, "points")
        _check(self.l_min > 0.0, f"l_min must be positive, got {self.l_min}", s, "l_min")
        _check(self.l_max > self.l_min, "l_max must exceed l_min", s, "l_max")
        _check(0.0 < self.abs_tol <= 1e-8, f"abs_tol must lie in (0, 1e-8], got {self.abs_tol}", s, "abs_tol")
        _check(self.upper >= 6.0, f"upper must be >= 6 so the Gaussian tail is negligible, got {self.upper}",
               s, "upper")


@dataclass(frozen=True)
class DriftParams:
    """[drift-check]: PV(x)/V(x) at probe points along the first axis."""

    kernel: str = "atmcmc"
    l: float = 2.4
    c: Optional[Tuple[float, ...]] = None
    s: float = 0.5
    probes: Tuple[float, ...] = (0.0, 6.0, 8.0, 10.0)
    samples: int = 100000

    CONVERTERS = {"kernel": _to_str, "l": _to_float, "c": _optional(_to_floats), "s": _to_float,
                  "probes": _to_floats, "samples": _to_int}

    def validate(self, target: TargetConfig):
        sec = "drift-check"
        _check_kernel(self.kernel, sec, "kernel")
        _check_scale(self.l, sec)
        _check_c(self.kernel, self.c, target.d, sec)
        _check(0.0 < self.s <= 1.0, f"s must lie in (0, 1], got {self.s}", sec, "s")
        _check(bool(self.probes), "at least one probe is required", sec, "probes")
        _check(self.samples >= 1000, f"samples must be >= 1000, got {self.samples}", sec, "samples")


@dataclass(frozen=True)
class MomentsParams:
    """[moments-check]: Monte Carlo regularity moments."""

    samples: int = 1000000

    CONVERTERS = {"samples": _to_int}

    def validate(self, target: TargetConfig):
        _check(self.samples >= 4, f"samples must be >= 4, got {self.samples}", "moments-check", "samples")


PARAMS = {
    "sample": SampleParams,
    "bench-table": BenchTableParams,
    "ks-experiment": KsParams,
    "scaling-curves": ScalingParams,
    "drift-check": DriftParams,
    "moments-check": MomentsParams,
}

# Per-kind target defaults (the sample default reproduces a d = 5 sample path).
TARGET_DEFAULTS = {
    "sample": TargetConfig(d=5),
    "bench-table": TargetConfig(d=1),
    "ks-experiment": TargetConfig(d=100),
    "scaling-curves": TargetConfig(d=1),
    "drift-check": TargetConfig(d=1),
    "moments-check": TargetConfig(d=1),
}

ParamsType = Union[SampleParams, BenchTableParams, KsParams, ScalingParams, DriftParams, MomentsParams]


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved, validated experiment."""

    kind: str
    seed: int
    target: TargetConfig
    params: ParamsType
    out_dir: str = ""
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if not self.out_dir:
            object.__setattr__(self, 'out_dir', str(Path("results") / self.kind))

    def to_dict(self) -> Dict[str, Dict[str, object]]:
        """Sections as plain JSON types (the metadata sidecar's `config`)."""
        params = {k: _jsonable(v) for k, v in asdict(self.params).items()}
        return {
            "experiment": {"kind": self.kind, "seed": self.seed, "out": self.out_dir, "threads": self.threads},
            "target": asdict(self.target),
            self.kind: params,
        }


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


# Parsing


EXPERIMENT_CONVERTERS = {"kind": _to_str, "seed": _to_int, "out": _to_str, "threads": _to_int}


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        header = re.match(r"^\[([^\]]+)\]", line)
        if header:
            current = header.group(1).strip()
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section and re.match(rf"^{re.escape(key)}\s*[=:]", line):
            return number
    return None


def _convert(section: str, values: Dict[str, Value], converters: Dict[str, Callable],
             locate: Callable[[str, Optional[str]], Optional[int]]) -> Dict[str, object]:
    out = {}
    for key, raw in values.items():
        if key not in converters:
            raise ConfigError(f"unknown key '{key}' in section [{section}] (allowed: {', '.join(converters)})",
                              field=f"{section}.{key}", line=locate(section, key))
        try:
            out[key] = converters[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse value {raw!r}: {exc}",
                              field=f"{section}.{key}", line=locate(section, key)) from exc
    return out


def build_config(sections: Dict[str, Dict[str, Value]],
                 locate: Callable[[str, Optional[str]], Optional[int]] = lambda s, k: None) -> ExperimentConfig:
    """Validate raw sections into an ExperimentConfig."""
    if "experiment" not in sections:
        raise ConfigError("missing [experiment] section", field="experiment")
    experiment = _convert("experiment", sections["experiment"], EXPERIMENT_CONVERTERS, locate)
    if "kind" not in experiment:
        raise ConfigError("missing experiment kind", field="experiment.kind", line=locate("experiment", None))
    kind = experiment["kind"]
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind '{kind}' (expected one of {', '.join(EXPERIMENT_KINDS)})",
                          field="experiment.kind", line=locate("experiment", "kind"))
    if "seed" not in experiment:
        raise ConfigError("a seed is required", field="experiment.seed", line=locate("experiment", None))
    if not 0 <= experiment["seed"] < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", field="experiment.seed",
                          line=locate("experiment", "seed"))

    for name in sections:
        if name not in ("experiment", "target", kind):
            raise ConfigError(f"unexpected section [{name}] for a {kind} experiment",
                              field=name, line=locate(name, None))

    params_type = PARAMS[kind]
    try:
        target = replace(TARGET_DEFAULTS[kind], **_convert("target", sections.get("target", {}),
                                                          TargetConfig.CONVERTERS, locate))
        target.validate()
        params = params_type(**_convert(kind, sections.get(kind, {}), params_type.CONVERTERS, locate))
        params.validate(target)
        threads = experiment.get("threads", os.cpu_count() or 1)
        if threads < 1:
            raise ConfigError(f"threads must be >= 1, got {threads}", field="experiment.threads")
    except ConfigError as exc:
        if exc.line is None and exc.field and "." in exc.field:
            section, key = exc.field.split(".", 1)
            raise ConfigError(exc.message, field=exc.field, line=locate(section, key)) from None
        raise

    return ExperimentConfig(kind=kind, seed=experiment["seed"], target=target, params=params,
                            out_dir=experiment.get("out", ""), threads=threads)


def _reject_duplicates(pairs: List[Tuple[str, object]]) -> Dict[str, object]:
    out = {}
    for key, value in pairs:
        if key in out:
            raise ConfigError(f"duplicate key '{key}'", field=key)
        out[key] = value
    return out


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse config text (INI sections, or a JSON metadata sidecar)."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text, object_pairs_hook=_reject_duplicates)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {source}: {exc.msg}", line=exc.lineno) from exc
        sections = data.get("config", data)
        if not isinstance(sections, dict) or not all(isinstance(v, dict) for v in sections.values()):
            raise ConfigError(f"{source}: expected an object of sections")
        return build_config(sections)

    parser = configparser.ConfigParser(strict=True, interpolation=None,
                                       inline_comment_prefixes=(";", "#"), default_section="\0")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key '{exc.option}' in section [{exc.section}]",
                          field=f"{exc.section}.{exc.option}", line=exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", field=exc.section, line=exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key-value line before any [section] header", line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"syntax error in {source}", line=line) from exc

    sections = {name: dict(parser.items(name, raw=True)) for name in parser.sections()}
    return build_config(sections, locate=lambda section, key: _line_of(text, section, key))


def load_config(config_path: str) -> ExperimentConfig:
    """Read and parse a config file."""
    path = Path(config_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{config_path}': {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def default_config(kind: str, seed: int = DEFAULT_SEED) -> ExperimentConfig:
    """Complete default configuration for one experiment kind."""
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind '{kind}'", field="experiment.kind")
    return ExperimentConfig(kind=kind, seed=seed, target=TARGET_DEFAULTS[kind], params=PARAMS[kind]())
