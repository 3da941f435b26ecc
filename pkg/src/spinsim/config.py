"""Run configuration: INI file with sections, defaults for InP with B0 along (111).

Precedence is command-line flag > file value > built-in default. Every key
is validated before any computation; unknown sections or keys are rejected
with the offending line number.

Example::

    [lattice]
    structure = zincblende
    field = 1, 1, 1
    r_max = 12

    [species]
    I = 4.5
    S = 0.5
    gamma_I = 1.0
    gamma_S = 1.0
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields

from .hte import Order
from .lattice import STRUCTURES
from .meanfield import PUMPING


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    structure: str = "zincblende"
    field_dir: tuple = (1.0, 1.0, 1.0)
    r_max: float = 12.0
    tol: float = 1e-4
    I: float = 4.5
    S: float = 0.5
    gamma_I: float = 1.0
    gamma_S: float = 1.0
    j: float = 4.5
    polarization: float = 0.5
    order: str = "G1+G2"
    n_delta: int = 200
    delta_max: float = 10.0
    delta_min: float = 1e-3
    pumping: str = "optical"
    grid: int = 24
    sequence: str = "wahuha"
    coupling: str = "ising"
    cluster: str = "1x1"
    n_halvings: int = 4
    eta: float = 0.0
    beta: float = 0.1
    out: str | None = None
    fmt: str = "json"
    seed: int | None = None
    source: dict = field(default_factory=dict, repr=False, compare=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        d["field_dir"] = list(d["field_dir"])
        return d


# section -> {ini key: field name}
SCHEMA = {
    "lattice": {"structure": "structure", "field": "field_dir", "r_max": "r_max", "tol": "tol"},
    "species": {"i": "I", "s": "S", "gamma_i": "gamma_I", "gamma_s": "gamma_S"},
    "hte": {"j": "j", "eta": "eta", "beta": "beta", "order": "order"},
    "adrf": {"j": "j", "polarization": "polarization", "order": "order",
             "n_delta": "n_delta", "delta_max": "delta_max", "delta_min": "delta_min"},
    "meanfield": {"pumping": "pumping", "grid": "grid"},
    "aht": {"sequence": "sequence", "coupling": "coupling", "cluster": "cluster",
            "n_halvings": "n_halvings"},
    "output": {"dir": "out", "format": "fmt", "seed": "seed"},
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _line_of(text: str, section: str, key: str | None) -> int:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if key is None and current == section:
                return no
            continue
        if current == section and key is not None:
            name = line.split("=", 1)[0].split(":", 1)[0].strip().lower()
            if name == key:
                return no
    return 0


def _convert(name: str, raw: str):
    raw = raw.strip()
    if name == "field_dir":
        parts = [p for p in raw.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError("expected three comma-separated components")
        return tuple(float(p) for p in parts)
    if name in ("n_delta", "grid", "n_halvings"):
        return int(raw)
    if name == "seed":
        return None if raw.lower() in ("", "none") else int(raw)
    if name in ("out",):
        return raw or None
    kind = _TYPES[name]
    if kind in ("float", float):
        return float(raw)
    return raw


def load_file(path: str) -> dict:
    """Parse an INI file into ``{field: value}`` with per-key line numbers in errors."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_text(text, path)


def parse_text(text: str, origin: str = "<config>") -> dict:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    values = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ConfigError(f"{origin}:{_line_of(text, sec, None)}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[sec]:
                raise ConfigError(
                    f"{origin}:{_line_of(text, sec, key)}: unknown key '{key}' in [{section}]")
            name = SCHEMA[sec][key]
            try:
                values[name] = _convert(name, raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{origin}:{_line_of(text, sec, key)}: bad value for '{key}': {exc}") from None
    return values


def _half_integer(x) -> bool:
    return x > 0 and abs(2 * x - round(2 * x)) < 1e-12


def validate(cfg: RunConfig) -> RunConfig:
    """Raise :class:`ConfigError` on the first physically invalid value."""
    if cfg.structure not in STRUCTURES:
        raise ConfigError(f"structure must be one of {STRUCTURES}")
    if len(cfg.field_dir) != 3 or math.hypot(*cfg.field_dir) == 0:
        raise ConfigError("field must be a non-zero 3-vector")
    if not cfg.r_max > 0:
        raise ConfigError("r_max must be positive")
    if not 0 < cfg.tol < 1:
        raise ConfigError("tol must lie in (0, 1)")
    for name in ("I", "S", "j"):
        if not _half_integer(getattr(cfg, name)):
            raise ConfigError(f"{name} must be a positive half-integer, got {getattr(cfg, name)}")
    for name in ("gamma_I", "gamma_S"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    if not 0 <= cfg.polarization < 1:
        raise ConfigError("polarization must lie in [0, 1)")
    try:
        cfg.order = Order.parse(cfg.order).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.n_delta < 2:
        raise ConfigError("n_delta must be at least 2")
    if not cfg.delta_max > cfg.delta_min > 0:
        raise ConfigError("need delta_max > delta_min > 0")
    if cfg.pumping not in PUMPING:
        raise ConfigError(f"pumping must be one of {PUMPING}")
    if cfg.grid < 2:
        raise ConfigError("grid must be at least 2")
    if cfg.coupling not in ("ising", "secular", "heisenberg"):
        raise ConfigError("coupling must be ising, secular or heisenberg")
    if cfg.n_halvings < 3:
        raise ConfigError("n_halvings must be at least 3")
    if cfg.beta < 0:
        raise ConfigError("beta must be non-negative")
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    try:
        parse_cluster(cfg.cluster)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def parse_cluster(text: str) -> tuple:
    """``"NxM"`` -> ``(N, M)``: N spins of species I and M of species S."""
    try:
        a, b = text.lower().split("x")
        n_i, n_s = int(a), int(b)
    except ValueError:
        raise ValueError(f"cluster must look like 2x2, got {text!r}") from None
    if n_i < 0 or n_s < 0 or n_i + n_s == 0:
        raise ValueError("cluster needs at least one spin")
    return n_i, n_s


def build_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then non-``None`` ``overrides``."""
    values = {}
    source = {}
    if path:
        values.update(load_file(path))
        source.update({k: "file" for k in values})
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k not in _TYPES or k == "source":
            raise ConfigError(f"unknown option {k}")
        values[k] = v
        source[k] = "flag"
    cfg = RunConfig(**values)
    cfg.source = source
    if isinstance(cfg.field_dir, str):
        cfg.field_dir = _convert("field_dir", cfg.field_dir)
    cfg.field_dir = tuple(float(x) for x in cfg.field_dir)
    return validate(cfg)
