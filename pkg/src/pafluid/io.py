"""Run configuration, CSV/JSON writers and run manifests."""
from __future__ import annotations

import configparser
import csv
import json
import math
import os
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError
from .params import ModelParams
from .weights import weight_from_config

SCHEMA_VERSION = "1"
OUTPUT_ENV = "PAFLUID_OUTPUT_DIR"
DEFAULT_OUTPUT = "pafluid_out"

CSV_COLUMNS = {
    "simulate": ("replica", "t", "k", "x"),
    "ode": ("t", "k", "phi"),
    "study": ("n", "k", "deviation"),
    "fixed-point": ("k", "a"),
    "init": ("k", "c"),
}

# config-file sections; every key may also be given as a flag
_SECTIONS = {
    "model": ("model", "p", "kappa", "weight_table"),
    "numerics": ("tol", "kmax", "rtol", "tail", "t0"),
    "run": ("seed", "n", "replicas", "grid", "ns", "t_end", "init", "k_record", "k_cut",
            "grid_points", "out", "audit", "points"),
}


def fmt(x) -> str:
    """17 significant digits (exact round trip for doubles); ints unchanged."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    model: str = "graph"
    p: float = 1.0
    kappa: float = 0.0
    weight_table: Optional[list] = None
    tol: float = 1e-10
    kmax: Optional[int] = None
    rtol: float = 1e-9
    tail: str = "open"
    t0: Optional[float] = None
    seed: int = 0
    n: int = 1000
    replicas: int = 1
    grid: str = "0:1:0.01"
    ns: list = field(default_factory=lambda: [1000, 10000, 100000])
    t_end: float = 1.0
    init: str = "small"
    k_record: int = 10
    k_cut: int = 10
    grid_points: int = 101
    points: int = 101
    audit: bool = False
    out: Optional[str] = None

    def params(self) -> ModelParams:
        if self.weight_table is not None:
            w = weight_from_config("table", table=self.weight_table)
        else:
            w = weight_from_config("power", kappa=self.kappa)
        return ModelParams(self.model, self.p, w)

    def to_dict(self) -> dict:
        return asdict(self)

    def output_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in ("p", "kappa", "tol", "rtol", "t_end", "t0"):
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key in ("kmax", "seed", "n", "replicas", "k_record", "k_cut", "grid_points", "points"):
            return int(float(value)) if isinstance(value, str) else int(value)
        if key == "ns":
            if isinstance(value, str):
                return [int(float(v)) for v in value.split(",") if v.strip()]
            return [int(v) for v in value]
        if key == "weight_table":
            if isinstance(value, str):
                return [float(v) for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if key == "audit":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse {value!r}", key=key) from None
    return str(value)


def read_config_file(path) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}", key="config") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config file {path}: {e}", key="config") from None
    out = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}] in {path}", key="config")
        for key, value in cp.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key in [{section}] of {path}", key=key)
            out[key] = value
    return out


def parse_config(file: Optional[str] = None, overrides: Optional[dict] = None,
                 base: Optional[dict] = None) -> RunConfig:
    """Merge defaults, ``base`` (e.g. a manifest), the config ``file`` and
    flag ``overrides`` (later wins; ``None`` overrides are ignored) and
    validate the result."""
    values = {}
    for src in (base or {}, read_config_file(file) if file else {}, overrides or {}):
        for k, v in src.items():
            if v is None:
                continue
            if k not in _FIELD_TYPES:
                raise ConfigError("unknown setting", key=k)
            values[k] = _coerce(k, v)
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.model not in ("graph", "urn"):
        raise ConfigError(f"model must be 'graph' or 'urn' (got {cfg.model!r})", key="model")
    cfg.params()  # domain of p and the weight function
    for key in ("tol", "rtol"):
        if not getattr(cfg, key) > 0.0:
            raise ConfigError("tolerance must be positive", key=key)
    if cfg.kmax is not None and cfg.kmax < 2:
        raise ConfigError("kmax must be >= 2", key="kmax")
    if cfg.tail not in ("open", "absorbing"):
        raise ConfigError("tail must be 'open' or 'absorbing'", key="tail")
    for key in ("n", "replicas", "k_record", "k_cut", "grid_points", "points"):
        if getattr(cfg, key) < 1:
            raise ConfigError("must be >= 1", key=key)
    if cfg.seed < 0:
        raise ConfigError("seed must be >= 0", key="seed")
    if not cfg.ns or any(n < 1 for n in cfg.ns):
        raise ConfigError("ns must be a nonempty list of positive integers", key="ns")
    if not cfg.t_end >= 0.0:
        raise ConfigError("t_end must be >= 0", key="t_end")
    parse_grid(cfg.grid)
    if not (cfg.init == "small" or cfg.init.startswith("csv:")):
        raise ConfigError("init must be 'small' or 'csv:FILE'", key="init")


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (both ends included) or a comma list."""
    try:
        if ":" in text:
            a, b, h = (float(x) for x in text.split(":"))
            if not (h > 0 and b >= a >= 0):
                raise ValueError
            m = int(round((b - a) / h))
            return np.linspace(a, b, m + 1)
        g = np.array([float(x) for x in text.split(",") if x.strip()])
        if g.size == 0 or np.any(g < 0) or np.any(np.diff(g) < 0):
            raise ValueError
        return g
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; use start:stop:step with 0 <= start <= stop", key="grid") from None


def read_init_csv(path) -> np.ndarray:
    """Initial proportions from a ``(k, c)`` CSV, or from a ``(t, k, phi)``
    CSV, taking the rows of the earliest time."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}", key="init") from None
    if not rows:
        raise ConfigError(f"{path} has no data rows", key="init")
    cols = set(rows[0])
    try:
        if {"k", "c"} <= cols:
            pairs = [(int(r["k"]), float(r["c"])) for r in rows]
        elif {"t", "k", "phi"} <= cols:
            t0 = min(float(r["t"]) for r in rows)
            pairs = [(int(r["k"]), float(r["phi"])) for r in rows if float(r["t"]) == t0]
        else:
            raise ConfigError(f"{path}: expected columns (k,c) or (t,k,phi)", key="init")
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: non-numeric entry", key="init") from None
    K = max(k for k, _ in pairs)
    if min(k for k, _ in pairs) < 1:
        raise ConfigError(f"{path}: classes start at k=1", key="init")
    c = np.zeros(K)
    for k, v in pairs:
        c[k - 1] = v
    return c


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(columns)
            for r in rows:
                wr.writerow([fmt(v) for v in r])
    except OSError as e:
        raise ConfigError(f"cannot write {path}: {e.strerror}", key="out") from None
    return path


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if math.isfinite(f) else None
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def write_json(path, obj) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as e:
        raise ConfigError(f"cannot write {path}: {e.strerror}", key="out") from None
    return path


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: dict = field(default_factory=dict)
    K: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    audit: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    version: str = __version__
    schema_version: str = SCHEMA_VERSION
    wall_clock: float = 0.0
    started: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    python: str = field(default_factory=platform.python_version)

    def to_dict(self) -> dict:
        return asdict(self)


def read_manifest(path) -> RunManifest:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read manifest {path}: {e}", key="manifest") from None
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"manifest schema {d.get('schema_version')!r} != {SCHEMA_VERSION}", key="manifest")
    known = {f.name for f in fields(RunManifest)}
    return RunManifest(**{k: v for k, v in d.items() if k in known})


def write_outputs(command: str, rows: Iterable[Sequence], manifest: RunManifest, out_dir,
                  extra: Optional[dict] = None) -> dict:
    """Write ``<command>.csv`` (schema in ``CSV_COLUMNS``) and
    ``<command>.json`` (manifest plus ``extra``); returns the paths."""
    out_dir = Path(out_dir)
    stem = command.replace("-", "_")
    csv_path = write_csv(out_dir / f"{stem}.csv", CSV_COLUMNS[command], rows)
    doc = manifest.to_dict()
    if extra:
        doc["results"] = {**doc.get("results", {}), **extra}
    json_path = write_json(out_dir / f"{stem}.json", doc)
    return {"csv": str(csv_path), "json": str(json_path)}
