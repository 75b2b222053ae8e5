"""Experiment configuration: JSON validation and instance construction.

A config is a single JSON object::

    {
      "problem": "wquad",                       # fts|maxball|wquad|matcomp|svmdual|logreg
      "set": {"kind": "L2Ball", "radius": 1.0},  # L1Ball|L2Ball|LInfBall|Simplex|NuclearBall
      "data": {"source": "synthetic", "seed": 7, "n": 1000},
      "solver": {"method": "adaptive", "L_init": 1.0, "max_iters": 500},
      "x0": "vertex",                           # vertex|zero|center (optional)
      "output_dir": "runs/wquad"
    }

See README.md for the per-problem ``data`` keys. Validation failures raise
:class:`ConfigError` carrying a dotted path to the offending field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np

from . import data as datamod
from .certificates import reference_fstar
from .core import ContractError
from .objectives import (
    FermatTorricelli,
    LogisticRegression,
    MatrixCompletion,
    MaxBall,
    SvmDual,
    WeightedQuadratic,
)
from .oracles import FeasibleSetSpec, SetKind, make_oracle
from .solver import (
    AdaptiveConfig,
    Armijo,
    Decreasing,
    ExactLineSearch,
    Lipschitz,
    SolveResult,
    adaptive_fw,
    classical_fw,
)

PROBLEMS = ("fts", "maxball", "wquad", "matcomp", "svmdual", "logreg")
STRATEGIES = ("adaptive", "decreasing", "exact", "armijo", "lipschitz")
_SYNTHETIC_ONLY = ("fts", "maxball", "wquad")
_FILE_FORMATS = {"matcomp": ("movielens",), "svmdual": ("libsvm", "csv"), "logreg": ("libsvm", "csv")}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _need(block: dict, key: str, path: str, kind=float, default: Any = ...):
    if key not in block:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "required field missing")
        return default
    value = block[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {value!r}")
    return float(value) if kind is float else value


def _positive(value, path):
    if not value > 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return value


def load_config(path) -> dict:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("<file>", f"config file {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    cfg.setdefault("_base_dir", str(path.parent.resolve()))
    return cfg


@dataclass
class Instance:
    problem: str
    objective: Any
    oracle: Any
    spec: FeasibleSetSpec
    x0: np.ndarray
    hash: str
    constants: Dict[str, Any] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)


def _hash_arrays(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(str(p.dtype).encode() + str(p.shape).encode())
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(json.dumps(p, sort_keys=True).encode())
        h.update(b"|")
    return h.hexdigest()


def _load_text(block: dict, base: str, path: str) -> str:
    file_path = Path(_need(block, "path", path, str))
    if not file_path.is_absolute():
        file_path = Path(base) / file_path
    try:
        return file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}.path", f"cannot read {str(file_path)!r}: {exc.strerror}") from None


def _build_objective(cfg: dict):
    problem = cfg["problem"]
    block = cfg.get("data")
    if not isinstance(block, dict):
        raise ConfigError("data", "required object missing")
    source = _need(block, "source", "data", str)
    base = cfg.get("_base_dir", ".")
    if source not in ("synthetic", "file"):
        raise ConfigError("data.source", f"must be 'synthetic' or 'file', got {source!r}")
    if source == "file":
        if problem in _SYNTHETIC_ONLY:
            raise ConfigError("data.source", f"problem {problem!r} only supports synthetic data")
        fmt = _need(block, "format", "data", str)
        if fmt not in _FILE_FORMATS[problem]:
            raise ConfigError("data.format", f"format {fmt!r} not supported for {problem!r}")
        text = _load_text(block, base, "data")
        try:
            if fmt == "movielens":
                cap = _need(block, "column_cap", "data", int, None)
                obs = datamod.parse_movielens(text, column_cap=cap)
                return MatrixCompletion(obs), _hash_arrays(obs.i, obs.j, obs.values, [obs.rows, obs.cols]), {}
            if fmt == "libsvm":
                ds = datamod.parse_libsvm(text)
            else:
                ds = datamod.parse_csv_labeled(text, _need(block, "label_column", "data", str))
        except datamod.ParseError as exc:
            raise ConfigError("data.path", str(exc)) from None
    else:
        seed = _need(block, "seed", "data", int)
        if problem in ("fts", "maxball"):
            N = _positive(_need(block, "N", "data", int), "data.N")
            n = _positive(_need(block, "n", "data", int), "data.n")
            anchors = datamod.gen_gaussian_anchors(N, n, seed)
            cls = FermatTorricelli if problem == "fts" else MaxBall
            return cls(anchors), _hash_arrays(anchors), {}
        if problem == "wquad":
            n = _positive(_need(block, "n", "data", int), "data.n")
            a = datamod.gen_weights(n, seed, _need(block, "low", "data", int, 1), _need(block, "high", "data", int, 10))
            return WeightedQuadratic(a), _hash_arrays(a), {}
        if problem == "matcomp":
            try:
                params = datamod.SnrModelParams(
                    _need(block, "m", "data", int), _need(block, "n", "data", int),
                    _need(block, "r", "data", int), _need(block, "p", "data"),
                    _need(block, "snr", "data"),
                )
                obs, meta = datamod.gen_lowrank_observed(params, seed)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError("data", str(exc)) from None
            return MatrixCompletion(obs), _hash_arrays(obs.i, obs.j, obs.values, [obs.rows, obs.cols]), meta
        m = _positive(_need(block, "m", "data", int), "data.m")
        d = _positive(_need(block, "d", "data", int), "data.d")
        ds = datamod.gen_classification(m, d, seed, _need(block, "noise", "data", float, 0.5))
    obj = SvmDual.from_dataset(ds) if problem == "svmdual" else LogisticRegression(ds)
    return obj, _hash_arrays(ds.features, ds.labels), {"m": int(ds.features.shape[0]), "features": int(ds.features.shape[1])}


def _interior_radius(spec: FeasibleSetSpec) -> Optional[float]:
    """Radius of the largest Euclidean ball around the origin inside the set."""
    if spec.kind is SetKind.L2_BALL or spec.kind is SetKind.LINF_BALL:
        return spec.radius
    if spec.kind is SetKind.L1_BALL:
        return spec.radius / math.sqrt(spec.dim)
    return None


def _fstar_x_star_interior(obj, spec):
    return isinstance(obj, WeightedQuadratic) and spec.kind is not SetKind.SIMPLEX


def build_instance(cfg: dict) -> Instance:
    problem = cfg.get("problem")
    if problem not in PROBLEMS:
        raise ConfigError("problem", f"must be one of {', '.join(PROBLEMS)}, got {problem!r}")
    sblock = cfg.get("set")
    if not isinstance(sblock, dict):
        raise ConfigError("set", "required object missing")
    kind = _need(sblock, "kind", "set", str)
    try:
        kind = SetKind(kind)
    except ValueError:
        raise ConfigError("set.kind", f"unknown set kind {kind!r}") from None
    if (problem == "matcomp") != (kind is SetKind.NUCLEAR_BALL):
        raise ConfigError("set.kind", f"set incompatible with problem: {kind.value} with {problem}")
    if problem == "svmdual" and kind is not SetKind.SIMPLEX:
        raise ConfigError("set.kind", f"set incompatible with problem: {kind.value} with {problem}")
    radius = 1.0 if kind is SetKind.SIMPLEX else _positive(_need(sblock, "radius", "set"), "set.radius")

    obj, data_hash, meta = _build_objective(cfg)
    shape = getattr(obj, "shape", None)
    spec = FeasibleSetSpec(kind, obj.dim, radius, shape)
    oracle = make_oracle(spec)

    default_x0 = {"wquad": "vertex", "fts": "vertex", "maxball": "vertex", "svmdual": "center"}.get(problem, "zero")
    x0_kind = cfg.get("x0", default_x0)
    full_shape = shape if shape is not None else (obj.dim,)
    if x0_kind == "vertex":
        x0 = oracle.lmo(-np.ones(full_shape))
    elif x0_kind == "zero":
        x0 = np.zeros(full_shape)
    elif x0_kind == "center":
        x0 = np.full(full_shape, 1.0 / obj.dim) if kind is SetKind.SIMPLEX else np.zeros(full_shape)
    else:
        raise ConfigError("x0", f"must be 'vertex', 'zero' or 'center', got {x0_kind!r}")
    if not oracle.contains(x0, 1e-9):
        raise ConfigError("x0", f"starting point {x0_kind!r} is not in the {kind.value}")

    constants: Dict[str, Any] = {"D": oracle.diameter}
    if obj.lipschitz is not None:
        constants["L_true"] = obj.lipschitz
    if _fstar_x_star_interior(obj, spec):
        constants["fstar"] = 0.0
        constants["fstar_source"] = "analytic"
        r = _interior_radius(spec)
        constants["pl"] = {"c": math.sqrt(1.0 / (4.0 * float(obj.a.min()))), "r": r}
    spec_echo = {"kind": kind.value, "radius": radius, "shape": list(shape) if shape else None}
    ihash = _hash_arrays(problem, spec_echo, data_hash, x0)
    return Instance(problem, obj, oracle, spec, x0, ihash, constants, meta)


def adaptive_config(block: dict, path: str = "solver") -> AdaptiveConfig:
    kw = {"max_iters": _need(block, "max_iters", path, int)}
    for key in ("L_init", "gap_tol", "alpha_min", "L_max_factor"):
        if key in block:
            kw[key] = _need(block, key, path)
    if "max_backtracks_per_iter" in block:
        kw["max_backtracks_per_iter"] = _need(block, "max_backtracks_per_iter", path, int)
    try:
        return AdaptiveConfig(**kw)
    except ContractError as exc:
        raise ConfigError(path, str(exc)) from None


def make_runner(strategy: str, cfg: dict, inst: Instance) -> Callable[[], SolveResult]:
    """Return a zero-argument callable that solves ``inst`` with ``strategy``."""
    block = cfg.get("solver")
    if not isinstance(block, dict):
        raise ConfigError("solver", "required object missing")
    max_iters = _need(block, "max_iters", "solver", int)
    if max_iters < 0:
        raise ConfigError("solver.max_iters", "must be non-negative")
    gap_tol = _need(block, "gap_tol", "solver", float, 0.0)
    if strategy == "adaptive":
        acfg = adaptive_config(block)
        return lambda: adaptive_fw(inst.objective, inst.oracle, acfg, inst.x0)
    if strategy == "decreasing":
        rule = Decreasing()
    elif strategy == "exact":
        rule = ExactLineSearch()
    elif strategy == "armijo":
        try:
            rule = Armijo(_need(block, "delta", "solver", float, 0.5), _need(block, "gamma", "solver", float, 0.25))
        except ContractError as exc:
            raise ConfigError("solver", str(exc)) from None
    elif strategy == "lipschitz":
        L = _need(block, "L", "solver", float, None)
        if L is None:
            L = inst.objective.lipschitz
        if L is None:
            raise ConfigError("solver.L", f"lipschitz strategy needs an explicit L for {inst.problem!r}")
        rule = Lipschitz(_positive(L, "solver.L"))
    else:
        raise ConfigError("strategies", f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    return lambda: classical_fw(inst.objective, inst.oracle, inst.x0, rule, max_iters, gap_tol)


def primary_strategy(cfg: dict) -> str:
    block = cfg.get("solver")
    if not isinstance(block, dict):
        raise ConfigError("solver", "required object missing")
    method = _need(block, "method", "solver", str)
    if method == "adaptive":
        return "adaptive"
    if method == "classical":
        rule = _need(block, "rule", "solver", str)
        if rule not in STRATEGIES[1:]:
            raise ConfigError("solver.rule", f"must be one of {', '.join(STRATEGIES[1:])}, got {rule!r}")
        return rule
    raise ConfigError("solver.method", f"must be 'adaptive' or 'classical', got {method!r}")


def finalize_constants(cfg: dict, inst: Instance) -> Dict[str, Any]:
    """Constants for ``fw certify``; adds a reference ``f*`` when requested."""
    out = dict(inst.constants)
    block = cfg.get("solver", {})
    if primary_strategy(cfg) == "adaptive":
        out["L_init"] = adaptive_config(block).L_init
    if "fstar" not in out and cfg.get("reference_fstar"):
        acfg = adaptive_config(block)
        out["fstar"] = reference_fstar(inst.objective, inst.oracle, inst.x0, acfg)
        out["fstar_source"] = "reference run (10x iterations, minus 1e-12)"
    if "pl" in out:
        out["pl"] = dict(out["pl"], D=out["D"])
    return out
