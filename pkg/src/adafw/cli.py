"""Command-line entry point: ``fw run``, ``fw compare`` and ``fw certify``.

Exit codes: 0 success, 1 a certificate was violated (certify) or the solver
failed, 2 invalid input (bad config, incompatible set, missing constants).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import certificates as certs
from .charts import convergence_chart
from .config import (
    ConfigError,
    build_instance,
    finalize_constants,
    load_config,
    make_runner,
    primary_strategy,
)
from .core import ContractError
from .oracles import PowerIterationError
from .traceio import fmt, parse_trace, write_trace

log = logging.getLogger("adafw")

CERTIFICATE_NAMES = ("sublinear", "halving", "product", "pl", "backtracks", "gap")
_REQUIRES = {
    "sublinear": ("fstar", "D"),
    "halving": ("fstar", "D"),
    "product": ("fstar", "D", "Delta"),
    "pl": ("fstar", "pl"),
    "backtracks": ("L_true", "L_init"),
    "gap": ("fstar",),
}


def _clean(obj):
    """Make a structure JSON-safe: non-finite floats become None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")


def _echo(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def _prepare(config_path, seed, out):
    cfg = load_config(config_path)
    if seed is not None:
        data = cfg.get("data")
        if not isinstance(data, dict):
            raise ConfigError("data", "required object missing")
        data["seed"] = seed
    if out is not None:
        cfg["output_dir"] = str(out)
    if not isinstance(cfg.get("output_dir"), str):
        raise ConfigError("output_dir", "required string missing")
    inst = build_instance(cfg)
    return cfg, inst, Path(cfg["output_dir"])


def _timed(runner):
    t0 = time.perf_counter()
    res = runner()
    return res, time.perf_counter() - t0


def _summary(cfg, inst, strategy, res, wall):
    return {
        "config": _echo(cfg),
        "instance_hash": inst.hash,
        "strategy": strategy,
        "status": res.status.value,
        "final_f": res.final_value,
        "final_gap": res.final_gap,
        "wall_time": wall,
        "iterations": len(res.steps),
        "trace_rows": len(res.trace),
    }


def cmd_run(config_path, seed=None, out=None) -> int:
    cfg, inst, out_dir = _prepare(config_path, seed, out)
    strategy = primary_strategy(cfg)
    runner = make_runner(strategy, cfg, inst)
    constants = finalize_constants(cfg, inst)
    res, wall = _timed(runner)
    log.info("%s: %s after %d steps, f=%s", strategy, res.status.value, len(res.steps), fmt(res.final_value))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(out_dir / "trace.csv", res.trace)
    _dump(out_dir / "summary.json", _summary(cfg, inst, strategy, res, wall))
    (out_dir / "convergence.svg").write_text(
        convergence_chart({strategy: res.trace}, f"{inst.problem}: {strategy}"), encoding="utf-8")
    _dump(out_dir / "constants.json", constants)
    return 0


def cmd_compare(config_path, strategies, seed=None, out=None) -> int:
    if len(strategies) < 2 or len(set(strategies)) != len(strategies):
        raise ConfigError("strategies", "need at least two distinct strategies")
    cfg, inst, out_dir = _prepare(config_path, seed, out)
    runners = [make_runner(s, cfg, inst) for s in strategies]
    with ThreadPoolExecutor(max_workers=len(runners)) as pool:
        results = list(pool.map(_timed, runners))

    out_dir.mkdir(parents=True, exist_ok=True)
    overview = {"config": _echo(cfg), "instance_hash": inst.hash, "strategies": {}}
    for name, (res, wall) in zip(strategies, results):
        sub = out_dir / name
        sub.mkdir(exist_ok=True)
        write_trace(sub / "trace.csv", res.trace)
        summary = _summary(cfg, inst, name, res, wall)
        _dump(sub / "summary.json", summary)
        overview["strategies"][name] = {k: summary[k] for k in ("status", "final_f", "final_gap", "iterations", "wall_time")}
    rows = max(len(res.trace) for res, _ in results)
    lines = [",".join(["k"] + list(strategies))]
    for k in range(rows):
        cells = [str(k)]
        for res, _ in results:
            cells.append(fmt(res.trace[k].f_value) if k < len(res.trace) else "")
        lines.append(",".join(cells))
    (out_dir / "compare.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    (out_dir / "compare.svg").write_text(
        convergence_chart({n: r.trace for n, (r, _) in zip(strategies, results)}, f"{inst.problem}: comparison"),
        encoding="utf-8")
    _dump(out_dir / "summary.json", overview)
    return 0


def _load_constants(path) -> dict:
    try:
        consts = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("<constants>", f"file {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<constants>", f"invalid JSON: {exc}") from None
    if not isinstance(consts, dict):
        raise ConfigError("<constants>", "must be a JSON object")
    return consts


def _num(consts, key):
    v = consts[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    return float(v)


def run_certificates(trace, consts: dict, tol: float = certs.DEFAULT_TOL):
    """Evaluate requested (or all applicable) certificates; returns (reports, skipped)."""
    requested = consts.get("certificates")
    if requested is not None:
        if not isinstance(requested, list) or not requested:
            raise ConfigError("certificates", "must be a non-empty list of names")
        for name in requested:
            if name not in CERTIFICATE_NAMES:
                raise ConfigError("certificates", f"unknown certificate {name!r}")
            missing = [c for c in _REQUIRES[name] if consts.get(c) is None]
            if missing:
                raise ConfigError(name, f"missing constants for certificate {name!r}: {', '.join(missing)}")
        names = list(requested)
        skipped = {}
    else:
        names, skipped = [], {}
        for name in CERTIFICATE_NAMES:
            missing = [c for c in _REQUIRES[name] if consts.get(c) is None]
            if missing:
                skipped[name] = "missing " + ", ".join(missing)
            else:
                names.append(name)
        if not names:
            raise ConfigError("<constants>", "no certificate is applicable: " + "; ".join(
                f"{n} needs {', '.join(_REQUIRES[n])}" for n in CERTIFICATE_NAMES))
    reports = []
    try:
        for name in names:
            if name == "sublinear":
                reports.append(certs.cert_sublinear(trace, _num(consts, "fstar"), _num(consts, "D"), tol))
            elif name == "halving":
                reports.append(certs.cert_halving(trace, _num(consts, "fstar"), _num(consts, "D"), tol))
            elif name == "product":
                reports.append(certs.cert_product(trace, _num(consts, "fstar"), _num(consts, "Delta"),
                                                  _num(consts, "D"), tol))
            elif name == "pl":
                pl = consts["pl"]
                if not isinstance(pl, dict) or any(pl.get(key) is None for key in ("c", "r")):
                    raise ConfigError("pl", "expected an object with c, r and optionally D")
                D = pl.get("D", consts.get("D"))
                if D is None:
                    raise ConfigError("pl.D", "missing constants for certificate 'pl': D")
                params = certs.PLParams(float(pl["c"]), float(pl["r"]), float(D))
                reports.append(certs.cert_pl(trace, _num(consts, "fstar"), params, tol))
            elif name == "backtracks":
                reports.append(certs.cert_backtracks(trace, _num(consts, "L_true"), _num(consts, "L_init")))
            elif name == "gap":
                reports.append(certs.cert_gap(trace, _num(consts, "fstar"), tol))
    except ContractError as exc:
        raise ConfigError("<constants>", str(exc)) from None
    return reports, skipped


def cmd_certify(trace_path, constants_path, out=None) -> int:
    try:
        text = Path(trace_path).read_text(encoding="ascii")
    except OSError as exc:
        raise ConfigError("<trace>", f"cannot read {str(trace_path)!r}: {exc.strerror}") from None
    try:
        trace = parse_trace(text)
    except ValueError as exc:
        raise ConfigError("<trace>", str(exc)) from None
    consts = _load_constants(constants_path)
    tol = consts.get("tol", certs.DEFAULT_TOL)
    reports, skipped = run_certificates(trace, consts, float(tol))
    holds = all(r.holds for r in reports)
    out_path = Path(out) if out is not None else Path(trace_path).parent / "certificates.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _dump(out_path, {
        "trace": str(trace_path),
        "all_hold": holds,
        "certificates": [r.to_dict() for r in reports],
        "skipped": skipped,
    })
    for r in reports:
        state = "holds" if r.holds else f"VIOLATED at k={r.first_violation_k}"
        print(f"{r.name}: {state} (worst margin {r.worst_margin:.3e}, {r.checked} checks)")
    return 0 if holds else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fw", description="Frank-Wolfe experiment runner")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one configured instance")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override the data seed")
    r.add_argument("--out", help="override output_dir")

    c = sub.add_parser("compare", help="run several strategies on the same instance")
    c.add_argument("config")
    c.add_argument("--strategies", default="adaptive,decreasing,lipschitz",
                   help="comma-separated list from adaptive, decreasing, exact, armijo, lipschitz")
    c.add_argument("--seed", type=int)
    c.add_argument("--out")

    v = sub.add_parser("certify", help="check convergence certificates on a trace")
    v.add_argument("trace")
    v.add_argument("constants")
    v.add_argument("--out", help="report path (default: certificates.json next to the trace)")
    return p


def _setup_logging() -> None:
    level = os.environ.get("FW_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.seed, args.out)
        if args.command == "compare":
            strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
            return cmd_compare(args.config, strategies, args.seed, args.out)
        return cmd_certify(args.trace, args.constants, args.out)
    except (ConfigError, ContractError) as exc:
        print(f"fw: error: {exc}", file=sys.stderr)
        return 2
    except PowerIterationError as exc:
        print(f"fw: solver failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
