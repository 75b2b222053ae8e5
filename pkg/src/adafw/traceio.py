"""Trace persistence.

``trace.csv`` has the fixed header ``k,f,gap,L,alpha,n_checks,d_norm`` and
writes reals with 17 significant digits, which round-trips 64-bit floats.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import List, Sequence

from .core import IterateRecord

TRACE_HEADER = ("k", "f", "gap", "L", "alpha", "n_checks", "d_norm")


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def trace_to_csv(trace: Sequence[IterateRecord]) -> str:
    lines = [",".join(TRACE_HEADER)]
    for r in trace:
        lines.append(",".join([
            str(r.k), fmt(r.f_value), fmt(r.dual_gap), fmt(r.L_k),
            fmt(r.alpha_k), str(r.n_checks), fmt(r.d_norm),
        ]))
    return "\n".join(lines) + "\n"


def write_trace(path, trace: Sequence[IterateRecord]) -> None:
    Path(path).write_text(trace_to_csv(trace), encoding="ascii")


def parse_trace(text: str) -> List[IterateRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
        raise ValueError(f"trace header must be {','.join(TRACE_HEADER)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(TRACE_HEADER):
            raise ValueError(f"line {lineno}: expected {len(TRACE_HEADER)} fields")
        try:
            out.append(IterateRecord(
                int(row[0]), float(row[1]), float(row[2]), float(row[3]),
                float(row[4]), int(row[5]), float(row[6]),
            ))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def read_trace(path) -> List[IterateRecord]:
    return parse_trace(Path(path).read_text(encoding="ascii"))
