"""Seeded instance generators and dataset parsers.

Random numbers come from :class:`SplitMix64`, a counter-based 64-bit
generator, so instances are bit-identical across platforms and easy to
reproduce in other languages:

* state ``s_i = seed + i * 0x9E3779B97F4A7C15 (mod 2**64)`` for the i-th
  draw (``i`` starting at 1), mixed by the SplitMix64 finalizer;
* uniforms are ``((z >> 11) + 1) * 2**-53``, which lie in (0, 1];
* standard normals use Box-Muller on successive uniform pairs
  ``(u1, u2)`` giving ``sqrt(-2 ln u1) * cos(2 pi u2)`` and
  ``sqrt(-2 ln u1) * sin(2 pi u2)`` in that order.

Generators build arrays in row-major order and consume the stream in the
order documented on each function.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from .objectives import LabeledDataset, ObservedEntries

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


class ParseError(ValueError):
    """Malformed input; ``line`` (and ``column`` where relevant) are 1-based."""

    def __init__(self, message: str, line: int, column: Optional[str] = None):
        where = f"line {line}" + (f", column {column!r}" if column is not None else "")
        super().__init__(f"{where}: {message}")
        self.message = message
        self.line = line
        self.column = column


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + idx * _GAMMA
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
            z = z ^ (z >> np.uint64(31))
        return z

    def uniform(self, n: int) -> np.ndarray:
        z = self.next_u64(n)
        return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        rad = np.sqrt(-2.0 * np.log(u[:, 0]))
        ang = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = rad * np.cos(ang)
        out[:, 1] = rad * np.sin(ang)
        return out.ravel()[:n]

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """Integers uniform on ``[low, high]`` via ``floor(u * span)``."""
        span = high - low + 1
        k = np.floor((1.0 - self.uniform(n)) * span).astype(np.int64)
        return low + np.minimum(k, span - 1)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_gaussian_anchors(N: int, n: int, seed: int) -> np.ndarray:
    """``N`` standard-normal anchor points in ``R^n`` as an ``(N, n)`` array."""
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    return SplitMix64(seed).normal(N * n).reshape(N, n)


def gen_weights(n: int, seed: int, low: int = 1, high: int = 10) -> np.ndarray:
    """Weights drawn uniformly from the integers ``low..high``."""
    return SplitMix64(seed).integers(low, high, n).astype(np.float64)


@dataclass(frozen=True)
class SnrModelParams:
    m: int
    n: int
    r: int
    p: float
    snr: float

    def __post_init__(self):
        if min(self.m, self.n, self.r) < 1 or self.r > min(self.m, self.n):
            raise ValueError("need 1 <= r <= min(m, n)")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if not self.snr > 0:
            raise ValueError("snr must be positive")


def gen_lowrank_observed(params: SnrModelParams, seed: int) -> Tuple[ObservedEntries, dict]:
    """Noisy low-rank matrix ``w1 U V^T + w2 E`` observed entrywise with probability ``p``.

    Stream order: U (m x r), V (n x r), E (m x n), then one uniform per
    entry in row-major order; an entry is observed when its uniform is
    below ``p``.
    """
    m, n, r = params.m, params.n, params.r
    rng = SplitMix64(seed)
    U = rng.normal(m * r).reshape(m, r)
    V = rng.normal(n * r).reshape(n, r)
    E = rng.normal(m * n).reshape(m, n)
    signal = U @ V.T
    w1 = 1.0 / np.linalg.norm(signal)
    w2 = 0.0 if math.isinf(params.snr) else 1.0 / (params.snr * np.linalg.norm(E))
    X = w1 * signal + w2 * E
    mask = rng.uniform(m * n).reshape(m, n) < params.p
    i, j = np.nonzero(mask)
    if i.size == 0:
        raise ValueError("no entries observed; use another seed or a larger p")
    obs = ObservedEntries(m, n, i, j, X[i, j])
    meta = {"omega1": float(w1), "omega2": float(w2), "n_observed": int(i.size)}
    return obs, meta


def gen_classification(m: int, d: int, seed: int, noise: float = 0.5) -> LabeledDataset:
    """Gaussian points labelled by a random hyperplane plus Gaussian noise.

    Stream order: features (m x d), hyperplane (d), noise (m). Labels are
    1 where ``p_i . w + noise * e_i > 0`` and 0 otherwise.
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    rng = SplitMix64(seed)
    X = rng.normal(m * d).reshape(m, d)
    w = rng.normal(d)
    e = rng.normal(m)
    y = (X @ w + noise * e > 0).astype(np.int64)
    return LabeledDataset(X, y, np.where(y > 0, 1.0, -1.0))


# ---------------------------------------------------------------------------
# parsers and writers
# ---------------------------------------------------------------------------

Text = Union[str, bytes, Iterable[str]]


def _lines(text: Text):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if isinstance(text, str):
        text = io.StringIO(text)
    for lineno, line in enumerate(text, start=1):
        yield lineno, line.rstrip("\r\n")


_FEATURE = re.compile(r"^(\d+):(\S+)$")


def parse_libsvm(text: Text) -> LabeledDataset:
    """Parse ``<label> <idx>:<val> ...`` lines with 1-based ascending indices.

    Labels map -1 -> 0 and +1 -> 1 (any positive value counts as +1); the
    original labels are kept in ``raw_labels``.
    """
    labels, rows = [], []
    dim = 0
    for lineno, line in _lines(text):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"malformed label {tokens[0]!r}", lineno) from None
        feats = {}
        last = 0
        for tok in tokens[1:]:
            match = _FEATURE.match(tok)
            if match is None:
                raise ParseError(f"malformed token {tok!r}", lineno)
            idx = int(match.group(1))
            if idx < 1:
                raise ParseError(f"index {idx} < 1", lineno)
            if idx == last:
                raise ParseError(f"duplicate index {idx}", lineno)
            if idx < last:
                raise ParseError(f"non-ascending index {idx}", lineno)
            try:
                val = float(match.group(2))
            except ValueError:
                raise ParseError(f"malformed value in {tok!r}", lineno) from None
            if not math.isfinite(val):
                raise ParseError(f"non-finite value in {tok!r}", lineno)
            feats[idx] = val
            last = idx
        dim = max(dim, last)
        labels.append(label)
        rows.append(feats)
    X = np.zeros((len(rows), dim))
    for r, feats in enumerate(rows):
        for idx, val in feats.items():
            X[r, idx - 1] = val
    raw = np.asarray(labels, dtype=np.float64)
    return LabeledDataset(X, (raw > 0).astype(np.int64), raw)


def write_libsvm(data: LabeledDataset) -> str:
    raw = data.raw_labels if data.raw_labels is not None else np.where(data.labels > 0, 1.0, -1.0)
    out = []
    for label, row in zip(raw, data.features):
        parts = ["%+d" % int(label) if float(label).is_integer() else repr(float(label))]
        parts += [f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0.0]
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def parse_movielens(text: Text, column_cap: Optional[int] = None) -> ObservedEntries:
    """Parse MovieLens ``u.data`` lines ``user<TAB>item<TAB>rating<TAB>timestamp``.

    ``column_cap`` keeps only items with id at most the cap; the matrix
    shape is taken from the largest retained ids.
    """
    ii, jj, vv = [], [], []
    seen = set()
    for lineno, line in _lines(text):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno)
        try:
            user, item, rating, _ = (int(f) for f in fields)
        except ValueError:
            raise ParseError("non-integer field", lineno) from None
        if user < 1 or item < 1:
            raise ParseError("ids must be at least 1", lineno)
        if not 1.0 <= rating <= 5.0:
            raise ParseError(f"rating {fields[2]} outside [1, 5]", lineno)
        if column_cap is not None and item > column_cap:
            continue
        if (user, item) in seen:
            raise ParseError(f"duplicate entry ({user}, {item})", lineno)
        seen.add((user, item))
        ii.append(user - 1)
        jj.append(item - 1)
        vv.append(float(rating))
    rows = max(ii) + 1 if ii else 0
    cols = max(jj) + 1 if jj else 0
    return ObservedEntries(rows, cols, np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64), np.array(vv))


def write_movielens(obs: ObservedEntries, timestamp: int = 0) -> str:
    lines = []
    for i, j, v in zip(obs.i, obs.j, obs.values):
        rating = str(int(v)) if float(v).is_integer() else repr(float(v))
        lines.append(f"{i + 1}\t{j + 1}\t{rating}\t{timestamp}")
    return "\n".join(lines) + "\n"


def parse_csv_labeled(text: Text, label_column: str) -> LabeledDataset:
    """Comma-separated file with a header row; ``label_column`` holds 0/1 labels."""
    lines = ((n, ln) for n, ln in _lines(text) if ln.strip())
    try:
        _, header_line = next(lines)
    except StopIteration:
        raise ParseError("missing header", 1) from None
    header = [h.strip() for h in header_line.split(",")]
    if label_column not in header:
        raise ParseError(f"label column {label_column!r} not in header", 1)
    li = header.index(label_column)
    feats, labels = [], []
    for lineno, line in lines:
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        row = []
        for name, cell in zip(header, cells):
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"non-numeric cell {cell.strip()!r}", lineno, name) from None
        label = row.pop(li)
        if label not in (0.0, 1.0):
            raise ParseError(f"label {cells[li].strip()!r} not in {{0, 1}}", lineno, label_column)
        feats.append(row)
        labels.append(int(label))
    X = np.array(feats, dtype=np.float64).reshape(len(feats), len(header) - 1)
    y = np.array(labels, dtype=np.int64)
    return LabeledDataset(X, y, y.astype(np.float64))


def write_csv_labeled(data: LabeledDataset, feature_names, label_column: str) -> str:
    lines = [",".join(list(feature_names) + [label_column])]
    for row, y in zip(data.features, data.labels):
        lines.append(",".join([repr(float(v)) for v in row] + [str(int(y))]))
    return "\n".join(lines) + "\n"
