"""Shared numeric vocabulary: points, inner products and solver contracts.

A point is a float64 numpy array. Vector problems use 1-D arrays, matrix
problems use C-ordered 2-D arrays, so every solver path is shape-agnostic and
only code that needs the matrix structure looks at ``x.shape``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np
from numpy.typing import NDArray

Point = NDArray[np.float64]


class ContractError(ValueError):
    """Raised when an operation is called outside its documented domain."""


def as_point(x, shape: Optional[Tuple[int, ...]] = None) -> Point:
    """Return ``x`` as a finite C-ordered float64 array (copying if needed)."""
    p = np.ascontiguousarray(x, dtype=np.float64)
    if shape is not None and p.shape != tuple(shape):
        raise ContractError(f"expected shape {tuple(shape)}, got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ContractError("point has non-finite coordinates")
    return p


def _check_same(a: Point, b: Point) -> None:
    if np.shape(a) != np.shape(b):
        raise ContractError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def inner(a: Point, b: Point) -> float:
    """Euclidean (Frobenius for matrices) inner product."""
    _check_same(a, b)
    return float(np.vdot(a, b))


def norm2(a: Point) -> float:
    return float(np.linalg.norm(np.ravel(a)))


def convex_combine(x: Point, s: Point, alpha: float) -> Point:
    """Return ``(1 - alpha) * x + alpha * s`` for ``alpha`` in [0, 1]."""
    _check_same(x, s)
    if not 0.0 <= alpha <= 1.0:
        raise ContractError(f"alpha must lie in [0, 1], got {alpha!r}")
    if alpha == 0.0:
        return np.array(x, dtype=np.float64)
    if alpha == 1.0:
        return np.array(s, dtype=np.float64)
    return (1.0 - alpha) * x + alpha * s


class Objective(Protocol):
    """Convex objective exposing its value and a (sub)gradient.

    ``eval`` must be deterministic and return a gradient with the same shape
    as its argument. ``known_fstar`` is the optimal value over the feasible
    set when it is known analytically, else ``None``.
    """

    dim: int
    known_fstar: Optional[float]

    def value(self, x: Point) -> float: ...

    def eval(self, x: Point) -> Tuple[float, Point]: ...


class LmoOracle(Protocol):
    """Feasible set accessed through linear minimization."""

    dim: int
    diameter: float

    def lmo(self, g: Point) -> Point: ...

    def contains(self, p: Point, tol: float = 1e-9) -> bool: ...


@dataclass(frozen=True)
class IterateRecord:
    """One row of a solver trace.

    ``f_value`` and ``dual_gap`` are measured at the iterate ``x_k``; ``L_k``,
    ``alpha_k`` and ``n_checks`` describe the step taken from it. A row with
    ``n_checks == 0`` is a terminal evaluation where no step was taken.
    """

    k: int
    f_value: float
    dual_gap: float
    L_k: float
    alpha_k: float
    n_checks: int
    d_norm: float

    @property
    def is_step(self) -> bool:
        return self.n_checks > 0
