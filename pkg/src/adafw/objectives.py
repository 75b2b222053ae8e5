"""Objectives of the numerical experiments, with values and (sub)gradients.

Each ``*_eval`` function is the computational kernel and returns
``(value, gradient)``; the classes bind problem data to a kernel and carry
what the solver and certificates need (``dim``, ``known_fstar``,
``lipschitz``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from .core import ContractError, Point

LOGIT_CLIP = 30.0
PROB_CLIP = 1e-12
KINK_TOL = 1e-15


@dataclass(frozen=True)
class ObservedEntries:
    """Observed matrix entries in coordinate form (0-based indices)."""

    rows: int
    cols: int
    i: np.ndarray
    j: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=np.int64)
        j = np.asarray(self.j, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.float64)
        if not (i.shape == j.shape == v.shape and i.ndim == 1):
            raise ContractError("entry arrays must be 1-D and of equal length")
        if i.size and (i.min() < 0 or i.max() >= self.rows or j.min() < 0 or j.max() >= self.cols):
            raise ContractError("entry index out of range")
        if np.unique(i * self.cols + j).size != i.size:
            raise ContractError("duplicate entry")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return int(self.i.size)


@dataclass(frozen=True)
class LabeledDataset:
    """Dense feature matrix with binary labels.

    ``labels`` are in {0, 1}; ``raw_labels`` keep the file's original
    values (e.g. +-1 for LibSVM) for the SVM dual.
    """

    features: np.ndarray
    labels: np.ndarray
    raw_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ContractError("feature rows and label count differ")

    def signed_labels(self) -> np.ndarray:
        return np.where(self.labels > 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def fts_eval(x: Point, anchors: np.ndarray) -> Tuple[float, Point]:
    """Sum of Euclidean distances to the anchors (Fermat-Torricelli-Steiner).

    At an anchor the corresponding term contributes 0 to the subgradient.
    """
    diff = x[None, :] - anchors
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    active = dist > KINK_TOL
    grad = (diff[active] / dist[active, None]).sum(axis=0)
    if not active.any():
        grad = np.zeros_like(x)
    return float(dist.sum()), grad


def maxball_eval(x: Point, anchors: np.ndarray) -> Tuple[float, Point]:
    """Largest squared distance to an anchor; the lowest maximizing index wins."""
    diff = x[None, :] - anchors
    sq = np.einsum("ij,ij->i", diff, diff)
    k = int(np.argmax(sq))
    return float(sq[k]), 2.0 * diff[k]


def wquad_eval(x: Point, a: np.ndarray) -> Tuple[float, Point]:
    return float(a @ (x * x)), 2.0 * a * x


def matcomp_eval(X: Point, obs: ObservedEntries) -> Tuple[float, Point]:
    if X.shape != (obs.rows, obs.cols):
        raise ContractError(f"expected a {obs.rows}x{obs.cols} matrix, got {X.shape}")
    resid = X[obs.i, obs.j] - obs.values
    grad = np.zeros_like(X)
    grad[obs.i, obs.j] = 2.0 * resid
    return float(resid @ resid), grad


def svmdual_eval(x: Point, A: np.ndarray) -> Tuple[float, Point]:
    """``||A x||^2`` and its gradient ``2 A^T A x`` without forming ``A^T A``."""
    Ax = A @ x
    return float(Ax @ Ax), 2.0 * (A.T @ Ax)


def logreg_eval(w: Point, X: np.ndarray, y: np.ndarray) -> Tuple[float, Point]:
    """Mean binary cross-entropy of a logistic model and its gradient."""
    z = np.clip(X @ w, -LOGIT_CLIP, LOGIT_CLIP)
    p = 1.0 / (1.0 + np.exp(-z))
    pc = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    m = X.shape[0]
    value = -float(np.sum(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))) / m
    return value, X.T @ (p - y) / m


# ---------------------------------------------------------------------------
# objective objects
# ---------------------------------------------------------------------------

class _Objective:
    known_fstar: Optional[float] = None
    smooth = True

    def eval(self, x: Point) -> Tuple[float, Point]:
        raise NotImplementedError

    def value(self, x: Point) -> float:
        return self.eval(x)[0]

    @property
    def lipschitz(self) -> Optional[float]:
        """Gradient-Lipschitz constant in the Euclidean norm, if known."""
        return None


class FermatTorricelli(_Objective):
    smooth = False

    def __init__(self, anchors):
        self.anchors = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
        self.dim = self.anchors.shape[1]

    def eval(self, x):
        return fts_eval(x, self.anchors)

    def value(self, x):
        diff = x[None, :] - self.anchors
        return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).sum())


class MaxBall(_Objective):
    smooth = False

    def __init__(self, anchors):
        self.anchors = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
        self.dim = self.anchors.shape[1]

    def eval(self, x):
        return maxball_eval(x, self.anchors)

    def value(self, x):
        diff = x[None, :] - self.anchors
        return float(np.einsum("ij,ij->i", diff, diff).max())


class WeightedQuadratic(_Objective):
    """``sum_i a_i x_i^2``; ``known_fstar`` is 0, valid whenever 0 is feasible."""

    def __init__(self, a, known_fstar: Optional[float] = 0.0):
        self.a = np.asarray(a, dtype=np.float64)
        if self.a.ndim != 1 or not np.all(self.a > 0):
            raise ContractError("weights must be a positive vector")
        self.dim = self.a.size
        self.known_fstar = known_fstar

    def eval(self, x):
        return wquad_eval(x, self.a)

    def value(self, x):
        return float(self.a @ (x * x))

    @property
    def lipschitz(self):
        return 2.0 * float(self.a.max())


class MatrixCompletion(_Objective):
    def __init__(self, obs: ObservedEntries):
        self.obs = obs
        self.shape = (obs.rows, obs.cols)
        self.dim = obs.rows * obs.cols

    def eval(self, X):
        return matcomp_eval(X, self.obs)

    def value(self, X):
        resid = X[self.obs.i, self.obs.j] - self.obs.values
        return float(resid @ resid)

    @property
    def lipschitz(self):
        return 2.0


class SvmDual(_Objective):
    def __init__(self, A):
        self.A = np.asarray(A, dtype=np.float64)
        self.dim = self.A.shape[1]

    @classmethod
    def from_dataset(cls, data: LabeledDataset) -> "SvmDual":
        """Build ``A`` whose columns are ``y_i p_i`` with labels in {-1, +1}."""
        return cls((data.features * data.signed_labels()[:, None]).T)

    def eval(self, x):
        return svmdual_eval(x, self.A)

    def value(self, x):
        Ax = self.A @ x
        return float(Ax @ Ax)

    @cached_property
    def _spectral_sq(self) -> float:
        return float(np.linalg.norm(self.A, 2)) ** 2

    @property
    def lipschitz(self):
        return 2.0 * self._spectral_sq


class LogisticRegression(_Objective):
    def __init__(self, data: LabeledDataset):
        self.X = np.asarray(data.features, dtype=np.float64)
        self.y = np.asarray(data.labels, dtype=np.float64)
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ContractError("logistic labels must be 0 or 1")
        self.dim = self.X.shape[1]

    def eval(self, w):
        return logreg_eval(w, self.X, self.y)

    @cached_property
    def _spectral_sq(self) -> float:
        return float(np.linalg.norm(self.X, 2)) ** 2

    @property
    def lipschitz(self):
        return self._spectral_sq / (4.0 * self.X.shape[0])
