"""Linear minimization oracles for the feasible sets used in the experiments.

Every oracle returns a point of ``argmin_{z in Q} <g, z>``. The argmin is
set-valued in general; ties are always broken towards the lowest index so
that traces are reproducible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .core import ContractError, Point

log = logging.getLogger(__name__)


class SetKind(str, Enum):
    L1_BALL = "L1Ball"
    L2_BALL = "L2Ball"
    LINF_BALL = "LInfBall"
    SIMPLEX = "Simplex"
    NUCLEAR_BALL = "NuclearBall"


@dataclass(frozen=True)
class FeasibleSetSpec:
    kind: SetKind
    dim: int
    radius: float = 1.0
    shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SetKind(self.kind))
        if not self.radius > 0:
            raise ContractError(f"radius must be positive, got {self.radius!r}")
        if self.kind is SetKind.NUCLEAR_BALL:
            if self.shape is None:
                raise ContractError("NuclearBall requires a matrix shape")
            m, n = self.shape
            if m * n != self.dim:
                raise ContractError(f"shape {self.shape} does not match dim {self.dim}")
        elif self.dim < 1:
            raise ContractError("dim must be at least 1")


@dataclass(frozen=True)
class PowerIterConfig:
    """Power iteration on ``G^T G`` for the top singular pair.

    Stops when successive Rayleigh quotients differ by a relative ``tol``.
    ``max_iter=None`` means ``10 * max(m, n) + 200``. A start vector with no
    component in the row space is replaced once by one drawn from
    ``seed + 1``. When the iteration budget runs out (nearly repeated top
    singular values) the pair is taken from a dense SVD instead, unless
    ``dense_fallback`` is off, in which case :class:`PowerIterationError`
    is raised.
    """

    tol: float = 1e-10
    max_iter: Optional[int] = None
    seed: int = 0
    dense_fallback: bool = True


class PowerIterationError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(last relative Rayleigh-quotient change {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


# ---------------------------------------------------------------------------
# closed-form oracles
# ---------------------------------------------------------------------------

def lmo_l1(g: Point, r: float) -> Point:
    g = np.asarray(g, dtype=np.float64)
    z = np.zeros_like(g)
    i = int(np.argmax(np.abs(g)))
    if g[i] == 0.0:
        # every vertex is optimal
        z[0] = r
    else:
        z[i] = -r * np.sign(g[i])
    return z


def lmo_l2(g: Point, r: float) -> Point:
    g = np.asarray(g, dtype=np.float64)
    nrm = np.linalg.norm(g)
    if nrm == 0.0:
        return np.zeros_like(g)
    return (-r / nrm) * g


def lmo_linf(g: Point, r: float) -> Point:
    g = np.asarray(g, dtype=np.float64)
    return -r * np.sign(g)


def lmo_simplex(g: Point) -> Point:
    g = np.asarray(g, dtype=np.float64)
    z = np.zeros_like(g)
    z[int(np.argmin(g))] = 1.0
    return z


def _power(G: np.ndarray, v: np.ndarray, tol: float, max_iter: int):
    """Run power iteration from unit ``v``; returns ``(v, converged, residual)``.

    ``converged`` is None when ``v`` has no component in the row space.
    """
    rq_prev = None
    residual = math.inf
    for _ in range(max_iter):
        w = G @ v
        rq = float(w @ w)
        z = G.T @ w
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return v, None, residual
        v = z / nz
        if rq_prev is not None:
            residual = abs(rq - rq_prev) / rq
            if residual <= tol:
                return v, True, residual
        rq_prev = rq
    return v, False, residual


def top_singular_pair(G: Point, cfg: PowerIterConfig = PowerIterConfig()):
    """Top singular triple ``(u, sigma, v)`` of a nonzero ``G``."""
    G = np.asarray(G, dtype=np.float64)
    m, n = G.shape
    max_iter = cfg.max_iter if cfg.max_iter is not None else 10 * max(m, n) + 200
    for seed in (cfg.seed, cfg.seed + 1):
        v = np.random.default_rng(seed).standard_normal(n)
        v /= np.linalg.norm(v)
        v, converged, residual = _power(G, v, cfg.tol, max_iter)
        if converged is None:
            continue
        if converged:
            w = G @ v
            sigma = float(np.linalg.norm(w))
            return w / sigma, sigma, v
        break
    if not cfg.dense_fallback:
        raise PowerIterationError(residual, max_iter)
    log.debug("power iteration stagnated at %.3e after %d iterations; using dense SVD", residual, max_iter)
    U, S, Vt = np.linalg.svd(G, full_matrices=False)
    return U[:, 0], float(S[0]), Vt[0]


def lmo_nuclear(G: Point, delta: float, pw: PowerIterConfig = PowerIterConfig()) -> Point:
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise ContractError("nuclear-norm oracle needs a matrix-shaped gradient")
    if not np.any(G):
        return np.zeros_like(G)
    u, _, v = top_singular_pair(G, pw)
    return -delta * np.outer(u, v)


# ---------------------------------------------------------------------------
# oracle objects
# ---------------------------------------------------------------------------

class L1Ball:
    def __init__(self, radius: float, dim: int):
        self.radius = float(radius)
        self.dim = int(dim)
        self.diameter = 2.0 * self.radius

    def lmo(self, g: Point) -> Point:
        return lmo_l1(g, self.radius)

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return p.shape == (self.dim,) and float(np.abs(p).sum()) <= self.radius + tol


class L2Ball:
    def __init__(self, radius: float, dim: int):
        self.radius = float(radius)
        self.dim = int(dim)
        self.diameter = 2.0 * self.radius

    def lmo(self, g: Point) -> Point:
        return lmo_l2(g, self.radius)

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return p.shape == (self.dim,) and float(np.linalg.norm(p)) <= self.radius + tol


class LInfBall:
    def __init__(self, radius: float, dim: int):
        self.radius = float(radius)
        self.dim = int(dim)
        self.diameter = 2.0 * self.radius * math.sqrt(self.dim)

    def lmo(self, g: Point) -> Point:
        return lmo_linf(g, self.radius)

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return p.shape == (self.dim,) and float(np.abs(p).max()) <= self.radius + tol


class Simplex:
    """Unit simplex ``{x >= 0, sum(x) = 1}``."""

    radius = 1.0

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.diameter = math.sqrt(2.0) if self.dim > 1 else 0.0

    def lmo(self, g: Point) -> Point:
        return lmo_simplex(g)

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return (
            p.shape == (self.dim,)
            and float(p.min()) >= -tol
            and abs(float(p.sum()) - 1.0) <= tol
        )


class NuclearBall:
    """Matrices with nuclear norm at most ``radius``."""

    def __init__(self, radius: float, shape: Tuple[int, int], power: PowerIterConfig = PowerIterConfig()):
        self.radius = float(radius)
        self.shape = (int(shape[0]), int(shape[1]))
        self.dim = self.shape[0] * self.shape[1]
        self.power = power
        self.diameter = 2.0 * self.radius

    def lmo(self, g: Point) -> Point:
        return lmo_nuclear(g, self.radius, self.power)

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        if p.shape != self.shape:
            return False
        return float(np.linalg.svd(p, compute_uv=False).sum()) <= self.radius + tol


def set_diameter(spec: FeasibleSetSpec) -> float:
    """Euclidean (Frobenius) diameter of the set described by ``spec``."""
    if spec.kind in (SetKind.L1_BALL, SetKind.L2_BALL, SetKind.NUCLEAR_BALL):
        return 2.0 * spec.radius
    if spec.kind is SetKind.LINF_BALL:
        return 2.0 * spec.radius * math.sqrt(spec.dim)
    return math.sqrt(2.0) if spec.dim > 1 else 0.0


def make_oracle(spec: FeasibleSetSpec, power: PowerIterConfig = PowerIterConfig()):
    if spec.kind is SetKind.L1_BALL:
        return L1Ball(spec.radius, spec.dim)
    if spec.kind is SetKind.L2_BALL:
        return L2Ball(spec.radius, spec.dim)
    if spec.kind is SetKind.LINF_BALL:
        return LInfBall(spec.radius, spec.dim)
    if spec.kind is SetKind.SIMPLEX:
        return Simplex(spec.dim)
    return NuclearBall(spec.radius, spec.shape, power)
