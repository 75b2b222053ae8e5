"""Frank-Wolfe solvers: the classical method with fixed step rules and the
adaptive method that estimates the smoothness constant by backtracking.

Trace layout: one :class:`~adafw.core.IterateRecord` per step taken. A run
that stops before its budget (gap reached, degenerate direction, stall)
appends a final row for the last iterate; a stall row records the rejected
step, a converged row has ``n_checks == 0``. A run that exhausts its budget
``N`` records exactly ``N`` rows and reports the value and gap of ``x_N`` on
the result only, so a trace never exceeds ``N`` rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Tuple, Union

from .core import ContractError, IterateRecord, Point, as_point, convex_combine, inner, norm2

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEGENERATE_NORM = 1e-15
ARMIJO_MAX_REDUCTIONS = 100


class Status(str, Enum):
    GAP_CONVERGED = "GapConverged"
    ITER_BUDGET = "IterBudget"
    STALLED = "Stalled"
    DEGENERATE_DIRECTION = "DegenerateDirection"


class DegenerateDirection(ArithmeticError):
    """The Frank-Wolfe direction has zero length."""


@dataclass(frozen=True)
class Decreasing:
    name = "decreasing"


@dataclass(frozen=True)
class ExactLineSearch:
    name = "exact"


@dataclass(frozen=True)
class Armijo:
    delta: float = 0.5
    gamma: float = 0.25
    name = "armijo"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ContractError(f"Armijo delta must be in (0, 1), got {self.delta!r}")
        if not 0.0 < self.gamma < 0.5:
            raise ContractError(f"Armijo gamma must be in (0, 1/2), got {self.gamma!r}")


@dataclass(frozen=True)
class Lipschitz:
    L: float
    name = "lipschitz"

    def __post_init__(self):
        if not self.L > 0:
            raise ContractError(f"Lipschitz constant must be positive, got {self.L!r}")


StepRule = Union[Decreasing, ExactLineSearch, Armijo, Lipschitz]


@dataclass(frozen=True)
class AdaptiveConfig:
    """Parameters of the adaptive method.

    ``L_init`` is the estimate before the first iteration; it is halved at
    the start of every iteration. The three stall guards turn the
    machine-precision stagnation seen on nonsmooth problems into a terminal
    status.
    """

    L_init: float = 1.0
    max_iters: int = 1000
    gap_tol: float = 0.0
    alpha_min: float = 1e-16
    L_max_factor: float = 2.0 ** 60
    max_backtracks_per_iter: int = 200

    def __post_init__(self):
        if not self.L_init > 0:
            raise ContractError("L_init must be positive")
        if self.max_iters < 0:
            raise ContractError("max_iters must be non-negative")
        if self.gap_tol < 0:
            raise ContractError("gap_tol must be non-negative")
        if not (self.alpha_min > 0 and self.L_max_factor > 0 and self.max_backtracks_per_iter > 0):
            raise ContractError("stall guards must be positive")


@dataclass
class SolveResult:
    final_point: Point
    trace: List[IterateRecord] = field(default_factory=list)
    status: Status = Status.ITER_BUDGET
    final_value: float = math.nan
    final_gap: float = math.nan

    @property
    def steps(self) -> List[IterateRecord]:
        return [r for r in self.trace if r.is_step]


def duality_gap(x: Point, grad: Point, oracle) -> Tuple[float, Point]:
    """Frank-Wolfe gap ``max_{s in Q} <grad, x - s>`` and its maximizer."""
    s = oracle.lmo(grad)
    return inner(grad, x - s), s


# ---------------------------------------------------------------------------
# step rules
# ---------------------------------------------------------------------------

def step_decreasing(k: int) -> float:
    if k < 0:
        raise ContractError("iteration index must be non-negative")
    return 2.0 / (k + 2.0)


def step_exact(obj, x: Point, d: Point, alpha_max: float = 1.0) -> float:
    """Golden-section minimization of ``f(x + alpha d)`` over [0, alpha_max].

    The bracket is shrunk to width ``1e-10 * alpha_max``; the endpoints are
    compared against the final midpoint so boundary minima are returned
    exactly.
    """
    if not 0.0 < alpha_max <= 1.0:
        raise ContractError("alpha_max must lie in (0, 1]")
    phi = lambda a: obj.value(x + a * d)  # noqa: E731
    lo, hi = 0.0, alpha_max
    c = hi - GOLDEN * (hi - lo)
    e = lo + GOLDEN * (hi - lo)
    fc, fe = phi(c), phi(e)
    while hi - lo > 1e-10 * alpha_max:
        if fc <= fe:
            hi, e, fe = e, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = phi(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + GOLDEN * (hi - lo)
            fe = phi(e)
    best = 0.5 * (lo + hi)
    fbest = phi(best)
    for a in (0.0, alpha_max):
        fa = phi(a)
        if fa < fbest:
            best, fbest = a, fa
    return best


class ArmijoStep(NamedTuple):
    alpha: float
    trials: int
    satisfied: bool


def step_armijo(obj, x: Point, d: Point, alpha_max: float, delta: float, gamma: float,
                f_x: float = None, grad: Point = None) -> ArmijoStep:
    """Backtrack ``alpha = delta**m * alpha_max`` until sufficient decrease.

    Gives up after 100 reductions and returns the last trial with
    ``satisfied=False``.
    """
    if f_x is None or grad is None:
        f_x, grad = obj.eval(x)
    gd = inner(grad, d)
    if gd > 0:
        raise ContractError("Armijo search needs a descent direction")
    alpha = alpha_max
    for m in range(ARMIJO_MAX_REDUCTIONS + 1):
        if obj.value(x + alpha * d) <= f_x + gamma * alpha * gd:
            return ArmijoStep(alpha, m + 1, True)
        if m < ARMIJO_MAX_REDUCTIONS:
            alpha *= delta
    return ArmijoStep(alpha, ARMIJO_MAX_REDUCTIONS + 1, False)


def step_lipschitz(grad_dot_d: float, d_norm2: float, L: float, alpha_max: float = 1.0) -> float:
    """Minimizer of the quadratic upper model along ``d``, capped at ``alpha_max``."""
    if not L > 0:
        raise ContractError("L must be positive")
    if d_norm2 == 0.0:
        raise DegenerateDirection("zero-length direction")
    return max(0.0, min(-grad_dot_d / (L * d_norm2), alpha_max))


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def _start(oracle, x0) -> Point:
    x = as_point(x0)
    if not oracle.contains(x, 1e-9):
        raise ContractError("starting point is not feasible")
    return x


def classical_fw(obj, oracle, x0: Point, rule: StepRule, max_iters: int,
                 gap_tol: float = 0.0) -> SolveResult:
    """Frank-Wolfe with one of the four classical step rules.

    The ``L_k`` column is 0 except for the Lipschitz rule, and ``n_checks``
    counts objective evaluations spent choosing the step (1 unless Armijo).
    """
    x = _start(oracle, x0)
    result = SolveResult(final_point=x)
    L_col = rule.L if isinstance(rule, Lipschitz) else 0.0
    for k in range(max_iters + 1):
        f, g = obj.eval(x)
        gap, s = duality_gap(x, g, oracle)
        d = s - x
        dn = norm2(d)

        result.final_value, result.final_gap = f, gap

        def stop(status):
            result.trace.append(IterateRecord(k, f, gap, L_col, 0.0, 0, dn))
            result.status = status

        if k == max_iters:
            result.status = Status.ITER_BUDGET
            break
        if gap <= gap_tol:
            stop(Status.GAP_CONVERGED)
            break
        if dn <= DEGENERATE_NORM:
            stop(Status.DEGENERATE_DIRECTION)
            break
        checks = 1
        if isinstance(rule, Decreasing):
            alpha = step_decreasing(k)
        elif isinstance(rule, ExactLineSearch):
            alpha = step_exact(obj, x, d, 1.0)
        elif isinstance(rule, Armijo):
            res = step_armijo(obj, x, d, 1.0, rule.delta, rule.gamma, f_x=f, grad=g)
            checks = res.trials
            if not res.satisfied:
                result.trace.append(IterateRecord(k, f, gap, L_col, 0.0, checks, dn))
                result.status = Status.STALLED
                break
            alpha = res.alpha
        elif isinstance(rule, Lipschitz):
            alpha = step_lipschitz(-gap, dn * dn, rule.L, 1.0)
        else:
            raise ContractError(f"unknown step rule {rule!r}")
        result.trace.append(IterateRecord(k, f, gap, L_col, alpha, checks, dn))
        x = convex_combine(x, s, alpha)
    result.final_point = x
    return result


def adaptive_fw(obj, oracle, cfg: AdaptiveConfig, x0: Point) -> SolveResult:
    """Adaptive Frank-Wolfe with backtracking on the smoothness estimate ``L_k``.

    Each iteration halves the previous estimate, then doubles it until the
    acceptance test for the candidate step holds:

    * ``theta < 1``: sufficient decrease
      ``f(x + theta d) <= f(x) - <g, d>^2 / (2 L ||d||^2)``;
    * ``theta == 1``: quadratic upper bound
      ``f(x + d) <= f(x) + <g, d> + L ||d||^2 / 2``.

    ``s_k`` and ``d_k`` depend only on ``x_k``, so a retry recomputes
    ``theta`` and costs one objective value.
    """
    x = _start(oracle, x0)
    result = SolveResult(final_point=x)
    L_cap = cfg.L_init * cfg.L_max_factor
    L_prev = cfg.L_init
    for k in range(cfg.max_iters + 1):
        f, g = obj.eval(x)
        gap, s = duality_gap(x, g, oracle)
        d = s - x
        dn = norm2(d)

        result.final_value, result.final_gap = f, gap

        def stop(status, L=L_prev, alpha=0.0, checks=0):
            result.trace.append(IterateRecord(k, f, gap, L, alpha, checks, dn))
            result.status = status

        if k == cfg.max_iters:
            result.status = Status.ITER_BUDGET
            break
        if gap <= cfg.gap_tol:
            stop(Status.GAP_CONVERGED)
            break
        if dn <= DEGENERATE_NORM:
            stop(Status.DEGENERATE_DIRECTION)
            break

        gd = -gap
        dn2 = dn * dn
        L = L_prev / 2.0
        checks = 0
        accepted = False
        while True:
            checks += 1
            theta = min(-gd / (L * dn2), 1.0)
            if theta < 1.0:
                x_new = convex_combine(x, s, theta)
                if obj.value(x_new) <= f - gd * gd / (2.0 * L * dn2):
                    accepted = True
            else:
                x_new = s
                if obj.value(x_new) <= f + gd + 0.5 * L * dn2:
                    accepted = True
            if accepted:
                break
            L *= 2.0
            if L > L_cap or checks >= cfg.max_backtracks_per_iter:
                break

        if not accepted:
            log.info("iteration %d: no acceptable L_k below the cap, stalling", k)
            stop(Status.STALLED, L=L, checks=checks)
            break
        alpha = theta if theta < 1.0 else 1.0
        if alpha < cfg.alpha_min:
            log.info("iteration %d: step %.3e below alpha_min, stalling", k, alpha)
            stop(Status.STALLED, L=L, alpha=alpha, checks=checks)
            break
        result.trace.append(IterateRecord(k, f, gap, L, alpha, checks, dn))
        log.debug("k=%d f=%.17g gap=%.3e L=%.3e alpha=%.3e checks=%d", k, f, gap, L, alpha, checks)
        x = x_new
        L_prev = L
    result.final_point = x
    return result
