"""Numerical certificates for the convergence bounds of the adaptive method.

Every certificate is a pure function of a recorded trace and analytic
constants. ``worst_margin`` is the minimum over checked indices of
``bound - observed``; a certificate holds when that margin is at least
``-tol``. Residuals are ``h_k = f(x_k) - f*`` taken from trace row ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .core import ContractError, IterateRecord

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CertificateReport:
    name: str
    holds: bool
    worst_margin: float
    first_violation_k: Optional[int] = None
    tol: float = DEFAULT_TOL
    checked: int = 0
    parts: Tuple["CertificateReport", ...] = ()
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "holds": self.holds,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
            "first_violation_k": self.first_violation_k,
            "tol": self.tol,
            "checked": self.checked,
        }
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        if self.notes:
            out["notes"] = dict(self.notes)
        return out


@dataclass(frozen=True)
class PLParams:
    """Gradient-dominance constant ``c``, interior-ball radius ``r`` and diameter ``D``."""

    c: float
    r: float
    D: float

    def __post_init__(self):
        if not (self.c > 0 and self.r > 0 and self.D > 0):
            raise ContractError("PL parameters must be positive")
        if self.r > self.D / 2 * (1 + 1e-12):
            raise ContractError("interior radius cannot exceed half the diameter")


class _Tally:
    """Accumulates (k, bound, observed) triples into a report."""

    def __init__(self, name: str, tol: float):
        self.name = name
        self.tol = tol
        self.worst = math.inf
        self.first: Optional[int] = None
        self.count = 0

    def add(self, k: int, bound: float, observed: float) -> None:
        margin = float(bound - observed)
        self.count += 1
        if margin < self.worst:
            self.worst = margin
        if margin < -self.tol and self.first is None:
            self.first = k

    def report(self, **notes) -> CertificateReport:
        return CertificateReport(self.name, self.first is None, self.worst, self.first,
                                 self.tol, self.count, notes=notes)


def _combine(name: str, parts: Sequence[CertificateReport], tol: float) -> CertificateReport:
    firsts = [p.first_violation_k for p in parts if p.first_violation_k is not None]
    return CertificateReport(
        name,
        all(p.holds for p in parts),
        min((p.worst_margin for p in parts), default=math.inf),
        min(firsts) if firsts else None,
        tol,
        sum(p.checked for p in parts),
        tuple(parts),
    )


def _prepare(trace: Sequence[IterateRecord], fstar: float) -> List[float]:
    if not trace:
        raise ContractError("certificate needs a non-empty trace")
    return [r.f_value - fstar for r in trace]


def _transitions(trace: Sequence[IterateRecord]):
    """Yield ``(k, record_k)`` for every step that has a successor row."""
    for k in range(len(trace) - 1):
        if trace[k].is_step:
            yield k, trace[k]


def cert_sublinear(trace, fstar: float, D: float, tol: float = DEFAULT_TOL) -> CertificateReport:
    """``h_k <= 2 D^2 max_{j<k} L_j / (k + 2)`` for every ``k >= 1``."""
    h = _prepare(trace, fstar)
    tally = _Tally("sublinear", tol)
    L_max = 0.0
    for k in range(1, len(trace)):
        if not trace[k - 1].is_step:
            break
        L_max = max(L_max, trace[k - 1].L_k)
        tally.add(trace[k].k, 2.0 * D * D * L_max / (k + 2.0), h[k])
    return tally.report()


def cert_halving(trace, fstar: float, D: float, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Guarantees for full steps (``alpha_k = 1``).

    * ``step``: each full step at least halves the residual;
    * ``run``: after ``m`` consecutive full steps ending at ``n`` (``n - m >= 1``),
      ``h_n <= D^2 max_{j <= n-m-1} L_j / (2^(m-1) (n - m + 2))``;
    * ``count``: with ``t`` full steps before ``n``, ``h_n <= h_0 / 2^t``.
    """
    h = _prepare(trace, fstar)
    full = [r.is_step and r.alpha_k == 1.0 for r in trace]

    step = _Tally("halving.step", tol)
    for k, rec in _transitions(trace):
        if full[k]:
            step.add(trace[k + 1].k, 0.5 * h[k], h[k + 1])

    run = _Tally("halving.run", tol)
    count = _Tally("halving.count", tol)
    prefix_Lmax = []
    L_max = 0.0
    for r in trace:
        L_max = max(L_max, r.L_k if r.is_step else 0.0)
        prefix_Lmax.append(L_max)
    t = 0
    for n in range(1, len(trace)):
        if not trace[n - 1].is_step:
            break
        t += full[n - 1]
        count.add(trace[n].k, h[0] / 2.0 ** t, h[n])
        m = 0
        while n - m - 1 >= 0 and full[n - m - 1]:
            m += 1
            if n - m < 1:
                break
            bound = D * D * prefix_Lmax[n - m - 1] / (2.0 ** (m - 1) * (n - m + 2.0))
            run.add(trace[n].k, bound, h[n])
    return _combine("halving", [step.report(), run.report(), count.report()], tol)


def cert_product(trace, fstar: float, Delta: float, D: float,
                 tol: float = DEFAULT_TOL) -> CertificateReport:
    """Product bound valid while the residual stays above ``Delta``.

    ``h_k <= h_0 prod_{j<k} phi_j`` with ``phi_j = 1/2`` for full steps and
    ``1 - Delta / (2 L_j D^2)`` otherwise, checked on the prefix where
    ``h_j >= Delta`` for all ``j < k``.
    """
    if not Delta > 0:
        raise ContractError("Delta must be positive")
    h = _prepare(trace, fstar)
    tally = _Tally("product", tol)
    prod = 1.0
    for k in range(1, len(trace)):
        prev = trace[k - 1]
        if not prev.is_step or h[k - 1] < Delta:
            break
        prod *= 0.5 if prev.alpha_k == 1.0 else 1.0 - Delta / (2.0 * prev.L_k * D * D)
        tally.add(trace[k].k, h[0] * prod, h[k])
    return tally.report(prefix_length=tally.count)


def cert_pl(trace, fstar: float, pl: PLParams, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Linear rate under gradient dominance with an interior minimizer.

    Per step: ``h_{k+1} <= h_k (1 - r^2 / (2 L_k c^2 D^2))`` when
    ``alpha_k < 1`` and ``h_{k+1} <= h_k / 2`` when ``alpha_k = 1``; the
    chained product of these factors bounds ``h_k / h_0``.
    """
    if not isinstance(pl, PLParams):
        raise ContractError("pl must be a PLParams instance")
    h = _prepare(trace, fstar)
    q = pl.r * pl.r / (2.0 * pl.c * pl.c * pl.D * pl.D)
    step = _Tally("pl.step", tol)
    chain = _Tally("pl.chain", tol)
    prod = 1.0
    for k in range(1, len(trace)):
        prev = trace[k - 1]
        if not prev.is_step:
            break
        factor = 0.5 if prev.alpha_k == 1.0 else 1.0 - q / prev.L_k
        prod *= factor
        step.add(trace[k].k, h[k - 1] * factor, h[k])
        chain.add(trace[k].k, h[0] * prod, h[k])
    return _combine("pl", [step.report(), chain.report()], tol)


def cert_backtracks(trace, L_true: float, L0: float) -> CertificateReport:
    """Total inequality checks and the cap on the smoothness estimates.

    ``sum n_checks <= 2N + log2(2 L_true / L0) + 1`` over ``N`` steps and
    ``max L_k <= 2 L_true``; both checked exactly (``tol = 0``).
    """
    if not L_true > 0:
        raise ContractError("L_true must be positive")
    if not L0 > 0:
        raise ContractError("L0 must be positive")
    if not trace:
        raise ContractError("certificate needs a non-empty trace")
    steps = [r for r in trace if r.is_step]
    budget = _Tally("backtracks.budget", 0.0)
    total = sum(r.n_checks for r in steps)
    last_k = steps[-1].k if steps else trace[-1].k
    budget.add(last_k, 2 * len(steps) + math.log2(2.0 * L_true / L0) + 1.0, float(total))
    cap = _Tally("backtracks.cap", 0.0)
    for r in steps:
        cap.add(r.k, 2.0 * L_true, r.L_k)
    return _combine("backtracks", [budget.report(total_checks=total, steps=len(steps)), cap.report()], 0.0)


def cert_gap(trace, fstar: float, tol: float = DEFAULT_TOL) -> CertificateReport:
    """The Frank-Wolfe gap upper-bounds the residual at every row."""
    h = _prepare(trace, fstar)
    tally = _Tally("gap", tol)
    for k, r in enumerate(trace):
        tally.add(r.k, r.dual_gap, h[k])
    return tally.report()


def reference_fstar(obj, oracle, x0, cfg, factor: int = 10, slack: float = 1e-12) -> float:
    """Estimate ``f*`` as the best value of a ``factor``-times longer adaptive run minus ``slack``."""
    from dataclasses import replace

    from .solver import adaptive_fw

    run = adaptive_fw(obj, oracle, replace(cfg, max_iters=cfg.max_iters * factor), x0)
    return min([r.f_value for r in run.trace] + [run.final_value]) - slack
