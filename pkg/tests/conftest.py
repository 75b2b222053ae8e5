import numpy as np
import pytest

from adafw import AdaptiveConfig, L2Ball, adaptive_fw
from adafw.certificates import reference_fstar
from adafw.data import gen_classification, gen_weights
from adafw.objectives import LogisticRegression, WeightedQuadratic


class Run:
    def __init__(self, obj, oracle, x0, cfg, fstar=None):
        self.obj, self.oracle, self.x0, self.cfg = obj, oracle, x0, cfg
        self.result = adaptive_fw(obj, oracle, cfg, x0)
        self.trace = self.result.trace
        self.fstar = fstar if fstar is not None else reference_fstar(obj, oracle, x0, cfg)


@pytest.fixture(scope="session")
def wquad_run():
    """Weighted quadratic, a_i uniform on 1..10, unit ball in R^1000, N = 500."""
    a = gen_weights(1000, seed=7)
    oracle = L2Ball(1.0, 1000)
    x0 = oracle.lmo(-np.ones(1000))
    return Run(WeightedQuadratic(a), oracle, x0, AdaptiveConfig(L_init=1.0, max_iters=500), fstar=0.0)


@pytest.fixture(scope="session")
def logreg_run():
    """Logistic regression on the unit ball; this run takes several full steps."""
    ds = gen_classification(300, 20, seed=3)
    oracle = L2Ball(1.0, 20)
    return Run(LogisticRegression(ds), oracle, np.zeros(20), AdaptiveConfig(L_init=1.0, max_iters=300))


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion, then assert it."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number, description, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {description}"
        if detail:
            line += f"  [{detail}]"
        results[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
