import math

import numpy as np
import pytest

from adafw.core import ContractError
from adafw.objectives import (
    FermatTorricelli,
    LabeledDataset,
    LogisticRegression,
    MatrixCompletion,
    MaxBall,
    ObservedEntries,
    SvmDual,
    WeightedQuadratic,
    fts_eval,
    logreg_eval,
    matcomp_eval,
    maxball_eval,
    svmdual_eval,
    wquad_eval,
)

import reference as ref


def _close(pair, value, grad, atol=1e-12):
    v, g = pair
    assert v == pytest.approx(value, abs=atol)
    np.testing.assert_allclose(g, grad, atol=atol)


def test_fts_examples():
    _close(fts_eval(np.array([3.0, 4]), np.zeros((1, 2))), 5.0, [0.6, 0.8])
    _close(fts_eval(np.array([1.0, 2]), np.array([[1.0, 2]])), 0.0, [0, 0])
    _close(fts_eval(np.array([1.0, 0]), np.array([[0.0, 0], [2, 0]])), 2.0, [0, 0])


def test_maxball_examples():
    _close(maxball_eval(np.zeros(2), np.array([[0.0, 0], [2, 0]])), 4.0, [-4, 0])
    _close(maxball_eval(np.array([1.0, 1]), np.array([[1.0, 1]])), 0.0, [0, 0])
    _close(maxball_eval(np.zeros(2), np.array([[1.0, 0], [-1, 0]])), 1.0, [-2, 0])


def test_wquad_examples():
    _close(wquad_eval(np.array([1.0, 1]), np.array([1.0, 2])), 3.0, [2, 4])
    _close(wquad_eval(np.zeros(3), np.ones(3)), 0.0, [0, 0, 0])
    _close(wquad_eval(np.array([2.0]), np.array([3.0])), 12.0, [12])


def test_matcomp_examples():
    obs = ObservedEntries(2, 2, [0], [0], [3.0])
    v, g = matcomp_eval(np.zeros((2, 2)), obs)
    assert v == 9.0
    np.testing.assert_array_equal(g, [[-6, 0], [0, 0]])
    U = np.array([[1.0, 2], [3, 4]])
    full = ObservedEntries(2, 2, [0, 0, 1, 1], [0, 1, 0, 1], U.ravel())
    _close(matcomp_eval(U, full), 0.0, np.zeros((2, 2)))
    two = ObservedEntries(2, 2, [0, 1], [0, 1], [1.0, -1.0])
    _close(matcomp_eval(np.eye(2), two), 4.0, [[0, 0], [0, 4]])
    with pytest.raises(ContractError):
        matcomp_eval(np.zeros((2, 3)), two)


def test_observed_entries_validation():
    with pytest.raises(ContractError):
        ObservedEntries(2, 2, [0, 0], [1, 1], [1.0, 2.0])
    with pytest.raises(ContractError):
        ObservedEntries(2, 2, [2], [0], [1.0])
    with pytest.raises(ContractError):
        ObservedEntries(2, 2, [0, 1], [0], [1.0])


def test_svmdual_examples():
    _close(svmdual_eval(np.array([1.0, 0]), np.eye(2)), 1.0, [2, 0])
    _close(svmdual_eval(np.array([0.5, 0.5]), np.array([[1.0, -1.0]])), 0.0, [0, 0])
    _close(svmdual_eval(np.array([0.5, 0.5]), np.eye(2)), 0.5, [1, 1])


def test_svmdual_from_dataset_signs_columns():
    ds = LabeledDataset(np.array([[1.0, 2], [3, 4]]), np.array([1.0, 0.0]))
    np.testing.assert_array_equal(SvmDual.from_dataset(ds).A, [[1, -3], [2, -4]])


def test_logreg_examples():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 3))
    y = (rng.uniform(size=7) > 0.5).astype(float)
    v, _ = logreg_eval(np.zeros(3), X, y)
    assert v == pytest.approx(math.log(2), abs=1e-15)
    v, g = logreg_eval(np.array([30.0]), np.array([[1.0]]), np.array([1.0]))
    assert v == pytest.approx(0.0, abs=1e-12)
    p = 1 / (1 + math.exp(-30.0))
    assert g[0] == pytest.approx(p - 1.0, rel=1e-6)
    assert g[0] == pytest.approx(-9.36e-14, rel=1e-2)
    _close(logreg_eval(np.zeros(1), np.array([[1.0]]), np.array([1.0])), math.log(2), [-0.5])


def test_logreg_guards_do_not_overflow():
    with np.errstate(all="raise"):
        v, g = logreg_eval(np.array([1e4]), np.array([[1.0], [-1.0]]), np.array([0.0, 1.0]))
    assert math.isfinite(v) and np.all(np.isfinite(g))
    assert v == pytest.approx(-math.log(1e-12), rel=1e-6)


def test_logreg_rejects_non_binary_labels():
    with pytest.raises(ContractError):
        LogisticRegression(LabeledDataset(np.ones((2, 1)), np.array([1.0, -1.0])))


def _smooth_objectives():
    rng = np.random.default_rng(5)
    a = rng.integers(1, 11, 8).astype(float)
    i, j = np.divmod(rng.choice(30, 12, replace=False), 6)
    obs = ObservedEntries(5, 6, i, j, rng.standard_normal(12))
    A = rng.standard_normal((4, 9))
    X = rng.standard_normal((25, 5))
    y = (rng.uniform(size=25) > 0.4).astype(float)
    return [
        ("wquad", WeightedQuadratic(a), (8,)),
        ("matcomp", MatrixCompletion(obs), (5, 6)),
        ("svmdual", SvmDual(A), (9,)),
        ("logreg", LogisticRegression(LabeledDataset(X, y)), (5,)),
    ]


@pytest.mark.parametrize("name,obj,shape", _smooth_objectives())
def test_finite_difference_gradient(name, obj, shape):
    rng = np.random.default_rng(sum(map(ord, name)))
    for _ in range(20):
        x = rng.standard_normal(shape)
        v, g = obj.eval(x)
        assert v == obj.value(x)
        assert g.shape == x.shape
        assert ref.max_rel_error(ref.fd_gradient(obj.value, x), g) <= 1e-5


def _nonsmooth_objectives():
    rng = np.random.default_rng(6)
    anchors = rng.standard_normal((15, 4))
    return [("fts", FermatTorricelli(anchors)), ("maxball", MaxBall(anchors))]


@pytest.mark.parametrize("name,obj", _nonsmooth_objectives())
def test_subgradient_inequality(name, obj):
    rng = np.random.default_rng(7)
    for t in range(100):
        # every tenth base point sits on an anchor (a kink)
        x = obj.anchors[t % len(obj.anchors)].copy() if t % 10 == 0 else 2 * rng.standard_normal(4)
        y = 2 * rng.standard_normal(4)
        fx, g = obj.eval(x)
        assert obj.value(y) >= fx + g @ (y - x) - 1e-9


def _all_objectives():
    return [(n, o, s) for n, o, s in _smooth_objectives()] + [
        (n, o, (4,)) for n, o in _nonsmooth_objectives()
    ]


@pytest.mark.parametrize("name,obj,shape", _all_objectives())
def test_convexity_sampling(name, obj, shape):
    rng = np.random.default_rng(8)
    for _ in range(100):
        x, y = 3 * rng.standard_normal(shape), 3 * rng.standard_normal(shape)
        lam = rng.uniform()
        lhs = obj.value(lam * x + (1 - lam) * y)
        assert lhs <= lam * obj.value(x) + (1 - lam) * obj.value(y) + 1e-9


@pytest.mark.parametrize("name,obj,shape", _all_objectives())
def test_eval_is_deterministic_and_pure(name, obj, shape):
    x = np.random.default_rng(9).standard_normal(shape)
    x_copy = x.copy()
    v1, g1 = obj.eval(x)
    v2, g2 = obj.eval(x)
    assert v1 == v2
    np.testing.assert_array_equal(g1, g2)
    np.testing.assert_array_equal(x, x_copy)


def test_nonnegative_values():
    rng = np.random.default_rng(10)
    for name, obj, shape in _smooth_objectives():
        if name in ("svmdual", "logreg"):
            for _ in range(50):
                assert obj.value(5 * rng.standard_normal(shape)) >= 0.0


@pytest.mark.parametrize("name,obj,shape", _smooth_objectives())
def test_lipschitz_constant_bounds_gradient_change(name, obj, shape):
    rng = np.random.default_rng(13)
    L = obj.lipschitz
    for _ in range(50):
        x, y = rng.standard_normal(shape), rng.standard_normal(shape)
        dg = np.linalg.norm(obj.eval(x)[1] - obj.eval(y)[1])
        assert dg <= L * np.linalg.norm(x - y) * (1 + 1e-9)
