from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from counterthread.errors import (
    DimensionMismatch,
    LengthMismatch,
    NonFiniteFeature,
    SingleClassInput,
    TooFewSamples,
)
from counterthread.svm.evaluation import (
    cross_validate,
    evaluate,
    kfold_stratified,
    report_from_confusion,
)
from counterthread.svm.linear import train_binary
from counterthread.svm.multiclass import MulticlassModel, argmax_lowest, predict, predict_one, train_ovr
from counterthread.svm.scaling import ScalingParams, apply_scaling, fit_scaling
from counterthread.labels import ConflatedClass

from oracles import harmonic, svm_dual_qp

# Tables of published confusion counts; rows annotated, columns predicted.
SEXIST = np.array([[206, 1, 0, 21], [4, 35, 0, 19], [2, 0, 4, 2], [26, 10, 0, 129]])
HOMOPHOBIC = np.array([[119, 3, 0, 85], [4, 40, 0, 59], [6, 3, 0, 11], [50, 24, 1, 559]])


def noisy_problem(seed, n=20, d=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = np.where(X[:, 0] + 0.5 * X[:, 1] + rng.normal(scale=0.8, size=n) > 0, 1.0, -1.0)
    if len(set(y)) < 2:
        y[0] = -y[0]
    return X, y


# -- scaling ------------------------------------------------------------------

def test_scaling_column():
    p = fit_scaling(np.array([[0.0], [2.0], [4.0]]))
    np.testing.assert_array_equal(apply_scaling(p, np.array([[0.0], [2.0], [4.0]])).ravel(), [0, 0.5, 1])


def test_scaling_constant_column():
    p = fit_scaling(np.array([[3.0], [3.0], [3.0]]))
    np.testing.assert_array_equal(apply_scaling(p, np.array([[3.0], [3.0], [7.0]])).ravel(), [0, 0, 0])


def test_scaling_clamps():
    p = fit_scaling(np.array([[0.0], [4.0]]))
    assert apply_scaling(p, np.array([[10.0]]))[0, 0] == 1.0
    assert apply_scaling(p, np.array([[-3.0]]))[0, 0] == 0.0


def test_scaling_sparse_matches_dense():
    rng = np.random.default_rng(0)
    D = rng.random((30, 12)) * (rng.random((30, 12)) < 0.3)
    D[:, 5] = 0.0
    S = sparse.csr_matrix(D)
    p = fit_scaling(S)
    assert p == fit_scaling(D)
    T = rng.random((10, 12)) * 2 * (rng.random((10, 12)) < 0.4)
    out = apply_scaling(p, sparse.csr_matrix(T))
    assert sparse.issparse(out)
    np.testing.assert_array_equal(out.toarray(), apply_scaling(p, T))


def test_scaling_negative_min_sparse():
    D = np.array([[-1.0, 0.0], [1.0, 2.0]])
    p = fit_scaling(sparse.csr_matrix(D))
    np.testing.assert_array_equal(apply_scaling(p, sparse.csr_matrix(D)).toarray(), [[0, 0], [1, 1]])


def test_scaling_dimension_check():
    p = ScalingParams(np.zeros(2), np.ones(2))
    with pytest.raises(DimensionMismatch):
        apply_scaling(p, np.zeros((1, 3)))


# -- binary trainer -----------------------------------------------------------

def test_two_point_analytic():
    m = train_binary(np.array([[1.0], [-1.0]]), np.array([1, -1]))
    assert m.weights[0] == pytest.approx(1.0, abs=1e-6)
    assert m.bias == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_allclose(m.alpha, [0.5, 0.5], atol=1e-9)
    assert np.all(np.sign(m.decision_function(np.array([[3.0], [-0.2]]))) == [1, -1])


def test_separable_training_accuracy():
    rng = np.random.default_rng(4)
    pos = rng.normal(loc=(2, 2), scale=0.4, size=(5, 2))
    neg = rng.normal(loc=(-2, -2), scale=0.4, size=(5, 2))
    X = np.vstack([pos, neg])
    y = np.array([1] * 5 + [-1] * 5)
    m = train_binary(X, y)
    assert np.all(np.sign(m.decision_function(X)) == y)


@pytest.mark.parametrize("seed", range(50))
def test_dual_objective_vs_qp(seed):
    X, y = noisy_problem(seed)
    m = train_binary(X, y, C=1.0, tol=1e-6, max_iter=100_000)
    _, oracle_obj = svm_dual_qp(X, y, 1.0)
    assert m.converged
    assert abs(m.dual_objective - oracle_obj) <= 1e-4
    assert np.all((m.alpha >= 0) & (m.alpha <= m.C))


def test_max_iter_reports_unconverged():
    X, y = noisy_problem(0, n=40, d=5)
    m = train_binary(X, y, tol=1e-12, max_iter=2)
    assert not m.converged and m.iterations == 2


@pytest.mark.parametrize("seed", range(10))
def test_duality_gap(seed):
    X, y = noisy_problem(seed, n=40, d=5)
    m = train_binary(X, y, C=1.0)
    assert m.primal_objective >= m.dual_objective - 1e-12
    assert (m.primal_objective - m.dual_objective) <= 1e-2 * abs(m.primal_objective)


def test_duplicate_data_half_c_invariance():
    X, y = noisy_problem(3, n=30, d=4)
    a = train_binary(X, y, C=1.0, tol=1e-10, max_iter=100000)
    b = train_binary(np.vstack([X, X]), np.concatenate([y, y]), C=0.5, tol=1e-10, max_iter=100000)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-6)


def test_training_is_deterministic():
    X, y = noisy_problem(8, n=60, d=6)
    a, b = train_binary(X, y, seed=5), train_binary(X, y, seed=5)
    assert a == b and a.iterations == b.iterations


def test_single_class_rejected():
    with pytest.raises(SingleClassInput):
        train_binary(np.ones((3, 2)), np.ones(3))


def test_non_finite_rejected():
    X = np.array([[0.0, np.nan], [1.0, 1.0]])
    with pytest.raises(NonFiniteFeature):
        train_binary(X, np.array([1, -1]))


# -- one-vs-rest --------------------------------------------------------------

def blobs(seed, n_per=40, spread=0.35):
    rng = np.random.default_rng(seed)
    centers = np.array([[0, 0, 3], [3, 0, 0], [0, 3, 0], [3, 3, 3]], dtype=float)
    X = np.vstack([rng.normal(c, spread, size=(n_per, 3)) for c in centers])
    return X, np.repeat(np.arange(4), n_per)


def test_ovr_two_classes_equivalent_to_binary():
    X, y = noisy_problem(2, n=30)
    labels = np.where(y > 0, 0, 3)
    model = train_ovr(X, labels, tol=1e-10, max_iter=100000)
    Xs = apply_scaling(model.scaling, X)
    binary = train_binary(Xs, np.where(labels == 0, 1.0, -1.0), tol=1e-10, max_iter=100000)
    # the class-3 problem mirrors the class-0 one, so class 0 wins iff its binary score is positive
    np.testing.assert_allclose(model.models[3].weights, -model.models[0].weights, atol=1e-8)
    np.testing.assert_array_equal(predict(model, X), np.where(binary.decision_function(Xs) > 0, 0, 3))


def test_ovr_blobs_training_accuracy():
    X, labels = blobs(1)
    model = train_ovr(X, labels)
    assert np.mean(predict(model, X) == labels) >= 0.95


def test_ovr_absent_class_never_predicted():
    X, labels = blobs(2)
    keep = labels != 2
    model = train_ovr(X[keep], labels[keep])
    assert model.models[2] is None
    assert not np.any(predict(model, X) == 2)


def test_ovr_single_class_rejected():
    with pytest.raises(SingleClassInput):
        train_ovr(np.ones((4, 2)), [1, 1, 1, 1])


def test_argmax_examples():
    assert argmax_lowest(np.array([[2.0, -1, -1, -1]]))[0] == 0
    assert argmax_lowest(np.array([[0.0, 1.5, 1.5, -1]]))[0] == 1


def test_predict_matches_recomputed_argmax():
    X, labels = blobs(3)
    model = train_ovr(X, labels)
    Xs = apply_scaling(model.scaling, X)
    scores = np.column_stack([Xs @ m.weights + m.bias for m in model.models])
    np.testing.assert_array_equal(predict(model, X), np.argmax(scores, axis=1))
    assert predict_one(model, X[0]) == ConflatedClass(int(np.argmax(scores[0])))


def test_predict_dimension_mismatch():
    X, labels = blobs(3, n_per=5)
    model = train_ovr(X, labels)
    with pytest.raises(DimensionMismatch):
        predict(model, np.zeros((1, 4)))


# -- folds --------------------------------------------------------------------

def test_folds_singletons():
    folds = kfold_stratified([0] * 10, k=10, seed=1)
    assert sorted(len(f) for f in folds) == [1] * 10


def test_folds_one_of_each():
    labels = [0] * 10 + [1] * 10
    for f in kfold_stratified(labels, k=10, seed=3):
        assert sorted(labels[i] for i in f) == [0, 1]


def test_folds_sexist_distribution():
    labels = [0] * 228 + [1] * 58 + [2] * 8 + [3] * 165
    folds = kfold_stratified(labels, k=10, seed=42)
    assert sorted(np.concatenate(folds).tolist()) == list(range(459))
    for c, n_c in Counter(labels).items():
        for f in folds:
            got = sum(1 for i in f if labels[i] == c)
            assert abs(got - n_c / 10) <= 1


def test_folds_too_few():
    with pytest.raises(TooFewSamples):
        kfold_stratified([0, 1, 0], k=10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=10, max_size=120), st.integers(2, 10), st.integers(0, 10**6))
def test_folds_properties(labels, k, seed):
    folds = kfold_stratified(labels, k, seed)
    assert sorted(np.concatenate(folds).tolist()) == list(range(len(labels)))
    for c in set(labels):
        counts = [sum(1 for i in f if labels[i] == c) for f in folds]
        assert max(counts) - min(counts) <= 1
    assert all(np.array_equal(a, b) for a, b in zip(folds, kfold_stratified(labels, k, seed)))


# -- evaluate -----------------------------------------------------------------

def test_perfect_predictions():
    gold = [0, 1, 2, 3, 3, 0]
    r = evaluate(gold, gold)
    assert np.array_equal(r.confusion, np.diag(np.bincount(gold, minlength=4)))
    assert r.precision == r.recall == r.f1 == (1.0,) * 4


def test_sexist_table_metrics():
    r = report_from_confusion(SEXIST)
    assert r.support == (228, 58, 8, 165)
    assert r.precision[0] == 206 / 238
    assert r.recall[0] == 206 / 228
    assert abs(r.f1[0] - harmonic(206 / 238, 206 / 228)) <= 1e-9
    assert r.f1[0] == pytest.approx(0.884, abs=5e-4)


def test_homophobic_counter_speech_recall_zero():
    r = report_from_confusion(HOMOPHOBIC)
    assert r.recall[2] == 0.0
    assert r.precision[2] == 0.0
    assert r.f1[2] == 0.0


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        evaluate([0, 1], [0])


def test_weighted_recall_is_accuracy():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        gold = rng.integers(0, 4, size=n)
        pred = rng.integers(0, 4, size=n)
        r = evaluate(gold, pred)
        assert r.weighted_recall == np.trace(r.confusion) / n


def test_constant_classifier_cv():
    labels = np.array([0] * 30 + [1] * 12 + [2] * 5 + [3] * 23)
    res = cross_validate(labels, lambda tr, te: np.full(te.shape, 3), k=5, seed=0)
    assert res.report.recall == (0.0, 0.0, 0.0, 1.0)
    assert res.report.support == (30, 12, 5, 23)


def test_cv_reports_merge_in_fold_order():
    labels = np.repeat(np.arange(4), 10)
    seen = []

    def fp(train, test):
        seen.append(test[0])
        assert np.intersect1d(train, test).size == 0
        return labels[test]

    res = cross_validate(labels, fp, k=5, seed=9)
    assert seen == [f[0] for f in res.folds]
    assert res.report.accuracy == 1.0
