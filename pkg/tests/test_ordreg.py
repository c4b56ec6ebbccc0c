"""Ordinal model: features, loss kernels, fitting, prediction."""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from crisp.judge.parse import RankedEntry, RankingRun
from crisp.labels import ImpactCategory
from crisp.ordreg import (
    NUM_FEATURES,
    OrdinalModel,
    TrainingSet,
    annotate_fused,
    backend,
    build_features,
    build_training_set,
    fit,
    it_loss_and_gradient,
    rank_slots,
)
from crisp.ordreg import _itloss_py
from crisp.aggregate import AggregatedEntry, AggregatedRanking, rrf_fuse

from conftest import make_bundle
from test_aggregate import run_from_order

H, M, L = ImpactCategory.HIGH, ImpactCategory.MEDIUM, ImpactCategory.LOW


# --- feature construction ----------------------------------------------------


def test_features_frozen_values():
    vec = build_features([2.0, 3.0, 2.0], 10)
    expected = [2.0, 3.0, 2.0, 0.2, 0.3, 0.2, 0.4714045207910317, 2.3333333333333335]
    assert vec.tolist() == expected
    assert vec.shape == (NUM_FEATURES,)


def test_features_median_imputation():
    # present ranks 2 and 4 -> median 3 fills the absent middle slot
    vec = build_features([2.0, None, 4.0], 12)
    assert vec[:3].tolist() == [2.0, 3.0, 4.0]
    assert vec[3:6].tolist() == [2.0 / 12, 3.0 / 12, 4.0 / 12]


def test_features_single_rank_has_zero_spread():
    vec = build_features([5.0, None, None], 20)
    assert vec[:3].tolist() == [5.0, 5.0, 5.0]
    assert vec[6] == 0.0  # population std
    assert vec[7] == 5.0


def test_features_reject_bad_input():
    with pytest.raises(ValueError):
        build_features([None, None, None], 10)
    with pytest.raises(ValueError):
        build_features([1.0], 0)
    with pytest.raises(ValueError):
        build_features([0.5, 1.0], 10)
    with pytest.raises(ValueError):
        build_features([1.0] * 4, 10)


def test_training_set_votes_and_normalizes_by_full_bundle():
    bundle = make_bundle(0, 10)
    ids = list(bundle.reference_ids())
    # runs rank only four references; normalization still divides by 10
    cats = {ids[0]: H, ids[1]: M, ids[2]: M, ids[3]: L}
    runs = [run_from_order(bundle, ids[:4], k, cats) for k in (1, 2, 3)]
    training = build_training_set([(bundle, runs)])
    assert len(training) == 4
    row = dict(zip(training.pairs, training.X))
    vec = row[(bundle.citing.id, ids[0])]
    assert vec[0] == 1.0 and vec[3] == 1.0 / 10
    assert training.y.tolist() == [int(cats[pid]) for pid in ids[:4]]


def test_training_set_excludes_held_out_pairs():
    bundle = make_bundle(1, 5)
    ids = list(bundle.reference_ids())
    runs = [run_from_order(bundle, ids, k) for k in (1, 2, 3)]
    held_out = {(bundle.citing.id, ids[0]), (bundle.citing.id, ids[2])}
    training = build_training_set([(bundle, runs)], held_out=held_out)
    assert len(training) == 3
    assert not set(training.pairs) & held_out
    assert training.excluded_pairs == frozenset(held_out)


def test_training_set_requires_runs():
    bundle = make_bundle(2, 3)
    with pytest.raises(ValueError):
        build_training_set([(bundle, [])])


def test_rank_slots_pads_to_three():
    bundle = make_bundle(3, 4)
    ids = list(bundle.reference_ids())
    runs = [run_from_order(bundle, ids, 1), run_from_order(bundle, ids[:1], 2)]
    assert rank_slots(runs, ids[0]) == [1.0, 1.0, None]
    assert rank_slots(runs, ids[3]) == [4.0, None, None]


# --- loss and gradient -------------------------------------------------------


def _random_instance(rng, n=None, d=NUM_FEATURES):
    n = n or rng.integers(3, 40)
    X = rng.normal(size=(int(n), d))
    y = rng.integers(0, 3, size=int(n))
    w = rng.normal(size=d)
    theta0 = float(rng.normal())
    theta1 = theta0 + float(rng.uniform(0.1, 3.0))
    alpha = float(rng.uniform(0.0, 5.0))
    return X, y, w, theta0, theta1, alpha


def test_loss_value_at_reference_point():
    # one sample per class at the zero score: each f(.) term is exact
    x = np.zeros((3, NUM_FEATURES))
    y = np.array([0, 1, 2])
    w = np.zeros(NUM_FEATURES)
    loss, _ = it_loss_and_gradient(x, y, w, 0.0, 1.0, 0.0)
    f = lambda z: math.log1p(math.exp(-z))
    expected = f(0.0 - 0.0) + (f(0.0 - 0.0) + f(1.0 - 0.0)) + f(0.0 - 1.0)
    assert loss == pytest.approx(expected, rel=1e-15)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(101)
    h = 1e-5
    for _ in range(25):
        X, y, w, t0, t1, alpha = _random_instance(rng)
        _, grad = it_loss_and_gradient(X, y, w, t0, t1, alpha)
        flat = np.concatenate([w, [t0, t1]])

        def loss_at(params):
            return it_loss_and_gradient(
                X, y, params[:NUM_FEATURES], params[NUM_FEATURES],
                params[NUM_FEATURES + 1], alpha,
            )[0]

        for j in range(flat.size):
            up, down = flat.copy(), flat.copy()
            up[j] += h
            down[j] -= h
            fd = (loss_at(up) - loss_at(down)) / (2 * h)
            rel = abs(grad[j] - fd) / max(1e-8, abs(fd))
            assert rel < 1e-5, f"component {j}: {grad[j]} vs {fd}"


def test_loss_is_convex_along_midpoints():
    rng = np.random.default_rng(77)
    X = rng.normal(size=(30, NUM_FEATURES))
    y = rng.integers(0, 3, size=30)
    for _ in range(200):
        w1, w2 = rng.normal(size=NUM_FEATURES), rng.normal(size=NUM_FEATURES)
        t0a = float(rng.normal())
        t1a = t0a + float(rng.uniform(0.1, 2.0))
        t0b = float(rng.normal())
        t1b = t0b + float(rng.uniform(0.1, 2.0))
        alpha = 0.7
        la = it_loss_and_gradient(X, y, w1, t0a, t1a, alpha)[0]
        lb = it_loss_and_gradient(X, y, w2, t0b, t1b, alpha)[0]
        mid = it_loss_and_gradient(
            X, y, (w1 + w2) / 2, (t0a + t0b) / 2, (t1a + t1b) / 2, alpha
        )[0]
        assert mid <= (la + lb) / 2 + 1e-9


def test_loss_validates_arguments():
    X = np.zeros((2, NUM_FEATURES))
    y = np.array([0, 1])
    w = np.zeros(NUM_FEATURES)
    with pytest.raises(ValueError):
        it_loss_and_gradient(X, y, w, 1.0, 0.5, 1.0)  # thresholds out of order
    with pytest.raises(ValueError):
        it_loss_and_gradient(X, y, w, 0.0, 1.0, -1.0)  # negative penalty
    with pytest.raises(ValueError):
        it_loss_and_gradient(X * np.nan, y, w, 0.0, 1.0, 1.0)


def test_duplicated_data_with_doubled_penalty_doubles_loss():
    rng = np.random.default_rng(5)
    X, y, w, t0, t1, alpha = _random_instance(rng, n=17)
    base, _ = it_loss_and_gradient(X, y, w, t0, t1, alpha)
    doubled, _ = it_loss_and_gradient(
        np.vstack([X, X]), np.concatenate([y, y]), w, t0, t1, 2 * alpha
    )
    assert doubled == pytest.approx(2 * base, rel=1e-12)


def test_kernel_parity_python_vs_active_backend():
    rng = np.random.default_rng(9)
    for _ in range(10):
        X, y, w, t0, t1, alpha = _random_instance(rng)
        l_active, g_active = backend.loss_grad(X, y, w, t0, t1, alpha)
        l_py, g_py = _itloss_py.loss_grad(
            np.ascontiguousarray(X), y.astype(np.int64), w, t0, t1, alpha
        )
        assert l_active == pytest.approx(l_py, rel=1e-12)
        np.testing.assert_allclose(g_active, g_py, rtol=1e-9, atol=1e-12)


def test_pure_python_fallback_is_selectable():
    script = (
        "import os\n"
        "os.environ['CRISP_PURE_PYTHON'] = '1'\n"
        "from crisp.ordreg import backend\n"
        "print(backend.KERNEL_BACKEND)\n"
    )
    result = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, check=True
    )
    assert result.stdout.strip() == "python"


@pytest.mark.skipif(
    os.environ.get("CRISP_PURE_PYTHON") == "1",
    reason="compiled kernel disabled by environment",
)
def test_compiled_kernel_is_the_default_backend():
    assert backend.KERNEL_BACKEND == "cython"


# --- fitting and prediction --------------------------------------------------


def _separable_training(rng, n_per_class=40, spread=0.3):
    X = np.vstack(
        [rng.normal(loc=m, scale=spread, size=(n_per_class, NUM_FEATURES))
         for m in (-2.0, 0.0, 2.0)]
    )
    y = np.repeat([0, 1, 2], n_per_class)
    pairs = [("c", str(i)) for i in range(len(y))]
    return TrainingSet(X=X, y=y, pairs=pairs, excluded_pairs=frozenset())


def test_fit_separates_clean_classes():
    rng = np.random.default_rng(3)
    training = _separable_training(rng)
    model = fit(training, alpha=0.1)
    assert model.converged
    accuracy = (model.predict(training.X) == training.y).mean()
    assert accuracy >= 0.95
    assert model.theta0 < model.theta1


def test_fit_is_deterministic():
    rng = np.random.default_rng(4)
    training = _separable_training(rng, n_per_class=20)
    m1 = fit(training, alpha=0.5)
    m2 = fit(training, alpha=0.5)
    assert m1.weights.tolist() == m2.weights.tolist()
    assert (m1.theta0, m1.theta1) == (m2.theta0, m2.theta1)
    assert m1.grad_norm == m2.grad_norm


def test_huge_penalty_shrinks_weights_to_zero():
    rng = np.random.default_rng(6)
    training = _separable_training(rng, n_per_class=15)
    model = fit(training, alpha=1e8)
    assert np.abs(model.weights).max() < 1e-4
    assert model.theta0 < model.theta1  # thresholds are not penalized


def test_fit_handles_two_class_data():
    rng = np.random.default_rng(8)
    X = np.vstack(
        [rng.normal(loc=m, scale=0.3, size=(25, NUM_FEATURES)) for m in (-1.5, 1.5)]
    )
    y = np.repeat([0, 2], 25)  # nothing labeled Medium
    training = TrainingSet(
        X=X, y=y, pairs=[("c", str(i)) for i in range(50)], excluded_pairs=frozenset()
    )
    model = fit(training, alpha=0.5)
    pred = model.predict(training.X)
    assert ((pred == y) | (pred == 1)).all()
    assert (model.predict(X[:25]) <= model.predict(X[25:])).all()


def test_fit_rejects_bad_input():
    empty = TrainingSet(
        X=np.empty((0, NUM_FEATURES)), y=np.empty(0, dtype=np.int64),
        pairs=[], excluded_pairs=frozenset(),
    )
    with pytest.raises(ValueError):
        fit(empty)
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        fit(_separable_training(rng, n_per_class=5), alpha=-1.0)


def test_predict_counts_crossed_thresholds():
    model = OrdinalModel(
        weights=np.array([1.0] + [0.0] * (NUM_FEATURES - 1)),
        theta0=-1.0, theta1=2.0, alpha=1.0, converged=True, grad_norm=0.0,
    )
    X = np.zeros((3, NUM_FEATURES))
    X[0, 0] = -5.0  # below both thresholds
    X[1, 0] = 0.0   # between
    X[2, 0] = 3.0   # above both
    assert model.predict(X).tolist() == [0, 1, 2]
    assert model.predict_category(X[2]) is ImpactCategory.HIGH
    # boundary: score exactly theta counts as crossing
    X[1, 0] = 2.0
    assert model.predict(X)[1] == 2


def test_predict_is_monotone_along_the_weight_direction():
    rng = np.random.default_rng(12)
    for _ in range(50):
        w = rng.normal(size=NUM_FEATURES)
        t0 = float(rng.normal())
        model = OrdinalModel(
            weights=w, theta0=t0, theta1=t0 + float(rng.uniform(0.1, 2.0)),
            alpha=1.0, converged=True, grad_norm=0.0,
        )
        x = rng.normal(size=NUM_FEATURES)
        steps = [x + t * w for t in (0.0, 0.5, 1.0, 2.0)]
        preds = [int(model.predict(s)[0]) for s in steps]
        assert preds == sorted(preds)


def test_model_json_round_trip(tmp_path):
    model = OrdinalModel(
        weights=np.linspace(-1, 1, NUM_FEATURES),
        theta0=-0.75, theta1=1.25, alpha=2.0, converged=True, grad_norm=3.5e-7,
    )
    path = tmp_path / "model.json"
    model.save(path)
    data = json.loads(path.read_text())
    assert set(data) == {"weights", "theta0", "theta1", "alpha", "converged", "grad_norm"}
    loaded = OrdinalModel.load(path)
    assert loaded.weights.tolist() == model.weights.tolist()
    assert loaded.theta0 == model.theta0
    assert loaded.theta1 == model.theta1
    assert loaded.converged is True

    with pytest.raises(ValueError):
        OrdinalModel.from_json_dict({"weights": [0.0] * NUM_FEATURES})
    with pytest.raises(ValueError):
        OrdinalModel(
            weights=np.zeros(NUM_FEATURES), theta0=1.0, theta1=0.0,
            alpha=1.0, converged=True, grad_norm=0.0,
        )


# --- fused-ranking annotation -------------------------------------------------


def test_annotate_fused_by_rank_position_pattern():
    # A model scoring -mean_rank with thresholds (-7.5, -1.5) labels an
    # 11-entry fused list: rank 1 High, ranks 2-7 Medium, ranks 8-11 Low.
    bundle = make_bundle(30, 11)
    ids = list(bundle.reference_ids())
    runs = [run_from_order(bundle, ids, k) for k in (1, 2, 3)]
    fused = rrf_fuse(runs, bundle)
    weights = np.zeros(NUM_FEATURES)
    weights[7] = -1.0  # mean-rank component
    model = OrdinalModel(
        weights=weights, theta0=-7.5, theta1=-1.5,
        alpha=1.0, converged=True, grad_norm=0.0,
    )
    ranks = {pid: rank_slots(runs, pid) for pid in ids}
    annotated = annotate_fused(fused, model, ranks, len(bundle.references))
    cats = [e.predicted_impact for e in annotated.entries]
    assert cats[0] is H
    assert all(c is M for c in cats[1:7])
    assert all(c is L for c in cats[7:])
    # fusion order and scores are untouched
    assert [e.paper_id for e in annotated.entries] == [e.paper_id for e in fused.entries]
    assert [e.rrf_score for e in annotated.entries] == [e.rrf_score for e in fused.entries]


def test_annotate_fused_requires_ranks_for_every_entry():
    bundle = make_bundle(31, 3)
    ids = list(bundle.reference_ids())
    runs = [run_from_order(bundle, ids, 1)]
    fused = rrf_fuse(runs, bundle)
    model = OrdinalModel(
        weights=np.zeros(NUM_FEATURES), theta0=-1.0, theta1=1.0,
        alpha=1.0, converged=True, grad_norm=0.0,
    )
    with pytest.raises(ValueError):
        annotate_fused(fused, model, {ids[0]: [1.0, None, None]}, 3)
