"""Rank fusion and majority voting."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisp.aggregate import (
    RRF_K,
    apply_majority_labels,
    collect_ranks,
    count_missing,
    majority_vote,
    rrf_fuse,
    rrf_score,
)
from crisp.judge.parse import RankedEntry, RankingRun
from crisp.labels import ImpactCategory

from conftest import make_bundle

H, M, L = ImpactCategory.HIGH, ImpactCategory.MEDIUM, ImpactCategory.LOW


def run_from_order(bundle, order, run_index=1, categories=None):
    """Build a RankingRun ranking ``order`` 1..m (a subset of the bundle)."""
    entries = tuple(
        RankedEntry(
            rank=i + 1,
            paper_id=pid,
            title="",
            contexts="",
            reason="",
            category=(categories or {}).get(pid, M),
        )
        for i, pid in enumerate(order)
    )
    ranked = {pid for pid in order}
    return RankingRun(
        citing_id=bundle.citing.id,
        run_index=run_index,
        seed=run_index,
        entries=entries,
        missing=tuple(pid for pid in bundle.reference_ids() if pid not in ranked),
    )


# --- majority vote -----------------------------------------------------------


def test_majority_vote_strict_majority():
    assert majority_vote([H, H, M]) is H
    assert majority_vote([L, M, L]) is L
    assert majority_vote([M, M, M]) is M


def test_majority_vote_three_way_tie_takes_ordinal_median():
    assert majority_vote([H, M, L]) is M
    assert majority_vote([L, H, M]) is M


def test_majority_vote_two_way_tie_takes_lower_category():
    assert majority_vote([H, M]) is M
    assert majority_vote([M, L]) is L
    assert majority_vote([H, L]) is L


def test_majority_vote_single_and_empty():
    assert majority_vote([H]) is H
    with pytest.raises(ValueError):
        majority_vote([])


@given(st.lists(st.sampled_from([H, M, L]), min_size=1, max_size=3))
def test_majority_vote_is_order_independent(labels):
    results = {majority_vote(list(p)) for p in itertools.permutations(labels)}
    assert len(results) == 1


# --- RRF scores --------------------------------------------------------------


def test_rrf_score_all_first_is_three_sixty_firsts():
    assert rrf_score([1.0, 1.0, 1.0]) == 0.04918032786885246
    assert rrf_score([1.0, 1.0, 1.0]) == 3 / 61


def test_rrf_score_mean_imputation_for_missing_runs():
    # found in two runs at ranks 2 and 4: the absent slot counts as the
    # mean rank 3, so the score is 1/62 + 1/64 + 1/63
    assert rrf_score([2.0, 4.0]) == 0.04762704813108039


def test_rrf_score_single_run():
    assert rrf_score([5.0]) == 3 / 65


def test_rrf_score_rejects_bad_input():
    with pytest.raises(ValueError):
        rrf_score([])
    with pytest.raises(ValueError):
        rrf_score([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        rrf_score([0.5])
    with pytest.raises(ValueError):
        rrf_score([1.0], k=0)


# --- fusion ------------------------------------------------------------------


def test_fuse_three_identical_runs():
    bundle = make_bundle(0, 5)
    order = list(bundle.reference_ids())
    runs = [run_from_order(bundle, order, k) for k in (1, 2, 3)]
    fused = rrf_fuse(runs, bundle)
    assert [e.paper_id for e in fused.entries] == order
    assert [e.rank for e in fused.entries] == [1, 2, 3, 4, 5]
    assert fused.entries[0].rrf_score == 3 / 61
    assert all(e.num_rankings_found == 3 for e in fused.entries)
    assert fused.excluded == ()


def test_fuse_excludes_zero_run_references():
    bundle = make_bundle(1, 4)
    ids = list(bundle.reference_ids())
    runs = [run_from_order(bundle, ids[:2], k) for k in (1, 2)]
    fused = rrf_fuse(runs, bundle)
    assert {e.paper_id for e in fused.entries} == set(ids[:2])
    assert set(fused.excluded) == set(ids[2:])


def test_fuse_breaks_score_ties_lexicographically():
    bundle = make_bundle(2, 4)
    ids = sorted(bundle.reference_ids())
    # two runs with opposite orders: every paper gets ranks {1..4} summed
    # symmetrically, so pairs (first, last) and middle two tie exactly
    runs = [
        run_from_order(bundle, ids, 1),
        run_from_order(bundle, list(reversed(ids)), 2),
    ]
    fused = rrf_fuse(runs, bundle)
    scores = [e.rrf_score for e in fused.entries]
    assert scores[0] == scores[1] and scores[2] == scores[3]
    assert [e.paper_id for e in fused.entries[:2]] == sorted([ids[0], ids[-1]])


def test_fuse_validates_inputs():
    bundle = make_bundle(3, 3)
    other = make_bundle(4, 3)
    run = run_from_order(bundle, list(bundle.reference_ids()))
    with pytest.raises(ValueError):
        rrf_fuse([], bundle)
    with pytest.raises(ValueError):
        rrf_fuse([run] * 4, bundle)
    with pytest.raises(ValueError):
        rrf_fuse([run], bundle, k=0)
    with pytest.raises(ValueError):
        rrf_fuse([run], other)


def test_apply_majority_labels_fills_predictions():
    bundle = make_bundle(5, 3)
    ids = list(bundle.reference_ids())
    cats1 = {ids[0]: H, ids[1]: M, ids[2]: L}
    cats2 = {ids[0]: H, ids[1]: L, ids[2]: L}
    cats3 = {ids[0]: M, ids[1]: M, ids[2]: H}
    runs = [
        run_from_order(bundle, ids, 1, cats1),
        run_from_order(bundle, ids, 2, cats2),
        run_from_order(bundle, ids, 3, cats3),
    ]
    fused = apply_majority_labels(rrf_fuse(runs, bundle), runs)
    by_id = {e.paper_id: e.predicted_impact for e in fused.entries}
    assert by_id[ids[0]] is H  # H,H,M
    assert by_id[ids[1]] is M  # M,L,M
    assert by_id[ids[2]] is L  # L,L,H



def test_collect_ranks_and_count_missing():
    bundle = make_bundle(6, 4)
    ids = list(bundle.reference_ids())
    runs = [
        run_from_order(bundle, ids, 1),
        run_from_order(bundle, ids[:2], 2),
    ]
    assert collect_ranks(runs, ids[0]) == [1, 1]
    assert collect_ranks(runs, ids[3]) == [4]
    assert count_missing(runs[0], bundle) == 0
    assert count_missing(runs[1], bundle) == 2


# --- randomized properties ---------------------------------------------------


@st.composite
def fusion_instance(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    bundle = make_bundle(draw(st.integers(0, 999)), n)
    ids = list(bundle.reference_ids())
    n_runs = draw(st.integers(min_value=1, max_value=3))
    runs = []
    for k in range(n_runs):
        subset = draw(
            st.lists(st.sampled_from(ids), unique=True, min_size=0, max_size=n)
        )
        runs.append(run_from_order(bundle, subset, k + 1))
    return bundle, runs


def _some_ref_is_ranked(runs):
    return any(run.entries for run in runs)


@given(fusion_instance())
def test_property_run_order_invariance(instance):
    bundle, runs = instance
    if not _some_ref_is_ranked(runs):
        return
    fused = rrf_fuse(runs, bundle)
    for perm in itertools.permutations(runs):
        assert rrf_fuse(list(perm), bundle).entries == fused.entries


@given(fusion_instance())
def test_property_score_bounds_and_exclusion(instance):
    bundle, runs = instance
    if not _some_ref_is_ranked(runs):
        return
    fused = rrf_fuse(runs, bundle)
    k = RRF_K
    ranked_somewhere = set().union(*({e.paper_id for e in r.entries} for r in runs))
    assert {e.paper_id for e in fused.entries} == ranked_somewhere
    assert set(fused.excluded) == bundle.reference_id_set() - ranked_somewhere
    for entry in fused.entries:
        assert 0.0 < entry.rrf_score <= 3 / (k + 1) + 1e-15
    # fused ranks are contiguous from 1 and scores non-increasing
    assert [e.rank for e in fused.entries] == list(range(1, len(fused.entries) + 1))
    scores = [e.rrf_score for e in fused.entries]
    assert all(a >= b for a, b in zip(scores, scores[1:]))


@given(fusion_instance(), st.randoms(use_true_random=False))
def test_property_rank_improvement_is_monotone(instance, rng):
    bundle, runs = instance
    target_run = next((r for r in runs if len(r.entries) >= 2), None)
    if target_run is None:
        return
    fused_before = rrf_fuse(runs, bundle)
    # swap a non-first paper one position up in one run
    order = [e.paper_id for e in target_run.entries]
    i = rng.randrange(1, len(order))
    pid = order[i]
    order[i - 1], order[i] = order[i], order[i - 1]
    improved = run_from_order(bundle, order, target_run.run_index)
    new_runs = [improved if r is target_run else r for r in runs]
    fused_after = rrf_fuse(new_runs, bundle)

    before = fused_before.entry_for(pid)
    after = fused_after.entry_for(pid)
    assert after.rrf_score > before.rrf_score
    assert after.rank <= before.rank


@given(fusion_instance())
@settings(max_examples=50)
def test_property_single_run_preserves_order(instance):
    bundle, runs = instance
    run = runs[0]
    if not run.entries:
        return
    fused = rrf_fuse([run], bundle)
    assert [e.paper_id for e in fused.entries] == [e.paper_id for e in run.entries]
