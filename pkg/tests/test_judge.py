"""Judge layer: prompts, permutations, parsing, mock provider, PSC engine."""

from __future__ import annotations

import itertools
import json
import subprocess
import sys

import pytest

from crisp.judge.config import JudgeConfig
from crisp.judge.engine import (
    DEFAULT_RUN_SEEDS,
    PscError,
    derive_run_seeds,
    run_psc,
)
from crisp.judge.mock import (
    category_for_position,
    hidden_score,
    mock_judge,
    planted_categories,
    synthesize_ranking,
    true_ranking,
)
from crisp.judge.parse import ParseError, parse_ranking_response
from crisp.judge.permute import permute_references
from crisp.judge.prompt import (
    CONTEXT_SEPARATOR,
    PromptTooLongError,
    build_ranking_prompt,
    estimate_tokens,
)
from crisp.judge.providers import (
    MockJudgeProvider,
    ProviderAdapter,
    ProviderError,
    make_provider,
)
from crisp.labels import ImpactCategory

from conftest import hex_id, make_bundle, make_corpus

CHI2_CRIT_99_DOF5 = 15.08627246938899


# --- prompt construction ----------------------------------------------------


def test_prompt_contains_references_in_permutation_order():
    bundle = make_bundle(0, 4)
    permutation = list(reversed(bundle.reference_ids()))
    prompt = build_ranking_prompt(bundle, permutation)
    positions = [prompt.index(pid) for pid in permutation]
    assert positions == sorted(positions)
    assert bundle.citing.title in prompt
    # each reference block carries the joined contexts
    ref = bundle.references[0]
    assert CONTEXT_SEPARATOR.join(ref.contexts) in prompt


def test_prompt_rejects_non_bijective_permutation():
    bundle = make_bundle(0, 3)
    ids = list(bundle.reference_ids())
    with pytest.raises(ValueError):
        build_ranking_prompt(bundle, ids[:-1])  # missing one
    with pytest.raises(ValueError):
        build_ranking_prompt(bundle, ids + [ids[0]])  # duplicate
    with pytest.raises(ValueError):
        build_ranking_prompt(bundle, ids[:-1] + [hex_id("alien")])


def test_prompt_token_estimate_is_conservative_char_count():
    assert estimate_tokens("abcd") == 1
    assert estimate_tokens("abcde") == 2
    assert estimate_tokens("") == 0


# --- seeded permutation ------------------------------------------------------


def test_permutation_is_deterministic_and_bijective():
    bundle = make_bundle(1, 7)
    p1 = permute_references(bundle, seed=42)
    p2 = permute_references(bundle, seed=42)
    assert p1 == p2
    assert sorted(p1) == sorted(bundle.reference_ids())
    assert permute_references(bundle, seed=43) != p1


def test_permutation_reaches_all_orders_of_three():
    bundle = make_bundle(2, 3)
    seen = set()
    for seed in range(200):
        seen.add(tuple(permute_references(bundle, seed)))
        if len(seen) == 6:
            break
    assert len(seen) == 6


def test_permutation_uniformity_chi_squared():
    # 10,000 seeds over 3 items: frequencies of the 6 orders should pass
    # a chi-squared uniformity test at the 0.99 level (5 dof).
    bundle = make_bundle(3, 3)
    counts: dict[tuple, int] = {}
    n = 10_000
    for seed in range(n):
        order = tuple(permute_references(bundle, seed))
        counts[order] = counts.get(order, 0) + 1
    assert len(counts) == 6
    expected = n / 6
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < CHI2_CRIT_99_DOF5


# --- response parsing --------------------------------------------------------


def _entry(rank, pid, category="Medium", **extra):
    entry = {
        "rank": rank,
        "paperId": pid,
        "title": extra.get("title", f"Title {rank}"),
        "contexts": extra.get("contexts", ""),
        "reason": extra.get("reason", "because"),
        "impactCategory": category,
    }
    return entry


def test_parse_sample_with_rank_gaps():
    # Rank values may skip (the judge numbered 1,2,3,7,8,11); order and
    # categories must survive parsing, with the missing refs recorded.
    bundle = make_bundle(4, 11)
    ids = bundle.reference_ids()
    ranks = [1, 2, 3, 7, 8, 11]
    cats = ["High", "Medium", "Medium", "Medium", "Low", "Low"]
    payload = [_entry(r, ids[i], cats[i]) for i, r in enumerate(ranks)]
    run = parse_ranking_response(json.dumps(payload), bundle)
    assert [e.rank for e in run.entries] == ranks
    assert run.entries[0].category is ImpactCategory.HIGH
    assert len(run.missing) == 5
    assert run.rank_of(ids[0]) == 1
    assert run.rank_of(ids[10]) is None


def test_parse_tolerates_surrounding_prose():
    bundle = make_bundle(5, 2)
    ids = bundle.reference_ids()
    raw = (
        "Sure! Here is the ranking you asked for:\n\n"
        + json.dumps([_entry(1, ids[0], "High"), _entry(2, ids[1], "Low")])
        + "\n\nLet me know if you need anything else."
    )
    run = parse_ranking_response(raw, bundle)
    assert [e.paper_id for e in run.entries] == list(ids)


def test_parse_duplicate_id_keeps_best_rank():
    bundle = make_bundle(6, 3)
    ids = bundle.reference_ids()
    payload = [
        _entry(2, ids[0], "Medium"),
        _entry(1, ids[1], "High"),
        _entry(3, ids[0], "Low"),  # same paper again, worse rank
    ]
    run = parse_ranking_response(json.dumps(payload), bundle)
    assert run.rank_of(ids[0]) == 2
    assert run.entries[0].paper_id == ids[1]


def test_parse_drops_and_records_hallucinations():
    bundle = make_bundle(7, 2)
    ids = bundle.reference_ids()
    fake = hex_id("made-up")
    payload = [_entry(1, ids[0], "High"), _entry(2, fake), _entry(3, ids[1], "Low")]
    run = parse_ranking_response(json.dumps(payload), bundle)
    assert run.dropped_hallucinations == (fake,)
    assert len(run.entries) == 2


def test_parse_errors():
    bundle = make_bundle(8, 2)
    ids = bundle.reference_ids()
    with pytest.raises(ParseError):
        parse_ranking_response("no array here", bundle)
    with pytest.raises(ParseError):
        parse_ranking_response(json.dumps([_entry(0, ids[0])]), bundle)
    with pytest.raises(ParseError):
        parse_ranking_response(json.dumps([_entry(1.5, ids[0])]), bundle)
    with pytest.raises(ParseError):
        parse_ranking_response(json.dumps([_entry(1, ids[0], "catastrophic")]), bundle)
    with pytest.raises(ParseError):
        parse_ranking_response(json.dumps([{"paperId": ids[0]}]), bundle)


def test_parse_accepts_integral_float_rank():
    bundle = make_bundle(9, 1)
    pid = bundle.reference_ids()[0]
    run = parse_ranking_response(json.dumps([_entry(1.0, pid, "High")]), bundle)
    assert run.entries[0].rank == 1


# --- mock judge --------------------------------------------------------------


def test_mock_zero_noise_is_lossless_and_matches_planted():
    bundle = make_bundle(10, 9)
    permutation = permute_references(bundle, seed=1)
    raw = mock_judge(bundle, permutation, seed=5)
    run = parse_ranking_response(raw, bundle)
    assert len(run.entries) == 9
    assert run.missing == ()
    planted = planted_categories(bundle, seed=5)
    assert run.categories() == planted
    # ranks follow the hidden-score order, independent of presentation
    expected_order = true_ranking(bundle.reference_ids(), seed=5)
    assert [e.paper_id for e in run.entries] == expected_order


def test_mock_ranking_independent_of_permutation_at_zero_noise():
    bundle = make_bundle(11, 6)
    p1 = permute_references(bundle, seed=1)
    p2 = permute_references(bundle, seed=2)
    assert mock_judge(bundle, p1, seed=9) == mock_judge(bundle, p2, seed=9)


def test_mock_category_cutoffs():
    # ceil(0.2 * 10) = 2 High, ceil(0.3 * 10) = 3 Low, rest Medium
    cats = [category_for_position(p, 10) for p in range(1, 11)]
    assert cats.count(ImpactCategory.HIGH) == 2
    assert cats.count(ImpactCategory.MEDIUM) == 5
    assert cats.count(ImpactCategory.LOW) == 3
    # High wins when the cutoffs overlap on a single-item list
    assert category_for_position(1, 1) is ImpactCategory.HIGH


def test_mock_drop_rate_one_empties_the_ranking():
    bundle = make_bundle(12, 5)
    permutation = list(bundle.reference_ids())
    raw = mock_judge(bundle, permutation, seed=3, drop_rate=1.0)
    assert json.loads(raw) == []


def test_mock_noise_is_monotone_in_drop_rate():
    bundle = make_bundle(13, 30)
    permutation = permute_references(bundle, seed=4)
    sizes = []
    for rate in (0.0, 0.25, 0.5, 0.75, 1.0):
        raw = mock_judge(bundle, permutation, seed=11, drop_rate=rate)
        sizes.append(len(json.loads(raw)))
    assert sizes == sorted(sizes, reverse=True)
    # coupled draws: the survivor set at a higher rate is a subset
    low = {e["paperId"] for e in json.loads(mock_judge(bundle, permutation, 11, drop_rate=0.25))}
    high = {e["paperId"] for e in json.loads(mock_judge(bundle, permutation, 11, drop_rate=0.5))}
    assert high <= low


def test_mock_hallucinations_are_new_ids():
    bundle = make_bundle(14, 8)
    permutation = permute_references(bundle, seed=6)
    raw = mock_judge(bundle, permutation, seed=2, hallucination_rate=0.5)
    run = parse_ranking_response(raw, bundle)
    assert run.dropped_hallucinations  # some fabricated ids appeared
    known = bundle.reference_id_set()
    assert all(pid not in known for pid in run.dropped_hallucinations)


def test_mock_output_is_byte_identical_across_processes():
    bundle = make_bundle(15, 5)
    permutation = permute_references(bundle, seed=1)
    local = mock_judge(bundle, permutation, seed=21, drop_rate=0.2, duplicate_rate=0.1)
    script = (
        "import json, sys; sys.path.insert(0, 'tests')\n"
        "from conftest import make_bundle\n"
        "from crisp.judge.permute import permute_references\n"
        "from crisp.judge.mock import mock_judge\n"
        "b = make_bundle(15, 5)\n"
        "p = permute_references(b, seed=1)\n"
        "out = mock_judge(b, p, seed=21, drop_rate=0.2, duplicate_rate=0.1)\n"
        "sys.stdout.write(out)\n"
    )
    result = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, check=True
    )
    assert result.stdout == local


def test_hidden_scores_are_stable_and_spread():
    a = hidden_score("a" * 40, 0)
    assert a == hidden_score("a" * 40, 0)
    assert a != hidden_score("a" * 40, 1)
    assert 0.0 <= a < 1.0


# --- providers and the PSC engine -------------------------------------------


def test_mock_provider_round_trips_through_the_prompt():
    bundle = make_bundle(16, 6)
    permutation = permute_references(bundle, seed=2)
    prompt = build_ranking_prompt(bundle, permutation)
    provider = MockJudgeProvider(score_seed=8)
    raw = provider.complete(prompt, JudgeConfig())
    assert raw == mock_judge(bundle, permutation, seed=8)
    assert provider.calls == 1


def test_make_provider_factory():
    assert isinstance(make_provider(JudgeConfig(provider="mock")), MockJudgeProvider)
    with pytest.raises(ValueError):
        make_provider(JudgeConfig(provider="carrier-pigeon"))


def test_run_psc_makes_exactly_three_calls():
    bundle = make_bundle(17, 5)
    provider = MockJudgeProvider(score_seed=0)
    result = run_psc(bundle, provider, JudgeConfig())
    assert provider.calls == 3
    assert len(result.runs) == 3
    assert [run.run_index for run in result.runs] == [1, 2, 3]
    assert [run.seed for run in result.runs] == list(DEFAULT_RUN_SEEDS)


def test_call_count_law_over_a_corpus():
    bundles = make_corpus(20)
    provider = MockJudgeProvider(score_seed=0)
    for bundle in bundles:
        run_psc(bundle, provider, JudgeConfig())
    assert provider.calls == 3 * len(bundles)


def test_derive_run_seeds_xors_master():
    assert derive_run_seeds(0) == (1, 2, 3)
    assert derive_run_seeds(12) == (1 ^ 12, 2 ^ 12, 3 ^ 12)
    assert len(set(derive_run_seeds(99))) == 3


def test_run_psc_rejects_degenerate_seeds():
    bundle = make_bundle(18, 3)
    provider = MockJudgeProvider()
    with pytest.raises(ValueError):
        run_psc(bundle, provider, JudgeConfig(), seeds=(5, 5, 6))
    with pytest.raises(ValueError):
        run_psc(bundle, provider, JudgeConfig(), seeds=(1, 2))


class FlakyProvider(ProviderAdapter):
    """Fails on chosen call numbers, otherwise delegates to the mock."""

    def __init__(self, fail_on: set[int]):
        super().__init__()
        self.fail_on = fail_on
        self._inner = MockJudgeProvider()

    def _complete(self, prompt, config):
        if self.calls in self.fail_on:
            raise ProviderError(f"synthetic outage on call {self.calls}")
        return self._inner._complete(prompt, config)


def test_run_psc_degrades_when_one_run_fails():
    bundle = make_bundle(19, 4)
    provider = FlakyProvider(fail_on={2})
    result = run_psc(bundle, provider, JudgeConfig())
    assert len(result.runs) == 2
    assert len(result.failures) == 1
    assert result.failures[0].run_index == 2
    assert result.succeeded


def test_run_psc_raises_when_all_runs_fail():
    bundle = make_bundle(20, 4)
    provider = FlakyProvider(fail_on={1, 2, 3})
    with pytest.raises(PscError) as excinfo:
        run_psc(bundle, provider, JudgeConfig())
    assert len(excinfo.value.failures) == 3
    assert provider.calls == 3


def test_run_psc_refuses_oversized_prompt():
    bundle = make_bundle(21, 12)
    provider = MockJudgeProvider()
    with pytest.raises(PromptTooLongError) as excinfo:
        run_psc(bundle, provider, JudgeConfig(max_context_tokens=10))
    assert excinfo.value.citing_id == bundle.citing.id
    assert provider.calls == 0  # refused before any provider call
