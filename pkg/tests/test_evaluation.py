"""Fidelity metrics, budget sweeps, and the word-list baselines."""

import random

import pytest

from ciexplain.classwise import ObjectiveConfig, explain_all_classes, global_explanation
from ciexplain.evaluation import (
    BaselineConfig,
    SweepConfig,
    abstain_rate,
    baseline_greedy,
    baseline_random,
    classwise_fidelity,
    evaluate,
    global_fidelity,
    grid_search_weights,
    instance_fidelity,
    label_with_units,
    run_baseline,
    sweep,
)
from ciexplain.instance import ABSTAIN
from ciexplain.miner import MiningParams, mine_all

from corpora import indep_vocab_corpus, random_corpus, trigger_corpus
from oracles import as_store, brute_label


# --- configs ---------------------------------------------------------------

def test_sweep_config_validation():
    assert SweepConfig("alpha", [1, 2, 5]).budgets == (1, 2, 5)
    for axis, budgets in [("delta", [1]), ("alpha", []), ("alpha", [0, 1]),
                          ("alpha", [2, 1]), ("alpha", [1, 1])]:
        with pytest.raises(ValueError):
            SweepConfig(axis, budgets)


def test_baseline_config_validation():
    assert BaselineConfig("random", 5, 3).label == "random(n=5,seed=3)"
    assert BaselineConfig("greedy", 2).label == "greedy(n=2)"
    with pytest.raises(ValueError):
        BaselineConfig("lime")
    with pytest.raises(ValueError):
        BaselineConfig("random", n_words=0)


# --- fidelity metrics -------------------------------------------------------

def test_instance_fidelity_full_store(toy6, mined06):
    assert instance_fidelity(toy6, mined06) == 1.0


def test_instance_fidelity_sparse_store(toy6, mined08):
    # only class A mines anything at 0.8, so all of B abstains
    assert instance_fidelity(toy6, mined08) == 0.5
    assert abstain_rate(toy6, mined08) == 0.5


def test_abstain_rate_zero_with_full_store(toy6, mined06):
    assert abstain_rate(toy6, mined06) == 0.0


def test_instance_fidelity_with_cap(toy6, mined06):
    assert instance_fidelity(toy6, mined06, cap=1) == 1.0


def test_instance_fidelity_matches_label_oracle():
    rng = random.Random(31)
    ds = random_corpus(rng, n_samples=40, n_concepts=7, n_classes=3)
    mined = mine_all(ds, MiningParams(min_conf=0.5, max_k=2))
    store = as_store(mined)
    expected = sum(
        1 for s in ds.samples
        if brute_label(s.concepts, store) == s.predicted_label) / ds.size
    assert instance_fidelity(ds, mined) == pytest.approx(expected)


def test_classwise_fidelity_of_search_output(toy6, mined06):
    ces = explain_all_classes(toy6, mined06, ObjectiveConfig())
    assert classwise_fidelity(ces, toy6) == 1.0


def test_classwise_fidelity_requires_every_class(toy6, mined06):
    ces = explain_all_classes(toy6, mined06, ObjectiveConfig())
    with pytest.raises(ValueError, match=r"\[1\]"):
        classwise_fidelity({0: ces[0]}, toy6)


def test_classwise_fidelity_with_weak_class_b(toy6, mined06):
    ces = explain_all_classes(toy6, mined06, ObjectiveConfig())
    # upweight fidelity so the best singleton beats the empty set at size 1
    weak = explain_all_classes(
        toy6, mined06, ObjectiveConfig(weights=(4, 1, 1, 1, 1, 1),
                                       max_size=1, max_len=1))
    assert [c.itemset for c in weak[1].itemsets] == [("b",)]
    mixed = {0: ces[0], 1: weak[1]}
    # the lone singleton recovers 2 of the 3 B samples
    assert classwise_fidelity(mixed, toy6) == pytest.approx(5 / 6)


# --- global labeling --------------------------------------------------------

def test_label_with_units_and_global_fidelity(toy6, mined06):
    units = global_explanation(mined06, toy6, budget=3).units
    labels = [label_with_units(units, s) for s in toy6.samples]
    assert labels == [0, 0, 0, 1, 1, 1]
    assert global_fidelity(units, toy6) == 1.0


def test_label_with_units_abstains(toy6, mined06):
    units = [u for u in global_explanation(mined06, toy6, budget=3).units
             if u.class_id == 0]
    assert label_with_units(units, toy6.sample_by_id("s5")) == ABSTAIN


# --- sweeps ------------------------------------------------------------------

def test_beta_sweep_non_decreasing_to_one(toy6, mined06):
    curve = sweep(toy6, mined06, SweepConfig("beta", [1, 2, 3]), ObjectiveConfig())
    budgets = [b for b, _ in curve]
    values = [v for _, v in curve]
    assert budgets == [1, 2, 3]
    assert values == pytest.approx([0.5, 1.0, 1.0])
    assert values == sorted(values) and values[-1] == 1.0


def test_alpha_sweep(toy6, mined06, mined08):
    assert sweep(toy6, mined06, SweepConfig("alpha", [1, 2]),
                 ObjectiveConfig()) == [(1, 1.0), (2, 1.0)]
    assert sweep(toy6, mined08, SweepConfig("alpha", [1]),
                 ObjectiveConfig()) == [(1, 0.5)]


def test_gamma_sweep(toy6, mined06):
    assert sweep(toy6, mined06, SweepConfig("gamma", [3]), ObjectiveConfig()) == [(3, 1.0)]
    assert sweep(toy6, mined06, SweepConfig("gamma", [1]), ObjectiveConfig()) == [(1, 0.5)]


def test_single_point_sweep(toy6, mined06):
    curve = sweep(toy6, mined06, SweepConfig("beta", [2]), ObjectiveConfig())
    assert len(curve) == 1 and curve[0][0] == 2


# --- baselines ----------------------------------------------------------------

def test_baseline_random_reproducible(toy6):
    cfg = BaselineConfig("random", n_words=2, seed=42)
    first, second = baseline_random(toy6, cfg), baseline_random(toy6, cfg)
    assert first.words == second.words
    assert first.fidelity == second.fidelity
    assert all(len(ws) == 2 for ws in first.words.values())


def test_baseline_random_seed_changes_draw(toy6):
    draws = {tuple(tuple(baseline_random(toy6, BaselineConfig("random", 2, seed)).words[0])
                   for _ in range(1))
             for seed in range(10)}
    assert len(draws) > 1


def test_baseline_random_takes_whole_small_vocabulary(toy6):
    result = baseline_random(toy6, BaselineConfig("random", n_words=5, seed=0))
    assert result.words == {0: ["a", "b", "c"], 1: ["b", "c"]}
    # a/b tie on s4..s6 resolves to class A, so only the A half survives
    assert result.fidelity == pytest.approx(0.5)


def test_baseline_greedy_toy6(toy6):
    result = baseline_greedy(toy6, BaselineConfig("greedy", n_words=1))
    assert result.words == {0: ["a"], 1: ["b"]}
    assert result.fidelity == pytest.approx(5 / 6)


def test_baseline_greedy_word_order_is_sorted(toy6):
    result = baseline_greedy(toy6, BaselineConfig("greedy", n_words=3))
    assert result.words[0] == ["a", "b", "c"]
    assert result.words[1] == ["b", "c"]


def test_run_baseline_dispatch(toy6):
    assert run_baseline(toy6, BaselineConfig("greedy", 1)).words[0] == ["a"]
    assert run_baseline(toy6, BaselineConfig("random", 5, 0)).fidelity == pytest.approx(0.5)


def test_random_baseline_sits_at_chance_level():
    rng = random.Random(37)
    ds = indep_vocab_corpus(rng, n_samples=400, n_classes=4, vocab_size=40,
                            words_per_sample=6)
    scores = [baseline_random(ds, BaselineConfig("random", 10, seed)).fidelity
              for seed in range(20)]
    mean = sum(scores) / len(scores)
    assert abs(mean - 0.25) < 0.1


def test_trigger_corpus_metrics_are_perfect():
    ds = trigger_corpus(n_classes=3, per_class=20, n_noise=10)
    mined = mine_all(ds, MiningParams(min_conf=0.8, max_k=2))
    assert instance_fidelity(ds, mined) == 1.0
    ces = explain_all_classes(ds, mined, ObjectiveConfig(max_size=1))
    assert classwise_fidelity(ces, ds) == 1.0


# --- report assembly -----------------------------------------------------------

def test_evaluate_assembles_report(toy6, mined06):
    report = evaluate(
        toy6, mined06, ObjectiveConfig(),
        sweeps=[SweepConfig("beta", [1, 2]), SweepConfig("gamma", [3])],
        baselines=[BaselineConfig("greedy", 1), BaselineConfig("random", 2, 7)])
    assert report.instance_fidelity == 1.0
    assert report.classwise_fidelity == 1.0
    assert report.abstain_rate == 0.0
    assert report.curves["beta"] == [(1, 0.5), (2, 1.0)]
    assert report.curves["gamma"] == [(3, 1.0)]
    labels = [r.config.label for r in report.baselines]
    assert labels == ["greedy(n=1)", "random(n=2,seed=7)"]
    assert report.baseline_scores["greedy(n=1)"] == pytest.approx(5 / 6)


def test_evaluate_without_extras(toy6, mined06):
    report = evaluate(toy6, mined06, ObjectiveConfig())
    assert report.curves == {} and report.baselines == []


def test_evaluate_jobs_agree(toy6, mined06):
    serial = evaluate(toy6, mined06, ObjectiveConfig(), sweeps=[SweepConfig("beta", [1, 2])])
    threaded = evaluate(toy6, mined06, ObjectiveConfig(),
                        sweeps=[SweepConfig("beta", [1, 2])], jobs=2)
    assert serial.curves == threaded.curves
    assert serial.classwise_fidelity == threaded.classwise_fidelity


def test_grid_search_weights(toy6, mined06):
    grid = [(1, 1, 1, 1, 1, 1), (1, 0, 0, 0, 0, 0)]
    weights, score = grid_search_weights(toy6, mined06, ObjectiveConfig(), grid)
    assert weights == (1.0,) * 6  # tie at 1.0 keeps the earlier vector
    assert score == 1.0
    with pytest.raises(ValueError):
        grid_search_weights(toy6, mined06, ObjectiveConfig(), [])
