"""Fidelity scoring, budget sweeps, and word-list baselines.

Fidelity is always agreement with the black box's predicted labels, never
with gold labels: the surrogate is judged on how well it mimics the model
it explains.  Sweeps re-run the pipeline under a budget on one of three
axes: `alpha` caps how many matched itemsets may contribute to an instance
score, `beta` bounds the class explanation size, and `gamma` bounds the
global explanation's unit count.

Two baselines give the fidelity numbers context.  `random` draws N distinct
words per class from that class's own texts; `greedy` takes the N words
whose presence is most predictive of the class.  Both label a sample by
word overlap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .corpus import Dataset, Sample, tokenize
from .classwise import (ClassExplanation, ObjectiveConfig, explain_all_classes,
                        global_explanation)
from .instance import ABSTAIN, explain_instance, rank_key
from .miner import ConfidentItemset, MinedItemsets, itemset_order

SWEEP_AXES = ("alpha", "beta", "gamma")
BASELINE_KINDS = ("random", "greedy")


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    budgets: tuple[int, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be a non-empty list of positive ints")
        if list(self.budgets) != sorted(set(self.budgets)):
            raise ValueError("budgets must be strictly increasing")


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    n_words: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"kind must be one of {BASELINE_KINDS}, got {self.kind!r}")
        if self.n_words < 1:
            raise ValueError(f"n_words must be >= 1, got {self.n_words}")

    @property
    def label(self) -> str:
        if self.kind == "random":
            return f"random(n={self.n_words},seed={self.seed})"
        return f"greedy(n={self.n_words})"


@dataclass
class BaselineResult:
    config: BaselineConfig
    words: dict[int, list[str]]
    fidelity: float


@dataclass
class EvalReport:
    instance_fidelity: float
    classwise_fidelity: float
    abstain_rate: float
    curves: dict[str, list[tuple[int, float]]] = field(default_factory=dict)
    baselines: list[BaselineResult] = field(default_factory=list)

    @property
    def baseline_scores(self) -> dict[str, float]:
        return {r.config.label: r.fidelity for r in self.baselines}


def instance_fidelity(dataset: Dataset, mined: MinedItemsets,
                      cap: int | None = None) -> float:
    """Fraction of samples whose surrogate label matches the black box.
    ABSTAIN counts as a miss."""
    hits = sum(
        1 for s in dataset.samples
        if explain_instance(s, mined, cap).surrogate_label == s.predicted_label)
    return hits / dataset.size


def abstain_rate(dataset: Dataset, mined: MinedItemsets) -> float:
    misses = sum(
        1 for s in dataset.samples
        if explain_instance(s, mined).surrogate_label == ABSTAIN)
    return misses / dataset.size


def classwise_fidelity(explanations: dict[int, ClassExplanation],
                       dataset: Dataset) -> float:
    """Instance fidelity when the store holds only the class explanations.

    Requires one explanation per declared class (empty ones are fine).
    """
    missing = [c.id for c in dataset.classes if c.id not in explanations]
    if missing:
        raise ValueError(f"missing explanations for classes {missing}")
    store = MinedItemsets({
        q: sorted(explanations[q].itemsets, key=itemset_order)
        for q in explanations})
    return instance_fidelity(dataset, store)


def label_with_units(units: list[ConfidentItemset], sample: Sample) -> int:
    """Global-explanation labeling: the class whose matching units carry
    the highest summed confidence, with the instance tie-breaks."""
    matched: dict[int, list[ConfidentItemset]] = {}
    for unit in units:
        if sample.concepts.issuperset(unit.itemset):
            matched.setdefault(unit.class_id, []).append(unit)
    label = ABSTAIN
    best = None
    for class_id in sorted(matched):
        score = sum(ci.confidence for ci in matched[class_id])
        if score <= 0.0:
            continue
        key = rank_key(score, matched[class_id], class_id)
        if best is None or key > best:
            best, label = key, class_id
    return label


def global_fidelity(units: list[ConfidentItemset], dataset: Dataset) -> float:
    hits = sum(1 for s in dataset.samples if label_with_units(units, s) == s.predicted_label)
    return hits / dataset.size


def sweep(dataset: Dataset, mined: MinedItemsets, cfg: SweepConfig,
          obj_cfg: ObjectiveConfig, conflict_penalty: float = 1.0,
          jobs: int = 1) -> list[tuple[int, float]]:
    """Fidelity at each budget along one axis, in budget order."""
    points: list[tuple[int, float]] = []
    for budget in cfg.budgets:
        if cfg.axis == "alpha":
            value = instance_fidelity(dataset, mined, cap=budget)
        elif cfg.axis == "beta":
            bounded = replace(obj_cfg, max_size=budget)
            value = classwise_fidelity(
                explain_all_classes(dataset, mined, bounded, jobs), dataset)
        else:
            result = global_explanation(mined, dataset, budget, conflict_penalty)
            value = global_fidelity(result.units, dataset)
        points.append((budget, value))
    return points


def _class_vocabulary(dataset: Dataset, class_id: int) -> list[str]:
    words = set()
    for ordinal in dataset.class_members.get(class_id, ()):
        words.update(tokenize(dataset.samples[ordinal].text))
    return sorted(words)


def _word_overlap_fidelity(words: dict[int, list[str]], dataset: Dataset) -> float:
    word_sets = {q: frozenset(ws) for q, ws in words.items()}
    class_ids = sorted(word_sets)
    hits = 0
    for sample in dataset.samples:
        tokens = set(tokenize(sample.text))
        label = class_ids[0]
        best = -1
        for q in class_ids:  # ascending, so ties keep the smaller id
            overlap = len(tokens & word_sets[q])
            if overlap > best:
                best, label = overlap, q
        hits += label == sample.predicted_label
    return hits / dataset.size


def baseline_random(dataset: Dataset, cfg: BaselineConfig) -> BaselineResult:
    """N distinct words per class, drawn uniformly from the class's own
    vocabulary with the configured seed."""
    rng = random.Random(cfg.seed)
    words: dict[int, list[str]] = {}
    for label in dataset.classes:
        vocabulary = _class_vocabulary(dataset, label.id)
        if len(vocabulary) <= cfg.n_words:
            picked = vocabulary
        else:
            picked = rng.sample(vocabulary, cfg.n_words)
        words[label.id] = sorted(picked)
    return BaselineResult(cfg, words, _word_overlap_fidelity(words, dataset))


def baseline_greedy(dataset: Dataset, cfg: BaselineConfig) -> BaselineResult:
    """Top-N words per class by impact: the fraction of a word's samples
    the black box assigned to the class.  Ties go to the smaller word."""
    containing: dict[str, int] = {}
    per_class: dict[tuple[int, str], int] = {}
    for sample in dataset.samples:
        for token in set(tokenize(sample.text)):
            containing[token] = containing.get(token, 0) + 1
            key = (sample.predicted_label, token)
            per_class[key] = per_class.get(key, 0) + 1
    words: dict[int, list[str]] = {}
    for label in dataset.classes:
        scored = [
            (per_class.get((label.id, w), 0) / containing[w], w)
            for w in _class_vocabulary(dataset, label.id)]
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        words[label.id] = sorted(w for _, w in scored[:cfg.n_words])
    return BaselineResult(cfg, words, _word_overlap_fidelity(words, dataset))


def run_baseline(dataset: Dataset, cfg: BaselineConfig) -> BaselineResult:
    if cfg.kind == "random":
        return baseline_random(dataset, cfg)
    return baseline_greedy(dataset, cfg)


def evaluate(dataset: Dataset, mined: MinedItemsets, obj_cfg: ObjectiveConfig,
             sweeps=(), baselines=(), conflict_penalty: float = 1.0,
             jobs: int = 1) -> EvalReport:
    explanations = explain_all_classes(dataset, mined, obj_cfg, jobs)
    report = EvalReport(
        instance_fidelity=instance_fidelity(dataset, mined),
        classwise_fidelity=classwise_fidelity(explanations, dataset),
        abstain_rate=abstain_rate(dataset, mined),
    )
    for sweep_cfg in sweeps:
        report.curves[sweep_cfg.axis] = sweep(
            dataset, mined, sweep_cfg, obj_cfg, conflict_penalty, jobs)
    for baseline_cfg in baselines:
        report.baselines.append(run_baseline(dataset, baseline_cfg))
    return report


def grid_search_weights(dataset: Dataset, mined: MinedItemsets,
                        base_cfg: ObjectiveConfig, weight_grid,
                        jobs: int = 1) -> tuple[tuple[float, ...], float]:
    """Pick the weight vector whose class explanations score the best
    classwise fidelity; ties keep the earlier vector."""
    best_weights = None
    best_score = None
    for weights in weight_grid:
        cfg = replace(base_cfg, weights=tuple(weights))
        score = classwise_fidelity(
            explain_all_classes(dataset, mined, cfg, jobs), dataset)
        if best_score is None or score > best_score:
            best_weights, best_score = cfg.weights, score
    if best_weights is None:
        raise ValueError("weight grid is empty")
    return best_weights, best_score
