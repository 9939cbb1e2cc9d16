"""Instance-wise explanations: match mined itemsets against one sample and
pick the class whose matches carry the most confidence.

The per-class score is the sum of confidences of the matched itemsets
(optionally capped to the top few).  The surrogate label is the argmax;
score ties fall back to the best single matched confidence, then the match
count, then the smaller class id.  A sample matching nothing gets ABSTAIN.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import ClassLabel, Sample
from .miner import ConfidentItemset, MinedItemsets

# Sentinel surrogate label for samples matching no itemset of any class.
# Class ids are dense non-negative ints, so -1 never collides.
ABSTAIN = -1


@dataclass
class InstanceExplanation:
    sample_id: str
    matched: dict[int, list[ConfidentItemset]]
    scores: dict[int, float]
    surrogate_label: int


def match_itemsets(sample: Sample, mined: MinedItemsets) -> dict[int, list[ConfidentItemset]]:
    """Per class, the mined itemsets fully contained in the sample's
    concept set, keeping the store's order."""
    return {
        class_id: [ci for ci in mined.per_class[class_id]
                   if sample.concepts.issuperset(ci.itemset)]
        for class_id in sorted(mined.per_class)
    }


def confidence_score(matched: list[ConfidentItemset], cap: int | None = None) -> float:
    """Sum of matched confidences.  With `cap`, only the top-`cap` itemsets
    by (confidence desc, size desc, concept tuple) count."""
    if cap is not None:
        if cap < 1:
            raise ValueError(f"cap must be >= 1, got {cap}")
        matched = sorted(matched, key=lambda ci: (-ci.confidence, -ci.k, ci.itemset))[:cap]
    return float(sum(ci.confidence for ci in matched))


def rank_key(score: float, matched: list[ConfidentItemset], class_id: int):
    """Ordering key for the surrogate argmax.  Tie-breaks, in order: best
    single matched confidence, number of matches, smaller class id."""
    best = max((ci.confidence for ci in matched), default=0.0)
    return (score, best, len(matched), -class_id)


def explain_instance(sample: Sample, mined: MinedItemsets,
                     cap: int | None = None) -> InstanceExplanation:
    matched = match_itemsets(sample, mined)
    scores = {q: confidence_score(items, cap) for q, items in matched.items()}
    label = ABSTAIN
    best_key = None
    for q in sorted(matched):
        if scores[q] <= 0.0:
            continue
        key = rank_key(scores[q], matched[q], q)
        if best_key is None or key > best_key:
            best_key = key
            label = q
    return InstanceExplanation(sample_id=sample.id, matched=matched,
                               scores=scores, surrogate_label=label)


def to_record(explanation: InstanceExplanation, classes: list[ClassLabel]) -> dict:
    """JSON-ready record, classes in id order."""
    names = {c.id: c.name for c in classes}
    label = explanation.surrogate_label
    return {
        "sample_id": explanation.sample_id,
        "surrogate_label": "ABSTAIN" if label == ABSTAIN else names[label],
        "per_class": [
            {
                "class": names[q],
                "cs": explanation.scores[q],
                "itemsets": [{"concepts": list(ci.itemset), "confidence": ci.confidence}
                             for ci in explanation.matched[q]],
            }
            for q in sorted(explanation.matched)
        ],
    }
