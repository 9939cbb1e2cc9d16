"""Per-class mining of confident concept itemsets.

An itemset is confident for a class when the fraction of its supporting
samples that the black box assigned to that class reaches `min_conf`, and
every proper subset is itself confident for the same class.  Mining runs
level-wise: size-K candidates are joined from confident (K-1)-itemsets
sharing a (K-2)-prefix, closure-checked, then support-checked, until the
level comes back empty or `max_k` is reached.

The closure requirement means confidence is not anti-monotone here the way
plain support is: a high-confidence itemset is dropped when one of its
subsets falls below the threshold, which keeps explanations built from the
store readable on their own.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .corpus import ClassLabel, Dataset
from .errors import ParseError, SchemaError, ZeroSupportError


@dataclass(frozen=True)
class MiningParams:
    min_conf: float = 0.8
    max_k: int = 3
    min_support: int = 1

    def __post_init__(self):
        if not 0.0 < self.min_conf <= 1.0:
            raise ValueError(f"min_conf must be in (0, 1], got {self.min_conf}")
        if self.max_k < 1:
            raise ValueError(f"max_k must be >= 1, got {self.max_k}")
        if self.min_support < 1:
            raise ValueError(f"min_support must be >= 1, got {self.min_support}")


@dataclass(frozen=True)
class ConfidentItemset:
    """A mined itemset with its class and support counts.

    `itemset` is a sorted tuple of concept ids; `confidence` equals
    support_class / support_total.
    """

    itemset: tuple[str, ...]
    class_id: int
    confidence: float
    support_total: int
    support_class: int

    @property
    def k(self) -> int:
        return len(self.itemset)


def itemset_order(ci: ConfidentItemset):
    """Canonical within-class ordering: size, then confidence descending,
    then the concept tuple."""
    return (len(ci.itemset), -ci.confidence, ci.itemset)


@dataclass
class MinedItemsets:
    """Confident itemsets grouped by class id, each list in canonical order."""

    per_class: dict[int, list[ConfidentItemset]]

    def for_class(self, class_id: int) -> list[ConfidentItemset]:
        return self.per_class.get(class_id, [])

    def all_itemsets(self) -> list[ConfidentItemset]:
        out: list[ConfidentItemset] = []
        for class_id in sorted(self.per_class):
            out.extend(self.per_class[class_id])
        return out

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.per_class.values())


def _posting_sets(dataset: Dataset) -> dict[str, frozenset[int]]:
    return {c: frozenset(ords) for c, ords in dataset.postings.items()}


def confidence(itemset, class_id: int, dataset: Dataset) -> tuple[float, int, int]:
    """Return (confidence, support_total, support_class) for one itemset.

    Raises ZeroSupportError when a concept is absent from the corpus or the
    itemset has no supporting samples at all.
    """
    concepts = tuple(itemset)
    if not concepts:
        raise ZeroSupportError("empty itemset")
    support: frozenset[int] | None = None
    for concept in concepts:
        ordinals = dataset.postings.get(concept)
        if ordinals is None:
            raise ZeroSupportError(f"concept {concept!r} does not occur in the corpus")
        support = frozenset(ordinals) if support is None else support & frozenset(ordinals)
    if not support:
        raise ZeroSupportError(f"itemset {concepts!r} has no supporting samples")
    members = dataset.class_members.get(class_id, ())
    support_class = len(support.intersection(members))
    return support_class / len(support), len(support), support_class


def mine_class(class_id: int, dataset: Dataset, params: MiningParams) -> list[ConfidentItemset]:
    """Mine all confident itemsets for one class, in canonical order."""
    postings = _posting_sets(dataset)
    class_set = frozenset(dataset.class_members.get(class_id, ()))
    out: list[ConfidentItemset] = []

    # Level 1: candidates are the concepts seen in this class's samples.
    seen = sorted({c for m in class_set for c in dataset.samples[m].concepts})
    level: dict[tuple[str, ...], frozenset[int]] = {}
    found: list[ConfidentItemset] = []
    for concept in seen:
        support = postings[concept]
        if len(support) < params.min_support:
            continue
        support_class = len(support & class_set)
        conf = support_class / len(support)
        if conf >= params.min_conf:
            level[(concept,)] = support
            found.append(ConfidentItemset((concept,), class_id, conf,
                                          len(support), support_class))
    out.extend(sorted(found, key=itemset_order))

    k = 2
    while level and k <= params.max_k:
        prev = level
        keys = sorted(prev)
        level = {}
        found = []
        for i, left in enumerate(keys):
            for right in keys[i + 1:]:
                if left[:-1] != right[:-1]:
                    break  # keys are sorted, prefix group ended
                candidate = left + (right[-1],)
                # Closure: every (k-1)-subset must already be confident.
                if any(candidate[:j] + candidate[j + 1:] not in prev
                       for j in range(len(candidate) - 2)):
                    continue
                support = prev[left] & postings[right[-1]]
                if len(support) < params.min_support or not support:
                    continue
                support_class = len(support & class_set)
                conf = support_class / len(support)
                if conf >= params.min_conf:
                    level[candidate] = support
                    found.append(ConfidentItemset(candidate, class_id, conf,
                                                  len(support), support_class))
        out.extend(sorted(found, key=itemset_order))
        k += 1
    return out


def mine_all(dataset: Dataset, params: MiningParams, jobs: int = 1) -> MinedItemsets:
    """Mine every class.  `jobs` > 1 mines classes on a thread pool; the
    result is assembled in class-id order either way."""
    class_ids = [c.id for c in dataset.classes]
    if jobs > 1 and len(class_ids) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            lists = list(pool.map(lambda q: mine_class(q, dataset, params), class_ids))
        per_class = dict(zip(class_ids, lists))
    else:
        per_class = {q: mine_class(q, dataset, params) for q in class_ids}
    return MinedItemsets(per_class=per_class)


def summarize(mined: MinedItemsets, classes: list[ClassLabel]) -> dict:
    """Counts per class per itemset size, for the mining summary file."""
    per_class = {}
    for label in classes:
        counts: dict[str, int] = {}
        for ci in mined.for_class(label.id):
            key = str(ci.k)
            counts[key] = counts.get(key, 0) + 1
        per_class[label.name] = counts
    return {"per_class": per_class, "total": mined.total}


def write_store(mined: MinedItemsets, classes: list[ClassLabel], path) -> None:
    """Write the store as one JSON record per itemset, sorted by class id
    then canonical order, so reruns on unchanged inputs are byte-identical."""
    names = {c.id: c.name for c in classes}
    with open(path, "w", encoding="utf-8") as fh:
        for class_id in sorted(mined.per_class):
            for ci in sorted(mined.per_class[class_id], key=itemset_order):
                fh.write(json.dumps({
                    "class": names[class_id],
                    "concepts": list(ci.itemset),
                    "confidence": ci.confidence,
                    "support_total": ci.support_total,
                    "support_class": ci.support_class,
                }, sort_keys=True) + "\n")


def load_store(path, classes: list[ClassLabel]) -> MinedItemsets:
    """Read a store written by `write_store`.  Unknown class names raise
    SchemaError; malformed lines raise ParseError."""
    ids = {c.name: c.id for c in classes}
    per_class: dict[int, list[ConfidentItemset]] = {c.id: [] for c in classes}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            try:
                class_name = record["class"]
                if not isinstance(record["concepts"], list):
                    raise TypeError("concepts must be a list")
                itemset = tuple(sorted(set(record["concepts"])))
                ci = ConfidentItemset(
                    itemset=itemset,
                    class_id=ids[class_name] if class_name in ids else -1,
                    confidence=float(record["confidence"]),
                    support_total=int(record["support_total"]),
                    support_class=int(record["support_class"]),
                )
            except (KeyError, TypeError, ValueError):
                raise ParseError(f"{path}:{lineno}: bad itemset record") from None
            if class_name not in ids:
                raise SchemaError(f"{path}:{lineno}: undeclared class {class_name!r}")
            if not itemset:
                raise ParseError(f"{path}:{lineno}: empty itemset")
            per_class[ci.class_id].append(ci)
    for class_id in per_class:
        per_class[class_id].sort(key=itemset_order)
    return MinedItemsets(per_class=per_class)
