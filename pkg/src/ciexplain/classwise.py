"""Class-wise explanations: pick a small subset of a class's mined itemsets
that keeps surrogate fidelity high while staying compact, and a budgeted
global summary across classes.

The objective is a weighted sum of six rewards over a candidate subset:
fidelity on the class's samples, three compactness terms (itemset count,
summed concept count, longest itemset), pairwise concept overlap, and
coverage.  Rewards are normalized to [0, 1] against the hard bounds by
default; a switch keeps them on their raw scales instead.  The bounds
themselves (`max_size`, `max_concepts`, `max_len`) are hard constraints:
candidates violating them are infeasible.

Maximizing this objective is a non-monotone submodular-style problem, so
`local_search` runs the classic approximate scheme: several rounds of
seed-with-best-singleton then delete/exchange moves, each accepted only
when it improves the objective by a (1 + delta/n^4) factor, with every
round's solution removed from the ground set of the next.  The best round
wins.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations

from .corpus import ClassLabel, Dataset
from .errors import InfeasibleCandidateError, UndefinedSubspaceError
from .instance import explain_instance, rank_key
from .miner import ConfidentItemset, MinedItemsets, itemset_order


@dataclass(frozen=True)
class ObjectiveConfig:
    """Weights, hard bounds, and search parameters.

    `weights` follows the reward order (fidelity, size, concepts, length,
    overlap, coverage).  `swap_limit` is both the number of elements an
    exchange may remove and one less than the number of search rounds; it
    matches the three hard constraints.
    """

    weights: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    max_size: int = 10
    max_concepts: int = 25
    max_len: int = 3
    delta: float = 0.1
    swap_limit: int = 3
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != 6:
            raise ValueError(f"expected 6 weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
            raise ValueError("weights must be non-negative with at least one positive")
        for name in ("max_size", "max_concepts", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.swap_limit < 1:
            raise ValueError(f"swap_limit must be >= 1, got {self.swap_limit}")

    @property
    def pair_bound(self) -> int:
        """Largest possible overlap count given `max_size`, floored at 1 so
        the normalized overlap reward never divides by zero."""
        return max(1, self.max_size * (self.max_size - 1) // 2)


@dataclass
class PropertyRecord:
    fidelity: float
    size: int
    num_concepts: int
    max_length: int
    itemset_overlap: int
    coverage: int


@dataclass
class ClassExplanation:
    class_id: int
    itemsets: list[ConfidentItemset]
    properties: PropertyRecord
    objective: float


@dataclass
class GlobalExplanation:
    """Budgeted cross-class unit list.  `covered` counts samples matched by
    a unit of their own class; `conflicted` counts samples matched by units
    of two or more classes other than their own."""

    units: list[ConfidentItemset]
    covered: int
    conflicted: int


def interpretability_properties(candidate) -> tuple[int, int, int, int]:
    """(size, num_concepts, max_length, itemset_overlap) of a candidate.

    Overlap counts unordered itemset pairs sharing at least one concept.
    """
    itemsets = [ci.itemset for ci in candidate]
    size = len(itemsets)
    num_concepts = sum(len(t) for t in itemsets)
    max_length = max((len(t) for t in itemsets), default=0)
    overlap = 0
    for i in range(size):
        left = set(itemsets[i])
        for j in range(i + 1, size):
            if left.intersection(itemsets[j]):
                overlap += 1
    return size, num_concepts, max_length, overlap


def coverage(candidate, class_id: int, dataset: Dataset) -> int:
    """Number of the class's samples containing at least one candidate
    itemset."""
    itemsets = [ci.itemset for ci in candidate]
    count = 0
    for ordinal in dataset.class_members.get(class_id, ()):
        concepts = dataset.samples[ordinal].concepts
        if any(concepts.issuperset(t) for t in itemsets):
            count += 1
    return count


def fidelity(candidate, class_id: int, dataset: Dataset, mined: MinedItemsets) -> float:
    """Fraction of the class's samples the surrogate still labels with the
    class when its store entry is replaced by `candidate` (other classes
    keep their full mined sets)."""
    members = dataset.class_members.get(class_id, ())
    if not members:
        raise UndefinedSubspaceError(f"class {class_id} has no samples")
    trial = MinedItemsets({**mined.per_class,
                           class_id: sorted(candidate, key=itemset_order)})
    hits = 0
    for ordinal in members:
        if explain_instance(dataset.samples[ordinal], trial).surrogate_label == class_id:
            hits += 1
    return hits / len(members)


def _reward_vector(fid: float, props: tuple[int, int, int, int], cov: int,
                   class_total: int, cfg: ObjectiveConfig) -> tuple[float, ...]:
    size, num_concepts, max_length, overlap = props
    if cfg.normalized:
        return (
            fid,
            (cfg.max_size - size) / cfg.max_size,
            (cfg.max_concepts - num_concepts) / cfg.max_concepts,
            (cfg.max_len - max_length) / cfg.max_len,
            (cfg.pair_bound - overlap) / cfg.pair_bound,
            cov / class_total,
        )
    return (
        fid,
        float(cfg.max_size - size),
        float(cfg.max_concepts - num_concepts),
        float(cfg.max_len - max_length),
        float(cfg.pair_bound - overlap),
        float(cov),
    )


def _check_feasible(props: tuple[int, int, int, int], cfg: ObjectiveConfig) -> None:
    size, num_concepts, max_length, _ = props
    if size > cfg.max_size:
        raise InfeasibleCandidateError(f"size {size} exceeds bound {cfg.max_size}")
    if num_concepts > cfg.max_concepts:
        raise InfeasibleCandidateError(f"num_concepts {num_concepts} exceeds bound "
                                       f"{cfg.max_concepts}")
    if max_length > cfg.max_len:
        raise InfeasibleCandidateError(f"max_length {max_length} exceeds bound {cfg.max_len}")


def objective(candidate, class_id: int, dataset: Dataset, mined: MinedItemsets,
              cfg: ObjectiveConfig) -> float:
    """Weighted reward sum for a feasible candidate; raises
    InfeasibleCandidateError otherwise."""
    props = interpretability_properties(candidate)
    _check_feasible(props, cfg)
    fid = fidelity(candidate, class_id, dataset, mined)
    cov = coverage(candidate, class_id, dataset)
    rewards = _reward_vector(fid, props, cov, dataset.class_count(class_id), cfg)
    return sum(w * r for w, r in zip(cfg.weights, rewards))


_MISS = object()


class _SubsetObjective:
    """Memoized objective over subsets of one ground set.

    Everything that does not depend on the candidate is precomputed per
    class sample: which ground itemsets it contains, and the strongest
    rival ranking key among the other classes' full mined sets.  A subset's
    fidelity then reduces to a small set intersection per sample.  Subsets
    are index frozensets into `ground`; infeasible ones evaluate to None.
    """

    def __init__(self, ground: list[ConfidentItemset], class_id: int,
                 dataset: Dataset, mined: MinedItemsets, cfg: ObjectiveConfig):
        members = dataset.class_members.get(class_id, ())
        if not members:
            raise UndefinedSubspaceError(f"class {class_id} has no samples")
        self.cfg = cfg
        self.class_id = class_id
        self.class_total = len(members)
        self.ground = ground
        self.conf = [ci.confidence for ci in ground]
        self.lengths = [len(ci.itemset) for ci in ground]
        self.concept_sets = [frozenset(ci.itemset) for ci in ground]
        self.matched: list[frozenset[int]] = []
        self.rival: list[tuple | None] = []
        for ordinal in members:
            sample = dataset.samples[ordinal]
            self.matched.append(frozenset(
                i for i, ci in enumerate(ground) if sample.concepts.issuperset(ci.itemset)))
            best = None
            for other in sorted(mined.per_class):
                if other == class_id:
                    continue
                hits = [ci for ci in mined.per_class[other]
                        if sample.concepts.issuperset(ci.itemset)]
                score = sum(ci.confidence for ci in hits)
                if score > 0.0:
                    key = rank_key(score, hits, other)
                    if best is None or key > best:
                        best = key
            self.rival.append(best)
        self._memo: dict[frozenset[int], float | None] = {}

    def properties(self, subset: frozenset[int]) -> tuple[int, int, int, int]:
        size = len(subset)
        num_concepts = sum(self.lengths[i] for i in subset)
        max_length = max((self.lengths[i] for i in subset), default=0)
        overlap = sum(
            1 for i, j in combinations(sorted(subset), 2)
            if self.concept_sets[i] & self.concept_sets[j])
        return size, num_concepts, max_length, overlap

    def fidelity(self, subset: frozenset[int]) -> float:
        hits = 0
        for matched, rival in zip(self.matched, self.rival):
            inside = matched & subset
            if not inside:
                continue
            score = sum(self.conf[i] for i in inside)
            if score <= 0.0:
                continue
            key = (score, max(self.conf[i] for i in inside), len(inside), -self.class_id)
            if rival is None or key > rival:
                hits += 1
        return hits / self.class_total

    def coverage(self, subset: frozenset[int]) -> int:
        return sum(1 for matched in self.matched if matched & subset)

    def value(self, subset: frozenset[int]) -> float | None:
        """Objective of the subset, or None when infeasible."""
        cached = self._memo.get(subset, _MISS)
        if cached is not _MISS:
            return cached
        props = self.properties(subset)
        if (props[0] > self.cfg.max_size or props[1] > self.cfg.max_concepts
                or props[2] > self.cfg.max_len):
            result = None
        else:
            rewards = _reward_vector(self.fidelity(subset), props,
                                     self.coverage(subset), self.class_total, self.cfg)
            result = sum(w * r for w, r in zip(self.cfg.weights, rewards))
        self._memo[subset] = result
        return result

    def record(self, subset: frozenset[int]) -> PropertyRecord:
        props = self.properties(subset)
        return PropertyRecord(self.fidelity(subset), *props, self.coverage(subset))


def _best_move(obj: _SubsetObjective, current: frozenset[int], current_value: float,
               pool: list[int], step: float):
    """Best accepted delete/exchange from `current`, or None.

    A move must multiply the objective by at least `step` and strictly
    improve it (the strictness only matters when the current value is 0,
    where the factor test alone would allow value-preserving cycles).
    Equal-value moves keep the first one enumerated: deletes in ground
    order, then for each outside element the removal subsets by size.
    """
    best_value = None
    best_set = None
    inside = sorted(current)

    def consider(candidate: frozenset[int]):
        nonlocal best_value, best_set
        value = obj.value(candidate)
        if value is None or value <= current_value or value < current_value * step:
            return
        if best_value is None or value > best_value:
            best_value, best_set = value, candidate

    for i in inside:
        consider(current - {i})
    limit = min(obj.cfg.swap_limit, len(inside))
    for outside in pool:
        if outside in current:
            continue
        for removed in range(limit + 1):
            for drop in combinations(inside, removed):
                consider((current - set(drop)) | {outside})
    if best_set is None:
        return None
    return best_set, best_value


def local_search(ground_itemsets, class_id: int, dataset: Dataset, mined: MinedItemsets,
                 cfg: ObjectiveConfig) -> ClassExplanation:
    """Approximate maximization of the objective over subsets of
    `ground_itemsets` (normally the class's mined list).

    Runs `swap_limit + 1` rounds.  Each round seeds with the best feasible
    singleton of the remaining ground set, improves it with delete/exchange
    moves (an exchange swaps one outside element in for up to `swap_limit`
    inside elements; removing none is allowed), then removes its solution
    from the ground set of the next round.  Returns the best solution seen,
    where the always-feasible empty set is the initial incumbent.
    """
    ground = sorted(ground_itemsets, key=itemset_order)
    if not ground:
        raise ValueError("ground set is empty")
    obj = _SubsetObjective(ground, class_id, dataset, mined, cfg)

    # The empty set is always feasible and can outscore every reachable
    # solution (small rounds make the improvement factor coarse), so it
    # starts as the incumbent.
    best_subset: frozenset[int] = frozenset()
    best_value = obj.value(best_subset)
    pool = list(range(len(ground)))
    for _ in range(cfg.swap_limit + 1):
        if not pool:
            break
        step = 1.0 + cfg.delta / float(len(pool)) ** 4
        seed = None
        seed_value = None
        for i in pool:
            value = obj.value(frozenset((i,)))
            if value is not None and (seed_value is None or value > seed_value):
                seed, seed_value = i, value
        if seed is None:
            break  # pools only shrink, so later rounds cannot seed either
        current, current_value = frozenset((seed,)), seed_value
        while True:
            move = _best_move(obj, current, current_value, pool, step)
            if move is None:
                break
            current, current_value = move
        if current_value > best_value:
            best_subset, best_value = current, current_value
        pool = [i for i in pool if i not in current]

    return ClassExplanation(
        class_id=class_id,
        itemsets=[ground[i] for i in sorted(best_subset)],
        properties=obj.record(best_subset),
        objective=best_value,
    )


def explain_class(class_id: int, dataset: Dataset, mined: MinedItemsets,
                  cfg: ObjectiveConfig) -> ClassExplanation:
    """`local_search` with the class's mined itemsets as the ground set,
    degrading to an empty explanation when the class mined nothing or has
    no samples."""
    ground = mined.for_class(class_id)
    if not ground or not dataset.class_members.get(class_id):
        empty: list[ConfidentItemset] = []
        props = PropertyRecord(0.0, 0, 0, 0, 0, 0)
        if dataset.class_members.get(class_id):
            value = objective(empty, class_id, dataset, mined, cfg)
        else:
            value = 0.0
        return ClassExplanation(class_id, empty, props, value)
    return local_search(ground, class_id, dataset, mined, cfg)


def explain_all_classes(dataset: Dataset, mined: MinedItemsets, cfg: ObjectiveConfig,
                        jobs: int = 1) -> dict[int, ClassExplanation]:
    class_ids = [c.id for c in dataset.classes]
    if jobs > 1 and len(class_ids) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda q: explain_class(q, dataset, mined, cfg), class_ids))
        return dict(zip(class_ids, results))
    return {q: explain_class(q, dataset, mined, cfg) for q in class_ids}


def _as_units(source) -> list[ConfidentItemset]:
    if isinstance(source, MinedItemsets):
        return source.all_itemsets()
    units: list[ConfidentItemset] = []
    for entry in source:
        if isinstance(entry, ClassExplanation):
            units.extend(entry.itemsets)
        else:
            units.append(entry)
    return sorted(units, key=lambda ci: (ci.class_id,) + itemset_order(ci))


def global_explanation(source, dataset: Dataset, budget: int,
                       conflict_penalty: float = 1.0) -> GlobalExplanation:
    """Greedy pick of at most `budget` (class, itemset) units.

    Each step takes the unit with the largest marginal gain: newly covered
    samples of the unit's own class, minus `conflict_penalty` times the
    samples newly conflicted.  A sample is conflicted when units of two or
    more classes other than its own black-box class match it.  Gain ties
    prefer the higher confidence, then the smaller concept tuple, then the
    smaller class id.  Selection stops early once no unit gains.

    `source` may be a MinedItemsets or an iterable of ClassExplanation /
    ConfidentItemset.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if conflict_penalty < 0:
        raise ValueError(f"conflict_penalty must be >= 0, got {conflict_penalty}")
    units = _as_units(source)

    own_matches: list[frozenset[int]] = []
    raw_matches: list[frozenset[int]] = []
    for unit in units:
        raw = frozenset(i for i, s in enumerate(dataset.samples)
                        if s.concepts.issuperset(unit.itemset))
        raw_matches.append(raw)
        own_matches.append(frozenset(
            i for i in raw if dataset.samples[i].predicted_label == unit.class_id))

    def conflicted(sample_ordinal: int, classes: set[int]) -> bool:
        foreign = classes - {dataset.samples[sample_ordinal].predicted_label}
        return len(foreign) >= 2

    covered: set[int] = set()
    match_classes: dict[int, set[int]] = {}
    chosen: list[int] = []
    remaining = list(range(len(units)))
    while remaining and len(chosen) < budget:
        best_key = None
        best_index = None
        best_gain = None
        for j in remaining:
            unit = units[j]
            gain = float(len(own_matches[j] - covered))
            if conflict_penalty > 0:
                newly = 0
                for i in raw_matches[j]:
                    classes = match_classes.get(i)
                    if classes is None or unit.class_id in classes:
                        continue
                    if not conflicted(i, classes) and conflicted(i, classes | {unit.class_id}):
                        newly += 1
                gain -= conflict_penalty * newly
            key = (-gain, -unit.confidence, unit.itemset, unit.class_id)
            if best_key is None or key < best_key:
                best_key, best_index, best_gain = key, j, gain
        if best_gain is None or best_gain <= 0.0:
            break
        chosen.append(best_index)
        covered |= own_matches[best_index]
        for i in raw_matches[best_index]:
            match_classes.setdefault(i, set()).add(units[best_index].class_id)
        remaining.remove(best_index)

    conflict_count = sum(
        1 for i, classes in match_classes.items() if conflicted(i, classes))
    return GlobalExplanation(units=[units[j] for j in chosen],
                             covered=len(covered), conflicted=conflict_count)


def to_record(explanation: ClassExplanation, classes: list[ClassLabel]) -> dict:
    names = {c.id: c.name for c in classes}
    props = explanation.properties
    return {
        "class": names[explanation.class_id],
        "itemsets": [{"concepts": list(ci.itemset), "confidence": ci.confidence}
                     for ci in explanation.itemsets],
        "properties": {
            "fidelity": props.fidelity,
            "size": props.size,
            "num_concepts": props.num_concepts,
            "max_length": props.max_length,
            "itemset_overlap": props.itemset_overlap,
            "coverage": props.coverage,
        },
        "objective": explanation.objective,
    }


def global_to_record(explanation: GlobalExplanation, classes: list[ClassLabel],
                     budget: int, conflict_penalty: float) -> dict:
    names = {c.id: c.name for c in classes}
    return {
        "budget": budget,
        "conflict_penalty": conflict_penalty,
        "units": [{"class": names[ci.class_id], "concepts": list(ci.itemset),
                   "confidence": ci.confidence} for ci in explanation.units],
        "covered": explanation.covered,
        "conflicted": explanation.conflicted,
    }


def grid_candidates(base: ObjectiveConfig, weight_grid) -> list[ObjectiveConfig]:
    """Convenience for weight tuning: one config per weight vector."""
    return [replace(base, weights=tuple(w)) for w in weight_grid]
