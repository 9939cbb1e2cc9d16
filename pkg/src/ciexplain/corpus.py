"""Corpus loading, concept annotation, and the immutable sample index.

Dataset files hold one JSON record per line.  The first non-blank line is a
header declaring the class names; every following line is a sample:

    {"classes": ["NEGATIVE", "POSITIVE"]}
    {"id": "s1", "text": "...", "concepts": ["C0007102"],
     "predicted_label": "POSITIVE", "gold_label": "NEGATIVE"}

`concepts` and `gold_label` are optional.  `predicted_label` is the
black-box classifier's output and drives everything downstream; `gold_label`
is carried along for reporting only.

Concepts can come from three places (the `mode` argument):

    pre-annotated   read the record's `concepts` array verbatim
    lexicon         run the gazetteer in `annotate` over `text`
    token-fallback  every distinct lower-cased alphabetic token of length
                    >= 3 becomes its own concept

A lexicon is a tab-separated file of `surface form<TAB>concept id<TAB>
preferred name` rows (the third column may be omitted).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import EmptyInputError, ParseError, SchemaError, UnknownIdError

MODES = ("pre-annotated", "lexicon", "token-fallback")

# Longest surface form considered by the gazetteer, in tokens.
DEFAULT_MATCH_WINDOW = 6

# Minimum token length in token-fallback mode; shorter tokens are mostly
# stopword debris and inflate the itemset lattice for no gain.
FALLBACK_MIN_LEN = 3

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lower-case `text` and split it into tokens, treating every
    non-alphanumeric character as a boundary."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class ClassLabel:
    id: int
    name: str


@dataclass(frozen=True)
class Concept:
    id: str
    preferred_name: str = ""


@dataclass(frozen=True)
class Sample:
    """One classified text with its concept set.

    `concepts` is a set: annotators may hit the same concept several times
    in a text but only presence matters downstream.
    """

    id: str
    text: str
    concepts: frozenset[str]
    predicted_label: int
    gold_label: int | None = None


@dataclass
class Lexicon:
    """Surface-form gazetteer mapping normalized strings to concept ids.

    Surfaces are lower-cased with whitespace collapsed.  When a file maps
    the same surface twice, the first row wins.
    """

    entries: dict[str, str]
    names: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for surface in self.entries:
            if not surface or surface != _normalize_surface(surface):
                raise ValueError(f"surface form not normalized: {surface!r}")

    @property
    def max_surface_tokens(self) -> int:
        return max((len(s.split(" ")) for s in self.entries), default=0)


@dataclass
class Dataset:
    """Immutable index over a loaded corpus.

    `postings` maps each concept id to the sorted ordinals of the samples
    containing it; `class_members` maps each class id to the sorted
    ordinals of the samples the black box assigned to it.  Ordinals are
    positions in `samples`, which keeps file order.
    """

    samples: list[Sample]
    classes: list[ClassLabel]
    postings: dict[str, list[int]]
    class_members: dict[int, list[int]]
    sample_index: dict[str, int] = field(default_factory=dict, repr=False)
    class_index: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.samples)

    def class_count(self, class_id: int) -> int:
        return len(self.class_members.get(class_id, ()))

    def sample_by_id(self, sample_id: str) -> Sample:
        try:
            return self.samples[self.sample_index[sample_id]]
        except KeyError:
            raise UnknownIdError(f"unknown sample id: {sample_id!r}") from None

    def class_by_name(self, name: str) -> ClassLabel:
        try:
            return self.classes[self.class_index[name]]
        except KeyError:
            raise UnknownIdError(f"unknown class name: {name!r}") from None

    def class_name(self, class_id: int) -> str:
        return self.classes[class_id].name


def _normalize_surface(surface: str) -> str:
    return " ".join(tokenize(surface))


def load_lexicon(path) -> Lexicon:
    entries: dict[str, str] = {}
    names: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ParseError(f"{path}:{lineno}: expected at least 2 tab-separated fields")
            surface = _normalize_surface(fields[0])
            concept_id = fields[1].strip()
            if not surface:
                raise ParseError(f"{path}:{lineno}: empty surface form")
            if not concept_id:
                raise ParseError(f"{path}:{lineno}: empty concept id")
            if surface not in entries:
                entries[surface] = concept_id
            names.setdefault(concept_id, fields[2].strip() if len(fields) > 2 else concept_id)
    return Lexicon(entries=entries, names=names)


def annotate(text: str, lexicon: Lexicon, max_window: int = DEFAULT_MATCH_WINDOW) -> set[str]:
    """Greedy longest-match scan of `text` against the lexicon.

    At each token position the longest matching surface form (up to
    `max_window` tokens) wins and the scan resumes after it, so matches
    never overlap.  Returns the set of matched concept ids.
    """
    tokens = tokenize(text)
    window = min(max_window, lexicon.max_surface_tokens)
    found: set[str] = set()
    i = 0
    n = len(tokens)
    while i < n:
        for length in range(min(window, n - i), 0, -1):
            surface = " ".join(tokens[i:i + length])
            concept_id = lexicon.entries.get(surface)
            if concept_id is not None:
                found.add(concept_id)
                i += length
                break
        else:
            i += 1
    return found


def fallback_concepts(text: str) -> set[str]:
    """Token-fallback annotation: distinct alphabetic tokens of length >= 3."""
    return {t for t in tokenize(text) if t.isalpha() and len(t) >= FALLBACK_MIN_LEN}


def build_index(samples: list[Sample], classes: list[ClassLabel]) -> Dataset:
    """Assemble the postings and class-membership index over `samples`.

    Raises SchemaError when a sample's label falls outside the declared
    classes, and EmptyInputError when there are no samples at all.
    """
    if not samples:
        raise EmptyInputError("dataset contains no samples")
    if [c.id for c in classes] != list(range(len(classes))):
        raise SchemaError("class ids must be dense and in declaration order")
    postings: dict[str, list[int]] = {}
    class_members: dict[int, list[int]] = {c.id: [] for c in classes}
    sample_index: dict[str, int] = {}
    for ordinal, sample in enumerate(samples):
        if sample.predicted_label not in class_members:
            raise SchemaError(f"sample {sample.id!r}: predicted label {sample.predicted_label} "
                              "is not a declared class")
        if sample.id in sample_index:
            raise SchemaError(f"duplicate sample id: {sample.id!r}")
        sample_index[sample.id] = ordinal
        class_members[sample.predicted_label].append(ordinal)
        for concept in sample.concepts:
            postings.setdefault(concept, []).append(ordinal)
    # Ordinals were appended in increasing order, so lists are already
    # sorted; sort anyway to keep the invariant independent of that detail.
    for lst in postings.values():
        lst.sort()
    for lst in class_members.values():
        lst.sort()
    return Dataset(
        samples=samples,
        classes=classes,
        postings=postings,
        class_members=class_members,
        sample_index=sample_index,
        class_index={c.name: c.id for c in classes},
    )


def _record_concepts(record: dict, mode: str, lexicon: Lexicon | None,
                     max_window: int) -> frozenset[str]:
    if mode == "pre-annotated":
        return frozenset(record.get("concepts") or ())
    if mode == "lexicon":
        return frozenset(annotate(record["text"], lexicon, max_window))
    return frozenset(fallback_concepts(record["text"]))


def load_dataset(path, mode: str = "pre-annotated", lexicon: Lexicon | None = None,
                 max_window: int = DEFAULT_MATCH_WINDOW) -> Dataset:
    """Read a dataset file and return its index.

    Raises ParseError for malformed lines (naming the line number),
    SchemaError for undeclared class names or bad field types, and
    EmptyInputError when no sample records follow the header.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "lexicon" and lexicon is None:
        raise ValueError("lexicon mode requires a lexicon")

    classes: list[ClassLabel] | None = None
    name_to_id: dict[str, int] = {}
    samples: list[Sample] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: record must be a JSON object")

            if classes is None:
                declared = record.get("classes")
                if not isinstance(declared, list) or not declared \
                        or not all(isinstance(n, str) and n for n in declared):
                    raise SchemaError(f"{path}:{lineno}: first record must declare "
                                      "a non-empty list of class names")
                if len(set(declared)) != len(declared):
                    raise SchemaError(f"{path}:{lineno}: duplicate class names")
                classes = [ClassLabel(i, name) for i, name in enumerate(declared)]
                name_to_id = {name: i for i, name in enumerate(declared)}
                continue

            for key, kind in (("id", str), ("text", str), ("predicted_label", str)):
                if not isinstance(record.get(key), kind):
                    raise ParseError(f"{path}:{lineno}: missing or non-string field {key!r}")
            raw_concepts = record.get("concepts")
            if raw_concepts is not None and (
                    not isinstance(raw_concepts, list)
                    or not all(isinstance(c, str) and c for c in raw_concepts)):
                raise ParseError(f"{path}:{lineno}: concepts must be a list of non-empty strings")
            predicted = name_to_id.get(record["predicted_label"])
            if predicted is None:
                raise SchemaError(f"{path}:{lineno}: undeclared class "
                                  f"{record['predicted_label']!r}")
            gold = record.get("gold_label")
            if gold is not None:
                if gold not in name_to_id:
                    raise SchemaError(f"{path}:{lineno}: undeclared gold class {gold!r}")
                gold = name_to_id[gold]
            samples.append(Sample(
                id=record["id"],
                text=record["text"],
                concepts=_record_concepts(record, mode, lexicon, max_window),
                predicted_label=predicted,
                gold_label=gold,
            ))

    if classes is None:
        raise SchemaError(f"{path}: missing header record declaring classes")
    return build_index(samples, classes)
