import json

import pytest

from ciexplain.corpus import (Lexicon, annotate, build_index, fallback_concepts,
                              load_dataset, load_lexicon, tokenize)
from ciexplain.corpus import ClassLabel, Sample
from ciexplain.errors import (EmptyInputError, ParseError, SchemaError,
                              UnknownIdError)

import corpora


def write_lines(tmp_path, lines, name="data.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_load_toy6(toy6):
    assert toy6.size == 6
    assert [c.name for c in toy6.classes] == ["A", "B"]
    assert toy6.class_count(0) == 3
    assert toy6.class_count(1) == 3
    assert toy6.sample_by_id("s4").concepts == frozenset({"b", "c"})


def test_load_single_record_empty_concepts(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["X"]}',
        '{"id": "s0", "text": "whatever", "concepts": [], "predicted_label": "X"}',
    ])
    ds = load_dataset(path)
    assert ds.size == 1
    assert ds.postings == {}
    assert ds.samples[0].concepts == frozenset()


def test_load_missing_concepts_treated_as_empty(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["X"]}',
        '{"id": "s0", "text": "t", "predicted_label": "X"}',
    ])
    assert load_dataset(path).samples[0].concepts == frozenset()


def test_load_undeclared_class_is_schema_error(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "t", "predicted_label": "B"}',
    ])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_load_undeclared_gold_class_is_schema_error(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "t", "predicted_label": "A", "gold_label": "Z"}',
    ])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_load_malformed_line_names_line_number(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "t", "predicted_label": "A"}',
        "{not json",
    ])
    with pytest.raises(ParseError, match=":3:"):
        load_dataset(path)


def test_load_missing_field_is_parse_error(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"text": "t", "predicted_label": "A"}',
    ])
    with pytest.raises(ParseError, match=":2:"):
        load_dataset(path)


def test_load_header_only_is_empty_input(tmp_path):
    path = write_lines(tmp_path, ['{"classes": ["A", "B"]}'])
    with pytest.raises(EmptyInputError):
        load_dataset(path)


def test_load_missing_header_is_schema_error(tmp_path):
    path = write_lines(tmp_path, [
        '{"id": "s0", "text": "t", "predicted_label": "A"}',
    ])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_load_duplicate_sample_id_is_schema_error(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "t", "predicted_label": "A"}',
        '{"id": "s0", "text": "u", "predicted_label": "A"}',
    ])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_gold_label_is_carried(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A", "B"]}',
        '{"id": "s0", "text": "t", "predicted_label": "A", "gold_label": "B"}',
    ])
    assert load_dataset(path).samples[0].gold_label == 1


def test_tokenize_strips_punctuation():
    assert tokenize("Heart-attack, now!") == ["heart", "attack", "now"]
    assert tokenize("") == []


def test_fallback_concepts_filters_short_and_nonalpha():
    assert fallback_concepts("An MI at 3pm, the myocardial infarction") == {
        "myocardial", "infarction", "the"}


def test_token_fallback_mode(tmp_path):
    path = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "Acute MI, acute pain", "predicted_label": "A"}',
    ])
    ds = load_dataset(path, mode="token-fallback")
    assert ds.samples[0].concepts == frozenset({"acute", "pain"})


# -- lexicon and annotate ---------------------------------------------------

LEX = Lexicon(entries={
    "heart attack": "C01",
    "heart": "C02",
    "acute heart attack": "C03",
    "aspirin": "C04",
})


def test_annotate_prefers_longest_match():
    assert annotate("an acute heart attack today", LEX) == {"C03"}
    assert annotate("the heart attack", LEX) == {"C01"}
    assert annotate("a healthy heart", LEX) == {"C02"}


def test_annotate_no_overlap_after_match():
    # "heart attack" consumes both tokens, so "heart" cannot fire inside it.
    found = annotate("heart attack", LEX)
    assert found == {"C01"}


def test_annotate_empty_text():
    assert annotate("", LEX) == set()


def test_annotate_duplicates_collapse():
    assert annotate("aspirin, aspirin and more aspirin", LEX) == {"C04"}


def test_annotate_respects_window():
    lex = Lexicon(entries={"a b c d e f g": "LONG", "a": "SHORT"})
    # Window of 6 tokens cannot see the 7-token surface.
    assert annotate("a b c d e f g", lex, max_window=6) == {"SHORT"}
    assert annotate("a b c d e f g", lex, max_window=7) == {"LONG"}


def test_annotate_idempotent_on_result():
    text = "acute heart attack and aspirin"
    first = annotate(text, LEX)
    assert annotate(text, LEX) == first


def test_load_lexicon(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("Heart Attack\tC01\tMyocardial infarction\n"
                    "heart attack\tC99\tduplicate loses\n"
                    "ASA\tC04\n",
                    encoding="utf-8")
    lex = load_lexicon(path)
    assert lex.entries["heart attack"] == "C01"  # first row wins, normalized
    assert lex.entries["asa"] == "C04"
    assert lex.names["C01"] == "Myocardial infarction"
    assert lex.names["C04"] == "C04"  # name defaults to the id


def test_load_lexicon_rejects_short_rows(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("only one field\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":1:"):
        load_lexicon(path)


def test_lexicon_mode_ignores_record_concepts(tmp_path):
    lex_path = tmp_path / "lex.tsv"
    lex_path.write_text("aspirin\tC04\taspirin\n", encoding="utf-8")
    data = write_lines(tmp_path, [
        '{"classes": ["A"]}',
        '{"id": "s0", "text": "took aspirin", "concepts": ["IGNORED"], '
        '"predicted_label": "A"}',
    ])
    ds = load_dataset(data, mode="lexicon", lexicon=load_lexicon(lex_path))
    assert ds.samples[0].concepts == frozenset({"C04"})


# -- build_index ------------------------------------------------------------

def test_build_index_postings_and_members(toy6):
    assert toy6.postings["a"] == [0, 1, 2]
    assert toy6.postings["b"] == [0, 3, 5]
    assert toy6.class_members[1] == [3, 4, 5]


def test_class_members_partition_samples(toy6):
    ordinals = sorted(o for members in toy6.class_members.values() for o in members)
    assert ordinals == list(range(toy6.size))


def test_build_index_rejects_label_out_of_range():
    samples = [Sample("s0", "", frozenset({"x"}), 2)]
    with pytest.raises(SchemaError):
        build_index(samples, [ClassLabel(0, "A"), ClassLabel(1, "B")])


def test_build_index_rejects_empty():
    with pytest.raises(EmptyInputError):
        build_index([], [ClassLabel(0, "A")])


def test_postings_match_scan_on_random_corpora():
    import random
    for seed in range(5):
        ds = corpora.random_corpus(random.Random(seed), n_samples=40,
                                   n_concepts=10, n_classes=3)
        for concept, ordinals in ds.postings.items():
            expected = [i for i, s in enumerate(ds.samples) if concept in s.concepts]
            assert ordinals == expected
        assert all(ordinals for ordinals in ds.postings.values())


def test_unknown_lookups_raise(toy6):
    with pytest.raises(UnknownIdError):
        toy6.sample_by_id("nope")
    with pytest.raises(UnknownIdError):
        toy6.class_by_name("nope")


def test_dataset_record_roundtrip(tmp_path, toy6):
    # Rewriting what load_dataset read must load to the same samples.
    path = tmp_path / "copy.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"classes": [c.name for c in toy6.classes]}) + "\n")
        for s in toy6.samples:
            fh.write(json.dumps({
                "id": s.id, "text": s.text, "concepts": sorted(s.concepts),
                "predicted_label": toy6.class_name(s.predicted_label)}) + "\n")
    again = load_dataset(path)
    assert [s.concepts for s in again.samples] == [s.concepts for s in toy6.samples]
    assert again.postings == toy6.postings
