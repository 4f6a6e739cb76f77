import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from transproj.conll_io import (
    DatasetSplit,
    InvalidSentence,
    MalformedLine,
    MalformedTag,
    Tag,
    TaggedSentence,
    normalize_iob1_to_iob2,
    parse_conll,
    parse_conll_with_lines,
    serialize_conll,
    validate_scheme,
)

LABELS = ("PER", "LOC")


def sent(tokens, raw_tags, origin=0):
    return TaggedSentence(list(tokens), [Tag.parse(t) for t in raw_tags], origin)


# --- Tag grammar ---------------------------------------------------------


@pytest.mark.parametrize("raw,kind,label", [
    ("O", "O", None),
    ("B-PER", "B", "PER"),
    ("I-LOC", "I", "LOC"),
    ("B-creative-work", "B", "creative-work"),
    ("I-WORK_OF_ART", "I", "WORK_OF_ART"),
])
def test_tag_parse_valid(raw, kind, label):
    tag = Tag.parse(raw)
    assert (tag.raw, tag.kind, tag.label) == (raw, kind, label)


@pytest.mark.parametrize("raw", ["", "B-", "I-", "X-PER", "b-PER", "B", "I", "OO", "B-a b"])
def test_tag_parse_invalid(raw):
    with pytest.raises(MalformedTag):
        Tag.parse(raw)


def test_sentence_invariants():
    with pytest.raises(InvalidSentence):
        TaggedSentence(["a"], [])
    with pytest.raises(InvalidSentence):
        TaggedSentence([], [])
    with pytest.raises(InvalidSentence):
        TaggedSentence(["a b"], [Tag.outside()])
    with pytest.raises(InvalidSentence):
        TaggedSentence([""], [Tag.outside()])


def test_split_origin_must_ascend():
    with pytest.raises(InvalidSentence):
        DatasetSplit("train", [sent("a", ["O"], 1), sent("b", ["O"], 1)])


# --- parse_conll ---------------------------------------------------------


def test_parse_minimal_sentence():
    split = parse_conll("EU B-ORG\nrejects O\n\n")
    assert len(split) == 1
    assert split.sentences[0].tokens == ["EU", "rejects"]
    assert [t.raw for t in split.sentences[0].tags] == ["B-ORG", "O"]


def test_parse_empty_document():
    assert len(parse_conll("")) == 0


def test_parse_skips_docstart():
    split = parse_conll("-DOCSTART- O\n\nA B-PER\n")
    assert len(split) == 1
    assert split.sentences[0].tokens == ["A"]
    assert [t.raw for t in split.sentences[0].tags] == ["B-PER"]
    assert split.dropped_empty == 1


def test_parse_ignores_middle_columns_and_counts_lines():
    split, lines = parse_conll_with_lines("EU NNP I-NP B-ORG\nrejects VBZ I-VP O\n")
    assert split.sentences[0].tokens == ["EU", "rejects"]
    assert [t.raw for t in split.sentences[0].tags] == ["B-ORG", "O"]
    assert lines == [[1, 2]]


def test_parse_origin_indices_are_positions():
    split = parse_conll("a O\n\nb O\n\nc O\n")
    assert [s.origin_index for s in split.sentences] == [0, 1, 2]


def test_parse_malformed_line_reports_number():
    with pytest.raises(MalformedLine) as err:
        parse_conll("ok O\nbroken\n")
    assert err.value.line_no == 2


def test_parse_malformed_tag_reports_number():
    with pytest.raises(MalformedTag) as err:
        parse_conll("ok O\nword B-\n")
    assert err.value.line_no == 2


def test_parse_blank_line_with_spaces_delimits():
    split = parse_conll("a O\n \t \nb O\n")
    assert [s.tokens for s in split.sentences] == [["a"], ["b"]]


# --- serialize_conll -----------------------------------------------------


def test_serialize_single_sentence():
    assert serialize_conll(DatasetSplit("x", [sent(["A"], ["O"])])) == "A O\n\n"


def test_serialize_empty_split():
    assert serialize_conll(DatasetSplit("x", [])) == ""


def test_serialize_two_sentences_single_blank_line():
    split = DatasetSplit("x", [sent(["A"], ["O"], 0), sent(["B"], ["O"], 1)])
    assert serialize_conll(split) == "A O\n\nB O\n\n"


TOKEN_ALPHABET = st.characters(
    blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Cs"), blacklist_characters=" "
)
tokens_st = st.text(TOKEN_ALPHABET, min_size=1, max_size=8).filter(
    lambda t: t != "-DOCSTART-" and not any(c.isspace() for c in t)
)


@st.composite
def iob2_sentences(draw, origin=0):
    n = draw(st.integers(1, 8))
    toks = [draw(tokens_st) for _ in range(n)]
    tags = []
    prev_label = None
    for _ in range(n):
        choice = draw(st.sampled_from(["O", "B", "I"]))
        if choice == "I" and prev_label is None:
            choice = "B"
        if choice == "O":
            tags.append(Tag.outside())
            prev_label = None
        elif choice == "B":
            prev_label = draw(st.sampled_from(LABELS))
            tags.append(Tag.begin(prev_label))
        else:
            tags.append(Tag.inside(prev_label))
    return TaggedSentence(toks, tags, origin)


@st.composite
def splits(draw):
    n = draw(st.integers(0, 5))
    return DatasetSplit("train", [draw(iob2_sentences(origin=i)) for i in range(n)])


@given(splits())
def test_round_trip_parse_serialize(split):
    assert parse_conll(serialize_conll(split), "train") == split


# --- validate_scheme -----------------------------------------------------


@pytest.mark.parametrize("tags,bad_indices", [
    (["B-PER", "I-PER", "O"], []),
    (["O", "I-LOC"], [1]),
    (["B-PER", "I-ORG"], [1]),
    (["I-PER"], [0]),
    (["B-PER", "O", "I-PER"], [2]),
])
def test_validate_scheme(tags, bad_indices):
    violations = validate_scheme(sent(["w"] * len(tags), tags))
    assert [v.index for v in violations] == bad_indices


def reference_iob2_acceptor(raw_tags):
    """Brute-force IOB2 grammar: sequences of O or B-X followed by I-X runs."""
    i = 0
    while i < len(raw_tags):
        if raw_tags[i] == "O":
            i += 1
            continue
        if not raw_tags[i].startswith("B-"):
            return False
        label = raw_tags[i][2:]
        i += 1
        while i < len(raw_tags) and raw_tags[i] == f"I-{label}":
            i += 1
    return True


def all_tag_sequences(max_len, labels=LABELS):
    symbols = ["O"] + [f"{k}-{lab}" for k in "BI" for lab in labels]
    for n in range(1, max_len + 1):
        yield from itertools.product(symbols, repeat=n)


def test_validate_scheme_matches_reference_acceptor():
    for raw in all_tag_sequences(4):
        ours = validate_scheme(sent(["w"] * len(raw), raw)) == []
        assert ours == reference_iob2_acceptor(raw), raw


# --- normalize_iob1_to_iob2 ----------------------------------------------


@pytest.mark.parametrize("iob1,iob2", [
    (["I-PER", "I-PER"], ["B-PER", "I-PER"]),
    (["O", "I-LOC"], ["O", "B-LOC"]),
    (["I-ORG", "B-ORG"], ["B-ORG", "B-ORG"]),
    (["I-PER", "O", "I-PER"], ["B-PER", "O", "B-PER"]),
    (["I-PER", "I-LOC"], ["B-PER", "B-LOC"]),
])
def test_normalize_examples(iob1, iob2):
    out = normalize_iob1_to_iob2(sent(["w"] * len(iob1), iob1))
    assert [t.raw for t in out.tags] == iob2


def iob1_spans(raw_tags):
    """Reference IOB1 span reader: I starts or continues, B splits adjacent
    same-label entities."""
    spans = []
    cur = None  # (label, start)
    for i, raw in enumerate(raw_tags):
        if raw == "O":
            if cur:
                spans.append((cur[1], i, cur[0]))
            cur = None
        elif raw.startswith("B-"):
            if cur:
                spans.append((cur[1], i, cur[0]))
            cur = (raw[2:], i)
        else:
            label = raw[2:]
            if cur and cur[0] == label:
                continue
            if cur:
                spans.append((cur[1], i, cur[0]))
            cur = (label, i)
    if cur:
        spans.append((cur[1], len(raw_tags), cur[0]))
    return spans


def iob1_is_wellformed(raw_tags):
    # B-X is only legal directly after I-X or B-X of the same label
    prev = None
    for raw in raw_tags:
        if raw.startswith("B-") and (prev is None or prev == "O" or prev[2:] != raw[2:]):
            return False
        prev = raw
    return True


def test_normalize_preserves_span_set_exhaustively():
    from transproj.spans import extract_spans

    for raw in all_tag_sequences(4):
        if not iob1_is_wellformed(raw):
            continue
        s = sent(["w"] * len(raw), raw)
        out = normalize_iob1_to_iob2(s)
        assert validate_scheme(out) == []
        got = [(sp.start, sp.end, sp.label) for sp in extract_spans(out)]
        assert got == iob1_spans(raw), raw
