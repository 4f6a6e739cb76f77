import pytest
from hypothesis import given

from transproj.conll_io import validate_scheme, normalize_iob1_to_iob2
from transproj.spans import (
    EntitySpan,
    InvalidScheme,
    OverlappingSpans,
    SpanOutOfRange,
    extract_spans,
    spans_to_tags,
)

from test_conll_io import all_tag_sequences, iob1_is_wellformed, iob2_sentences, sent


def test_extract_basic():
    s = sent(["John", "lives", "in", "Berlin"], ["B-PER", "O", "O", "B-LOC"])
    assert extract_spans(s) == [
        EntitySpan(0, 1, "PER", "John"),
        EntitySpan(3, 4, "LOC", "Berlin"),
    ]


def test_extract_all_outside():
    assert extract_spans(sent(["a", "b"], ["O", "O"])) == []


def test_extract_adjacent_entities():
    s = sent(["a", "b", "c"], ["B-ORG", "I-ORG", "B-ORG"])
    got = [(sp.start, sp.end) for sp in extract_spans(s)]
    assert got == [(0, 2), (2, 3)]


def test_extract_rejects_invalid_scheme():
    with pytest.raises(InvalidScheme):
        extract_spans(sent(["a", "b"], ["O", "I-LOC"]))


def test_extract_surface_is_space_joined():
    s = sent(["New", "York", "City"], ["B-LOC", "I-LOC", "I-LOC"])
    assert extract_spans(s)[0].surface == "New York City"


def test_spans_to_tags_empty():
    assert [t.raw for t in spans_to_tags([], 3)] == ["O", "O", "O"]


def test_spans_to_tags_full_span():
    assert [t.raw for t in spans_to_tags([EntitySpan(0, 2, "PER", "x y")], 2)] == ["B-PER", "I-PER"]


def test_spans_to_tags_adjacent():
    spans = [EntitySpan(1, 2, "LOC", "b"), EntitySpan(2, 4, "ORG", "c d")]
    assert [t.raw for t in spans_to_tags(spans, 4)] == ["O", "B-LOC", "B-ORG", "I-ORG"]


def test_spans_to_tags_overlap_rejected():
    spans = [EntitySpan(0, 2, "A", "x y"), EntitySpan(1, 3, "B", "y z")]
    with pytest.raises(OverlappingSpans):
        spans_to_tags(spans, 3)


@pytest.mark.parametrize("span", [EntitySpan(-1, 1, "A", "x"), EntitySpan(0, 4, "A", "x"),
                                  EntitySpan(2, 2, "A", "")])
def test_spans_to_tags_range_rejected(span):
    with pytest.raises(SpanOutOfRange):
        spans_to_tags([span], 3)


def test_codec_round_trip_exhaustive():
    # every valid IOB2 sequence of length <= 5 over two labels survives the
    # span codec unchanged
    checked = 0
    for raw in all_tag_sequences(5):
        s = sent(["w"] * len(raw), raw)
        if validate_scheme(s):
            continue
        spans = extract_spans(s)
        assert [t.raw for t in spans_to_tags(spans, len(raw))] == list(raw)
        checked += 1
    assert checked > 100


@given(iob2_sentences())
def test_codec_round_trip_property(s):
    assert spans_to_tags(extract_spans(s), len(s)) == s.tags


def test_span_count_invariant_under_normalize():
    for raw in all_tag_sequences(4):
        if not iob1_is_wellformed(raw):
            continue
        s = sent(["w"] * len(raw), raw)
        from test_conll_io import iob1_spans

        assert len(extract_spans(normalize_iob1_to_iob2(s))) == len(iob1_spans(raw))
