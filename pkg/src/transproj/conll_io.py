"""Read, write, and sanity-check token-per-line NER corpora.

The on-disk format is the usual CoNLL layout: one token per line with its
tag in the last whitespace-separated field, blank lines between sentences.
Intermediate columns (POS, chunk) are ignored so the same reader covers
CoNLL 2003, OntoNotes exports, WNUT, and NCBI-style files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DOCSTART = "-DOCSTART-"


class ConllError(ValueError):
    pass


class MalformedLine(ConllError):
    def __init__(self, line_no: int, line: str):
        super().__init__(f"line {line_no}: expected at least 2 fields, got {line!r}")
        self.line_no = line_no


class MalformedTag(ConllError):
    def __init__(self, line_no: int | None, raw: str):
        at = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{at}tag {raw!r} is not 'O', 'B-<label>' or 'I-<label>'")
        self.line_no = line_no
        self.raw = raw


class InvalidSentence(ValueError):
    pass


@dataclass(frozen=True)
class Tag:
    """One IOB tag: ``O``, ``B-<label>`` or ``I-<label>``."""

    raw: str
    kind: str  # "O", "B" or "I"
    label: str | None

    @classmethod
    def parse(cls, raw: str, line_no: int | None = None) -> "Tag":
        if raw == "O":
            return cls("O", "O", None)
        if len(raw) > 2 and raw[0] in ("B", "I") and raw[1] == "-":
            label = raw[2:]
            if label and not any(ch.isspace() for ch in label):
                return cls(raw, raw[0], label)
        raise MalformedTag(line_no, raw)

    @classmethod
    def outside(cls) -> "Tag":
        return cls("O", "O", None)

    @classmethod
    def begin(cls, label: str) -> "Tag":
        return cls.parse(f"B-{label}")

    @classmethod
    def inside(cls, label: str) -> "Tag":
        return cls.parse(f"I-{label}")

    def __str__(self) -> str:
        return self.raw


@dataclass
class TaggedSentence:
    """Parallel token/tag arrays plus the sentence's position in its split."""

    tokens: list[str]
    tags: list[Tag]
    origin_index: int = 0

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise InvalidSentence(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )
        if not self.tokens:
            raise InvalidSentence("sentence has no tokens")
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise InvalidSentence(f"bad token {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class DatasetSplit:
    name: str
    sentences: list[TaggedSentence]
    # sentence groups that became empty during parsing (e.g. DOCSTART-only);
    # surfaced in the run report, not part of split identity
    dropped_empty: int = field(default=0, compare=False)

    def __post_init__(self):
        origins = [s.origin_index for s in self.sentences]
        if any(b <= a for a, b in zip(origins, origins[1:])):
            raise InvalidSentence("origin_index values must be unique and ascending")

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class Violation:
    """A position where a tag sequence breaks the IOB2 rule."""

    index: int
    tag: str
    message: str


def parse_conll(text: str, name: str = "other") -> DatasetSplit:
    """Parse a CoNLL document: first field is the token, last field the tag.

    Blank lines delimit sentences, ``-DOCSTART-`` lines are skipped, and
    sentence groups that end up empty are dropped (counted in
    ``DatasetSplit.dropped_empty``).
    """
    split, _ = parse_conll_with_lines(text, name)
    return split


def parse_conll_with_lines(
    text: str, name: str = "other"
) -> tuple[DatasetSplit, list[list[int]]]:
    """Like :func:`parse_conll` but also returns per-token line numbers."""
    sentences: list[TaggedSentence] = []
    line_map: list[list[int]] = []
    dropped = 0

    cur_tokens: list[str] = []
    cur_tags: list[Tag] = []
    cur_lines: list[int] = []
    saw_content = False  # current group had at least one non-blank line

    def flush():
        nonlocal cur_tokens, cur_tags, cur_lines, saw_content, dropped
        if cur_tokens:
            sentences.append(
                TaggedSentence(cur_tokens, cur_tags, origin_index=len(sentences))
            )
            line_map.append(cur_lines)
        elif saw_content:
            dropped += 1
        cur_tokens, cur_tags, cur_lines = [], [], []
        saw_content = False

    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            flush()
            continue
        fields = line.split()
        if fields[0] == DOCSTART:
            saw_content = True
            continue
        if len(fields) < 2:
            raise MalformedLine(line_no, line)
        saw_content = True
        cur_tokens.append(fields[0])
        cur_tags.append(Tag.parse(fields[-1], line_no))
        cur_lines.append(line_no)
    flush()

    split = DatasetSplit(name, sentences, dropped_empty=dropped)
    return split, line_map


def serialize_conll(split: DatasetSplit) -> str:
    """Write a split back out: ``token<SP>tag`` lines, one blank line between
    sentences, trailing newline. ``parse_conll(serialize_conll(s)) == s``."""
    blocks = []
    for sent in split.sentences:
        lines = "".join(
            f"{tok} {tag.raw}\n" for tok, tag in zip(sent.tokens, sent.tags)
        )
        blocks.append(lines + "\n")
    return "".join(blocks)


def validate_scheme(sentence: TaggedSentence) -> list[Violation]:
    """Return one Violation per I-tag that does not continue a same-label
    entity (the IOB2 rule). An empty list means the sentence is valid IOB2."""
    violations = []
    prev: Tag | None = None
    for i, tag in enumerate(sentence.tags):
        if tag.kind == "I":
            ok = prev is not None and prev.kind in ("B", "I") and prev.label == tag.label
            if not ok:
                violations.append(
                    Violation(i, tag.raw, f"{tag.raw} at position {i} does not continue a {tag.label} entity")
                )
        prev = tag
    return violations


def normalize_iob1_to_iob2(sentence: TaggedSentence) -> TaggedSentence:
    """Rewrite IOB1 tags as IOB2: every entity-initial token gets B-<label>.

    Under IOB1 an entity starts with I-<label> unless it directly follows a
    same-label entity, where B-<label> marks the boundary. The entity spans
    read from the input under IOB1 equal those of the output under IOB2.
    """
    new_tags: list[Tag] = []
    prev: Tag | None = None
    for tag in sentence.tags:
        if tag.kind == "I":
            continues = prev is not None and prev.kind != "O" and prev.label == tag.label
            new_tags.append(tag if continues else Tag.begin(tag.label))
        else:
            new_tags.append(tag)
        prev = tag
    return TaggedSentence(list(sentence.tokens), new_tags, sentence.origin_index)
