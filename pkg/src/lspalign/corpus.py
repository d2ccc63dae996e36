"""Parsing and serialization for every on-disk format.

Formats handled here: " ||| "-delimited bitext, BIO tag lines, span TSV,
Pharaoh alignments, text word-vector files, transliteration tables, gold
lexicons and entity-pair JSONL.  All parsers are pure per-line functions;
the tables they build are immutable after construction.
"""

import json
import logging
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DimensionMismatchError,
    EmptyFileError,
    EmptySideError,
    LengthMismatchError,
    MalformedLinkError,
    MissingDelimiterError,
    NonNumericValueError,
    UnknownLabelError,
)

log = logging.getLogger(__name__)

BITEXT_DELIMITER = " ||| "

# An alignment is a set of (source_index, target_index) links, 0-indexed.
Alignment = set


@dataclass
class Bitext:
    """One tokenized sentence pair; ``id`` is the 0-based line number."""

    id: int
    source: list[str]
    target: list[str]


@dataclass
class EntitySpan:
    """A typed token span, ``[start, end)``, in one sentence.

    ``surface`` is the space-joined tokens of the span.  Spans produced by
    projection carry an empty surface until resolved against their target
    sentence.
    """

    sentence_id: int
    start: int
    end: int
    entity_type: str
    surface: str = ""


@dataclass
class EmbeddingTable:
    dimension: int
    entries: dict[str, np.ndarray]

    def lookup(self, token: str):
        """Exact-case lookup first, then case-folded; None when absent."""
        vec = self.entries.get(token)
        if vec is None:
            vec = self.entries.get(token.casefold())
        return vec


@dataclass
class TransliterationTable:
    """Ordered grapheme rewrite rules, applied longest-match-first."""

    rules: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        for lhs, _ in self.rules:
            if not lhs:
                raise DataError("transliteration rule with empty left-hand side")


def _nfc(token: str) -> str:
    return unicodedata.normalize("NFC", token)


# ---------------------------------------------------------------------------
# bitext
# ---------------------------------------------------------------------------

def parse_bitext_line(line: str, id: int) -> Bitext:
    """Parse one "src ||| tgt" line into a Bitext.

    Splits on the first occurrence of the delimiter; each side is
    whitespace-tokenized and NFC-normalized.
    """
    line = line.rstrip("\n")
    if BITEXT_DELIMITER not in line:
        raise MissingDelimiterError(f"no '{BITEXT_DELIMITER.strip()}' delimiter in line")
    src_text, tgt_text = line.split(BITEXT_DELIMITER, 1)
    source = [_nfc(t) for t in src_text.split()]
    target = [_nfc(t) for t in tgt_text.split()]
    if not source:
        raise EmptySideError("source side has no tokens")
    if not target:
        raise EmptySideError("target side has no tokens")
    return Bitext(id=id, source=source, target=target)


def format_bitext(bitext: Bitext) -> str:
    return " ".join(bitext.source) + BITEXT_DELIMITER + " ".join(bitext.target)


class BitextFile:
    """Re-iterable view of a bitext file; each pass re-opens the file.

    Lets multi-pass consumers (EM training) stay line-oriented instead of
    holding the corpus in memory.
    """

    def __init__(self, path):
        self.path = path

    def __iter__(self):
        with open(self.path, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                try:
                    yield parse_bitext_line(line, i)
                except DataError as err:
                    raise err.at(str(self.path), i + 1) from None


def read_bitext(path) -> list[Bitext]:
    return list(BitextFile(path))


def write_bitext(path, corpus) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for bitext in corpus:
            fh.write(format_bitext(bitext) + "\n")


# ---------------------------------------------------------------------------
# Pharaoh alignments
# ---------------------------------------------------------------------------

def parse_alignment(line: str) -> set:
    """Parse one Pharaoh line ("0-0 1-2 ...") into a set of links."""
    links = set()
    for tok in line.split():
        parts = tok.split("-")
        if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise MalformedLinkError(f"malformed link {tok!r}")
        links.add((int(parts[0]), int(parts[1])))
    return links


def format_alignment(links) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(links))


def read_alignments(path) -> list:
    alignments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                alignments.append(parse_alignment(line))
            except DataError as err:
                raise err.at(str(path), lineno) from None
    return alignments


def write_alignments(path, alignments) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for links in alignments:
            fh.write(format_alignment(links) + "\n")


# ---------------------------------------------------------------------------
# BIO tags and entity spans
# ---------------------------------------------------------------------------

def _split_label(label: str) -> tuple[str, str]:
    """Return (prefix, type) for a BIO label; raises on anything else."""
    if label == "O":
        return "O", ""
    if len(label) > 2 and label[1] == "-" and label[0] in ("B", "I"):
        return label[0], label[2:]
    raise UnknownLabelError(f"unknown BIO label {label!r}")


def extract_entity_spans(tags, sentence: Bitext) -> list[EntitySpan]:
    """Turn a BIO tag sequence into typed spans over the source side.

    Maximal B-X (I-X)* runs become spans; an I-X with no compatible open
    span is repaired to B-X rather than rejected, so noisy upstream taggers
    do not abort a corpus run.
    """
    if len(tags) != len(sentence.source):
        raise LengthMismatchError(
            f"{len(tags)} tags for {len(sentence.source)} tokens"
        )
    spans = []
    open_start = None
    open_type = None

    def close(end):
        nonlocal open_start, open_type
        if open_start is not None:
            surface = " ".join(sentence.source[open_start:end])
            spans.append(EntitySpan(sentence.id, open_start, end, open_type, surface))
            open_start, open_type = None, None

    for pos, label in enumerate(tags):
        prefix, etype = _split_label(label)
        if prefix == "O":
            close(pos)
        elif prefix == "B":
            close(pos)
            open_start, open_type = pos, etype
        else:  # I
            if open_type != etype:
                close(pos)
                open_start, open_type = pos, etype
    close(len(tags))
    return spans


def read_bio_tags(path) -> list[list[str]]:
    """One line of whitespace-separated BIO labels per sentence."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rows.append(line.split())
    return rows


# ---------------------------------------------------------------------------
# span files (TSV: sentence_id  start  end  type  surface)
# ---------------------------------------------------------------------------

def format_span(span: EntitySpan) -> str:
    return "\t".join(
        [str(span.sentence_id), str(span.start), str(span.end), span.entity_type, span.surface]
    )


def parse_span_line(line: str) -> EntitySpan:
    cols = line.rstrip("\n").split("\t")
    if len(cols) != 5:
        raise DataError(f"expected 5 tab-separated columns, got {len(cols)}")
    sid, start, end, etype, surface = cols
    if not (sid.isdigit() and start.isdigit() and end.isdigit()):
        raise DataError(f"non-integer span field in {cols[:3]!r}")
    span = EntitySpan(int(sid), int(start), int(end), etype, _nfc(surface))
    if not 0 <= span.start < span.end:
        raise DataError(f"invalid span extent [{span.start}, {span.end})")
    return span


def read_spans(path) -> dict[int, list[EntitySpan]]:
    """Load a span TSV, grouped by sentence id and sorted by start."""
    by_sentence: dict[int, list[EntitySpan]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                span = parse_span_line(line)
            except DataError as err:
                raise err.at(str(path), lineno) from None
            by_sentence.setdefault(span.sentence_id, []).append(span)
    for spans in by_sentence.values():
        spans.sort(key=lambda s: s.start)
    return by_sentence


def write_spans(path, spans) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for span in spans:
            fh.write(format_span(span) + "\n")


def check_span(span: EntitySpan, sentence: Bitext) -> None:
    """Re-derive the surface against the sentence; raise on any mismatch."""
    if span.end > len(sentence.source):
        raise DataError(
            f"span [{span.start}, {span.end}) exceeds sentence {sentence.id} "
            f"length {len(sentence.source)}"
        )
    derived = " ".join(sentence.source[span.start:span.end])
    if span.surface and span.surface != derived:
        raise DataError(
            f"span surface {span.surface!r} does not match tokens {derived!r} "
            f"in sentence {sentence.id}"
        )


# ---------------------------------------------------------------------------
# word vectors
# ---------------------------------------------------------------------------

def parse_embeddings(reader) -> EmbeddingTable:
    """Parse a text word-vector stream: "count dim" header, then rows.

    Duplicate tokens keep their first occurrence; the number dropped is
    logged once at the end.
    """
    header = reader.readline()
    if not header.strip():
        raise EmptyFileError("empty embedding file")
    parts = header.split()
    if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
        raise NonNumericValueError(f"bad header {header.strip()!r}")
    dimension = int(parts[1])
    if dimension <= 0:
        raise DimensionMismatchError("declared dimension must be positive")

    entries: dict[str, np.ndarray] = {}
    duplicates = 0
    for lineno, line in enumerate(reader, start=2):
        cols = line.split()
        if not cols:
            continue
        token, values = _nfc(cols[0]), cols[1:]
        if len(values) != dimension:
            raise DimensionMismatchError(
                f"line {lineno}: {len(values)} values for dimension {dimension}"
            )
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError:
            raise NonNumericValueError(f"line {lineno}: non-numeric vector value") from None
        if token in entries:
            duplicates += 1
            continue
        entries[token] = vec
    if not entries:
        raise EmptyFileError("embedding file has a header but no vectors")
    if duplicates:
        log.warning("dropped %d duplicate embedding tokens (first occurrence kept)", duplicates)
    return EmbeddingTable(dimension=dimension, entries=entries)


def read_embeddings(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_embeddings(fh)
        except DataError as err:
            raise err.at(str(path)) from None


# ---------------------------------------------------------------------------
# transliteration tables
# ---------------------------------------------------------------------------

def read_translit_table(path) -> TransliterationTable:
    """TSV rules "lhs<TAB>rhs"; '#' starts a comment line; rhs may be empty."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 2:
                raise DataError(
                    f"expected 2 tab-separated columns, got {len(cols)}",
                    path=str(path), line=lineno,
                )
            lhs, rhs = _nfc(cols[0]), _nfc(cols[1])
            if not lhs:
                raise DataError("empty rule left-hand side", path=str(path), line=lineno)
            rules.append((lhs, rhs))
    return TransliterationTable(rules=rules)


def write_translit_table(path, table: TransliterationTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lhs, rhs in table.rules:
            fh.write(f"{lhs}\t{rhs}\n")


# ---------------------------------------------------------------------------
# gold lexicon
# ---------------------------------------------------------------------------

def read_gold_lexicon(path) -> dict[str, set]:
    """TSV "source_entity<TAB>target_entity"; repeated sources accumulate."""
    gold: dict[str, set] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise DataError(
                    "expected non-empty 'source<TAB>target'",
                    path=str(path), line=lineno,
                )
            gold.setdefault(_nfc(cols[0]), set()).add(_nfc(cols[1]))
    return gold


# ---------------------------------------------------------------------------
# entity-pair JSONL
# ---------------------------------------------------------------------------

def write_entity_pairs(path, pairs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(
                {
                    "src": pair.source_surface,
                    "tgt": pair.target_surface,
                    "type": pair.entity_type,
                    "count": pair.count,
                    "score": pair.score,
                },
                ensure_ascii=False,
            ) + "\n")


def read_entity_pairs(path) -> list:
    from .projection import EntityPair

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pairs.append(EntityPair(
                    source_surface=rec["src"],
                    target_surface=rec["tgt"],
                    entity_type=rec["type"],
                    count=int(rec["count"]),
                    score=float(rec["score"]),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"bad entity-pair record: {exc}",
                                path=str(path), line=lineno) from None
    return pairs
