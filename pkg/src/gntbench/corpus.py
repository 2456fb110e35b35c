"""Parallel corpus handling for gender-neutral translation evaluation.

Each corpus entry pairs an English source sentence with two Italian
references, one gendered and one neutral. The word runs where the two
references differ are the gendered terms that annotators need to see
highlighted; they are recovered with a minimal word-level edit alignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

HEADER = ("id", "src_en", "ref_gendered", "ref_neutral")


class CorpusParseError(ValueError):
    """Raised when a corpus TSV file violates the expected format."""


@dataclass(frozen=True)
class TermSpan:
    """A contiguous word run where the gendered and neutral references differ.

    ``start``/``end`` are half-open word indices into the gendered reference
    (whitespace tokenization). ``gendered_text`` is exactly the joined slice
    ``ref_gendered.split()[start:end]``; either text may be empty when the
    run is a pure insertion or deletion, but never both.
    """

    gendered_text: str
    neutral_text: str
    start: int
    end: int


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    src_en: str
    ref_gendered: str
    ref_neutral: str
    term_spans: tuple[TermSpan, ...] = ()


def parse_corpus(tsv_text: str) -> list[CorpusEntry]:
    """Parse a corpus TSV (header ``id src_en ref_gendered ref_neutral``).

    Rows are returned in file order with empty ``term_spans``. Errors name
    the offending 1-based line and column.
    """
    if "\r" in tsv_text:
        raise CorpusParseError("carriage return found; corpus files must use LF line endings")
    lines = tsv_text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusParseError("empty file: missing header row")
    header = tuple(lines[0].split("\t"))
    if header != HEADER:
        raise CorpusParseError(
            f"line 1: bad header {list(header)!r}, expected {list(HEADER)!r}"
        )
    entries: list[CorpusEntry] = []
    seen_ids: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(HEADER):
            raise CorpusParseError(
                f"line {lineno}: expected {len(HEADER)} columns, found {len(cells)}"
            )
        for col, cell in zip(HEADER, cells):
            if cell == "":
                raise CorpusParseError(f"line {lineno}: empty cell in column {col!r}")
        entry_id = cells[0]
        if entry_id in seen_ids:
            raise CorpusParseError(
                f"line {lineno}: duplicate id {entry_id!r} (first seen on line {seen_ids[entry_id]})"
            )
        seen_ids[entry_id] = lineno
        entries.append(CorpusEntry(entry_id, cells[1], cells[2], cells[3]))
    return entries


def serialize_corpus(entries: list[CorpusEntry]) -> str:
    """Inverse of :func:`parse_corpus`; term spans are not written to TSV."""
    rows = ["\t".join(HEADER)]
    for e in entries:
        cells = (e.id, e.src_en, e.ref_gendered, e.ref_neutral)
        for col, cell in zip(HEADER, cells):
            if "\t" in cell or "\n" in cell:
                raise CorpusParseError(
                    f"entry {e.id!r}: column {col!r} contains a tab or newline"
                )
        rows.append("\t".join(cells))
    return "\n".join(rows) + "\n"


def _canonical_edit_ops(a: list[str], b: list[str]) -> list[str]:
    # Minimal unit-cost alignment, resolved greedily from the left with the
    # op preference match > sub > del > ins, i.e. ties favor the leftmost
    # substitution. D[i][j] is the suffix edit distance a[i:] vs b[j:].
    n, m = len(a), len(b)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][m] = n - i
    for j in range(m + 1):
        dist[n][j] = m - j
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                dist[i][j] = dist[i + 1][j + 1]
            else:
                dist[i][j] = 1 + min(dist[i + 1][j + 1], dist[i + 1][j], dist[i][j + 1])
    ops: list[str] = []
    i = j = 0
    while i < n or j < m:
        if i < n and j < m and a[i] == b[j] and dist[i][j] == dist[i + 1][j + 1]:
            ops.append("match")
            i += 1
            j += 1
        elif i < n and j < m and dist[i][j] == 1 + dist[i + 1][j + 1]:
            ops.append("sub")
            i += 1
            j += 1
        elif i < n and dist[i][j] == 1 + dist[i + 1][j]:
            ops.append("del")
            i += 1
        else:
            ops.append("ins")
            j += 1
    return ops


def extract_gendered_terms(ref_gendered: str, ref_neutral: str) -> list[TermSpan]:
    """Diff the two references into maximal contiguous differing word runs.

    Tokenization is whitespace-only; punctuation stays attached to words.
    Identical sentences yield an empty list.
    """
    if not ref_gendered.strip() or not ref_neutral.strip():
        raise ValueError("both reference sentences must be non-empty")
    a = ref_gendered.split()
    b = ref_neutral.split()
    spans: list[TermSpan] = []
    i = j = 0
    run_start = run_start_b = -1
    for op in _canonical_edit_ops(a, b) + ["match"]:
        if op == "match":
            if run_start >= 0:
                spans.append(
                    TermSpan(
                        gendered_text=" ".join(a[run_start:i]),
                        neutral_text=" ".join(b[run_start_b:j]),
                        start=run_start,
                        end=i,
                    )
                )
                run_start = run_start_b = -1
            i += 1
            j += 1
        else:
            if run_start < 0:
                run_start, run_start_b = i, j
            if op != "ins":
                i += 1
            if op != "del":
                j += 1
    return spans


def derive_spans(entries: list[CorpusEntry]) -> list[CorpusEntry]:
    return [
        replace(e, term_spans=tuple(extract_gendered_terms(e.ref_gendered, e.ref_neutral)))
        for e in entries
    ]


def corpus_to_json(entries: list[CorpusEntry]) -> str:
    payload = [
        {
            "id": e.id,
            "src_en": e.src_en,
            "ref_gendered": e.ref_gendered,
            "ref_neutral": e.ref_neutral,
            "term_spans": [
                {
                    "gendered_text": s.gendered_text,
                    "neutral_text": s.neutral_text,
                    "start": s.start,
                    "end": s.end,
                }
                for s in e.term_spans
            ],
        }
        for e in entries
    ]
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def corpus_from_json(text: str) -> list[CorpusEntry]:
    entries = []
    for obj in json.loads(text):
        spans = tuple(
            TermSpan(s["gendered_text"], s["neutral_text"], s["start"], s["end"])
            for s in obj["term_spans"]
        )
        entries.append(
            CorpusEntry(obj["id"], obj["src_en"], obj["ref_gendered"], obj["ref_neutral"], spans)
        )
    return entries
