"""Prompt rendering for the four translation conditions.

``zero_shot`` is a bare translation instruction. The three few-shot kinds
wrap exemplar triplets (English source, gendered Italian, neutral Italian)
into demonstrations:

* ``contr``     — contrastive gendered/neutral labeled lines, no prose.
* ``cot_src``   — Q/A chain of thought that names the expressions to
                  neutralize before giving the final translation.
* ``cot_tgt``   — Q/A chain of thought that first gives the gendered
                  translation, then neutralizes its terms.

The connective wording inside the CoT answers is frozen; downstream
extraction keys on the literal final-answer markers, so do not edit these
strings casually.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import NamedTuple

TEMPLATE_KINDS = ("zero_shot", "contr", "cot_src", "cot_tgt")
FEW_SHOT_KINDS = ("contr", "cot_src", "cot_tgt")

ZERO_SHOT_INSTRUCTION = "Please provide the {language} translation of the following sentence:"

CONTR_ENGLISH_LABEL = "[English]:"
CONTR_GENDERED_LABEL = "[Italian, gendered]:"
CONTR_NEUTRAL_LABEL = "[Italian, neutral]:"

COT_QUESTION = (
    "Q: Translate the following English sentence into Italian using a "
    "gender-neutral language to refer to human entities: [{src}]. "
    "Think step by step."
)
COT_SRC_TERM = (
    "In the English sentence there is one expression which refers to human "
    "entities and could be translated in a non-neutral way: <{gendered}>. "
    "A gender-neutral translation of <{gendered}> is <{neutral}>."
)
COT_TGT_GENDERED = "The English sentence can be translated as [{gendered_it}]."
COT_TGT_TERM = (
    "There is one expression with non-neutral terms that refers to human "
    "entities: <{gendered}>. "
    "A gender-neutral alternative to <{gendered}> is <{neutral}>."
)
FINAL_ANSWER = "The final gender-neutral translation is [{neutral_it}]"


class PromptError(ValueError):
    pass


class LengthReport(NamedTuple):
    whitespace_tokens: int
    characters: int


@dataclass(frozen=True)
class ExemplarTriplet:
    src_en: str
    gendered_it: str
    neutral_it: str
    term_pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        for name in ("src_en", "gendered_it", "neutral_it"):
            if not getattr(self, name).strip():
                raise PromptError(f"exemplar field {name} must be non-empty")
        for gendered, neutral in self.term_pairs:
            if gendered not in self.gendered_it:
                raise PromptError(
                    f"term pair gendered phrase {gendered!r} not found in gendered sentence"
                )
            if neutral not in self.neutral_it:
                raise PromptError(
                    f"term pair neutral phrase {neutral!r} not found in neutral sentence"
                )


@dataclass(frozen=True)
class ExemplarSet:
    set_id: str
    triplets: tuple[ExemplarTriplet, ...]

    def __post_init__(self) -> None:
        ok = self.set_id in ("seen", "not_seen") or self.set_id.startswith("custom:")
        if not ok:
            raise PromptError(
                f"set_id must be 'seen', 'not_seen' or 'custom:<name>', got {self.set_id!r}"
            )


@dataclass(frozen=True)
class PromptBundle:
    template_kind: str
    set_id: str
    rendered_text: str
    length_report: LengthReport
    query_src: str


def build_zero_shot(src: str, target_language_name: str) -> PromptBundle:
    if not src.strip():
        raise PromptError("source sentence must be non-empty")
    text = ZERO_SHOT_INSTRUCTION.format(language=target_language_name) + "\n" + src
    return PromptBundle(
        template_kind="zero_shot",
        set_id="none",
        rendered_text=text,
        length_report=estimate_length(text),
        query_src=src,
    )


def _contr_demo(t: ExemplarTriplet) -> str:
    return (
        f"{CONTR_ENGLISH_LABEL} {t.src_en}\n"
        f"{CONTR_GENDERED_LABEL} {t.gendered_it}\n"
        f"{CONTR_NEUTRAL_LABEL} {t.neutral_it}"
    )


def _cot_answer(t: ExemplarTriplet, kind: str) -> str:
    parts = []
    if kind == "cot_tgt":
        parts.append(COT_TGT_GENDERED.format(gendered_it=t.gendered_it))
    term_template = COT_SRC_TERM if kind == "cot_src" else COT_TGT_TERM
    for gendered, neutral in t.term_pairs:
        parts.append(term_template.format(gendered=gendered, neutral=neutral))
    final = FINAL_ANSWER.format(neutral_it=t.neutral_it)
    # cot_tgt closes its answer with a period after the bracket, cot_src does not
    parts.append(final + "." if kind == "cot_tgt" else final)
    return "A: " + " ".join(parts)


def build_few_shot(kind: str, exemplars: ExemplarSet, src: str) -> PromptBundle:
    if kind not in FEW_SHOT_KINDS:
        raise PromptError(f"unknown few-shot template kind {kind!r}")
    if not exemplars.triplets:
        raise PromptError("exemplar set must contain at least one triplet")
    if not src.strip():
        raise PromptError("source sentence must be non-empty")
    blocks: list[str] = []
    if kind == "contr":
        blocks.extend(_contr_demo(t) for t in exemplars.triplets)
        blocks.append(f"{CONTR_ENGLISH_LABEL} {src}\n{CONTR_NEUTRAL_LABEL}")
    else:
        for t in exemplars.triplets:
            blocks.append(COT_QUESTION.format(src=t.src_en) + "\n" + _cot_answer(t, kind))
        blocks.append(COT_QUESTION.format(src=src))
    text = "\n\n".join(blocks)
    if text.count(src) != 1:
        raise PromptError(
            "query source must occur exactly once in the rendered prompt; "
            "it collides with an exemplar sentence"
        )
    return PromptBundle(
        template_kind=kind,
        set_id=exemplars.set_id,
        rendered_text=text,
        length_report=estimate_length(text),
        query_src=src,
    )


def demo_delimiter(kind: str) -> str:
    """Marker occurring exactly once per demonstration block."""
    if kind == "contr":
        return CONTR_GENDERED_LABEL
    if kind in ("cot_src", "cot_tgt"):
        return "\nA: "
    raise PromptError(f"template kind {kind!r} has no demonstrations")


def estimate_length(text_or_bundle: "str | PromptBundle") -> LengthReport:
    """Whitespace-token and Unicode scalar counts of the rendered prompt."""
    text = (
        text_or_bundle.rendered_text
        if isinstance(text_or_bundle, PromptBundle)
        else text_or_bundle
    )
    return LengthReport(whitespace_tokens=len(text.split()), characters=len(text))


def parse_exemplars(tsv_text: str) -> dict[str, ExemplarSet]:
    """Parse an exemplar TSV into sets keyed by set_id.

    Columns: ``set_id src_en gendered_it neutral_it term_pairs`` where
    term_pairs holds ``gendered=>neutral`` items joined by ``||``.
    """
    lines = [ln for ln in tsv_text.split("\n") if ln != ""]
    if not lines:
        raise PromptError("empty exemplar file")
    header = tuple(lines[0].split("\t"))
    expected = ("set_id", "src_en", "gendered_it", "neutral_it", "term_pairs")
    if header != expected:
        raise PromptError(f"bad exemplar header {list(header)!r}, expected {list(expected)!r}")
    by_set: dict[str, list[ExemplarTriplet]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != 5:
            raise PromptError(f"exemplar line {lineno}: expected 5 columns, found {len(cells)}")
        set_id, src_en, gendered_it, neutral_it, pairs_cell = cells
        pairs = []
        if pairs_cell:
            for item in pairs_cell.split("||"):
                if "=>" not in item:
                    raise PromptError(f"exemplar line {lineno}: bad term pair {item!r}")
                gendered, neutral = item.split("=>", 1)
                pairs.append((gendered, neutral))
        by_set.setdefault(set_id, []).append(
            ExemplarTriplet(src_en, gendered_it, neutral_it, tuple(pairs))
        )
    return {sid: ExemplarSet(sid, tuple(ts)) for sid, ts in by_set.items()}


def load_default_exemplars() -> dict[str, ExemplarSet]:
    """The bundled seen/not-seen institutional-domain exemplar sets."""
    text = (
        importlib.resources.files("gntbench")
        .joinpath("data/exemplars.tsv")
        .read_text(encoding="utf-8")
    )
    return parse_exemplars(text)
