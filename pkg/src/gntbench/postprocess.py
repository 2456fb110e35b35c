"""Extract the final translation to evaluate from raw model answers.

Chain-of-thought answers restate their reasoning before the final bracketed
translation, so extraction keys on the LAST occurrence of each template's
final-answer marker. Degraded answers are never rejected: a fallback ladder
(bracket group, then whole text) always yields something, flagged by
extraction_status.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

COT_MARKER = "The final gender-neutral translation is"
CONTR_MARKER = "[Italian, neutral]:"

EXTRACTION_STATUSES = ("marker", "fallback_last_bracket", "fallback_whole_text")


@dataclass(frozen=True)
class SystemOutput:
    entry_id: str
    run_id: str
    system_name: str
    template_kind: str
    set_id: str
    raw_text: str
    extracted: str
    extraction_status: str

    def __post_init__(self) -> None:
        if not self.extracted:
            raise ValueError("extracted translation must be non-empty")
        if self.extraction_status not in EXTRACTION_STATUSES:
            raise ValueError(f"unknown extraction_status {self.extraction_status!r}")

    @property
    def output_key(self) -> tuple[str, str]:
        return (self.run_id, self.entry_id)


def _last_bracket_group(text: str) -> str | None:
    # Walk backwards to the last bracket group with any content; empty
    # groups (truncation artifacts) must not shadow earlier real ones.
    close = text.rfind("]")
    while close != -1:
        open_ = text.rfind("[", 0, close)
        if open_ == -1:
            return None
        content = text[open_ + 1 : close].strip()
        if content:
            return content
        close = text.rfind("]", 0, open_)
    return None


def _fallback(raw: str) -> tuple[str, str]:
    group = _last_bracket_group(raw)
    if group:
        return group, "fallback_last_bracket"
    return raw.strip(), "fallback_whole_text"


def _after_cot_marker(tail: str) -> tuple[str, str] | None:
    open_ = tail.find("[")
    close = tail.rfind("]")
    if open_ != -1 and close > open_:
        content = tail[open_ + 1 : close].strip()
        if content:
            return content, "marker"
        return None
    # Truncated/unbalanced answer: keep marker-to-end, minus one leading bracket.
    content = tail.strip()
    if content.startswith("["):
        content = content[1:].strip()
    if content:
        return content, "fallback_last_bracket"
    return None


def extract_translation(raw: str, kind: str) -> tuple[str, str]:
    if not raw or not raw.strip():
        raise ValueError("raw text must be non-empty")
    if kind == "zero_shot":
        return raw.strip(), "marker"
    if kind in ("cot_src", "cot_tgt"):
        idx = raw.rfind(COT_MARKER)
        if idx != -1:
            result = _after_cot_marker(raw[idx + len(COT_MARKER) :])
            if result is not None:
                return result
            # Marker present but nothing usable after it: fall back over the
            # rest of the answer so the marker phrase cannot leak into output.
            remainder = raw.replace(COT_MARKER, "")
            if remainder.strip():
                return _fallback(remainder)
        return _fallback(raw)
    if kind == "contr":
        idx = raw.rfind(CONTR_MARKER)
        if idx != -1:
            content = raw[idx + len(CONTR_MARKER) :].strip()
            if content:
                return content, "marker"
        return _fallback(raw)
    raise ValueError(f"unknown template kind {kind!r}")


def build_output(
    entry_id: str,
    run_id: str,
    system_name: str,
    template_kind: str,
    set_id: str,
    raw_text: str,
) -> SystemOutput:
    extracted, status = extract_translation(raw_text, template_kind)
    return SystemOutput(
        entry_id=entry_id,
        run_id=run_id,
        system_name=system_name,
        template_kind=template_kind,
        set_id=set_id,
        raw_text=raw_text,
        extracted=extracted,
        extraction_status=status,
    )


def write_outputs_jsonl(outputs: list[SystemOutput]) -> str:
    """One JSON object per line, trailing newline, stable field order."""
    return "".join(json.dumps(asdict(o), ensure_ascii=False) + "\n" for o in outputs)


def read_outputs_jsonl(text: str) -> list[SystemOutput]:
    outputs = []
    for line in text.splitlines():
        if line.strip():
            outputs.append(SystemOutput(**json.loads(line)))
    return outputs
