"""Aggregate annotations, classifier labels, and metrics into result artifacts.

Outputs are grouped by configuration (system, template, exemplar set).
Every percentage is emitted next to its underlying counts so totals stay
auditable, and all rendering is deterministic: sorted keys, fixed decimal
formatting, hand-assembled SVG.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .annotation import (
    AnnotationRecord,
    average_overlap_acceptability,
    latest_by_output,
    reconcile_layer1,
    validate_record,
    LAYER1_LABELS,
    LAYER2_LABELS,
    OutputKey,
)
from .postprocess import SystemOutput
from .stats import F1Report, f1_agreement, kendall_tau, merge_partial, DegenerateInputError


def config_id(output: SystemOutput) -> str:
    return f"{output.system_name}_{output.template_kind}_{output.set_id}"


def _config_by_key(outputs: list[SystemOutput]) -> dict[OutputKey, str]:
    return {o.output_key: config_id(o) for o in outputs}


def consensus_labels(records: list[AnnotationRecord]) -> dict[OutputKey, str]:
    """Layer-1 consensus per output key.

    Single-rater keys stand as-is; multi-rater keys go through
    reconciliation. Unresolvable keys raise, listing every one.
    """
    grouped = latest_by_output(records)
    labels: dict[OutputKey, str] = {}
    unresolved: list[OutputKey] = []
    for key, recs in grouped.items():
        if len(recs) == 1:
            labels[key] = recs[0].layer1
            continue
        outcome = reconcile_layer1(recs)
        if outcome.label is None:
            unresolved.append(key)
        else:
            labels[key] = outcome.label
    if unresolved:
        listing = ", ".join(f"{run}/{entry}" for run, entry in sorted(unresolved))
        raise ValueError(f"missing consensus for keys: {listing}")
    return labels


def _percentages(counts: dict[str, int]) -> dict[str, float]:
    total = sum(counts.values())
    return {lab: round(100.0 * c / total, 2) for lab, c in counts.items()}


def neutrality_distribution(
    records: list[AnnotationRecord], outputs: list[SystemOutput]
) -> dict[str, dict]:
    """Per-config N/G/P percentages over consensus layer-1 labels."""
    configs = _config_by_key(outputs)
    labels = consensus_labels(records)
    counts: dict[str, dict[str, int]] = {}
    for key, label in labels.items():
        if key not in configs:
            raise ValueError(f"annotation references unknown output {key[0]}/{key[1]}")
        cfg = configs[key]
        counts.setdefault(cfg, {lab: 0 for lab in LAYER1_LABELS})[label] += 1
    return {
        cfg: {"counts": cnt, "percent": _percentages(cnt)}
        for cfg, cnt in sorted(counts.items())
    }


def acceptability_distribution(
    records: list[AnnotationRecord], outputs: list[SystemOutput]
) -> dict[str, dict]:
    """Per-config acceptability percentages over N and P outputs.

    Overlap keys judged by several raters are averaged into a single
    category first, so each output counts once.
    """
    configs = _config_by_key(outputs)
    grouped = latest_by_output(records)
    counts: dict[str, dict[str, int]] = {}
    for key, recs in sorted(grouped.items()):
        for rec in recs:
            violations = validate_record(rec)
            if violations:
                raise ValueError(
                    f"invalid annotation for {key[0]}/{key[1]} by {rec.rater_id}: "
                    + "; ".join(violations)
                )
        bearing = [r for r in recs if r.layer2 is not None]
        if not bearing:
            continue
        if key not in configs:
            raise ValueError(f"annotation references unknown output {key[0]}/{key[1]}")
        if len(bearing) == 1:
            category = bearing[0].layer2
        else:
            _, category = average_overlap_acceptability(bearing)
        cfg = configs[key]
        counts.setdefault(cfg, {lab: 0 for lab in LAYER2_LABELS})[category] += 1
    if not counts:
        raise ValueError("no acceptability-bearing outputs")
    return {
        cfg: {"counts": cnt, "percent": _percentages(cnt)}
        for cfg, cnt in sorted(counts.items())
    }


@dataclass(frozen=True)
class ComparisonReport:
    tau: float | None
    f1_table: dict[str, F1Report]
    ranking_human: dict[str, int]
    ranking_classifier: dict[str, int]


def build_comparison(
    records: list[AnnotationRecord],
    classifier_labels: dict[OutputKey, str],
    outputs: list[SystemOutput],
) -> ComparisonReport:
    """Classifier-vs-human ranking correlation and per-system F1 agreement.

    Rankings count fully-neutral labels per system: consensus N on the human
    side, N on the classifier side. F1 is computed after merging human P
    into G.
    """
    configs = _config_by_key(outputs)
    labels = consensus_labels(records)
    missing = [k for k in labels if k not in classifier_labels]
    if missing:
        listing = ", ".join(f"{run}/{entry}" for run, entry in sorted(missing))
        raise ValueError(f"classifier labels missing for keys: {listing}")
    human_by_system: dict[str, list[str]] = {}
    clf_by_system: dict[str, list[str]] = {}
    for key in sorted(labels):
        if key not in configs:
            raise ValueError(f"annotation references unknown output {key[0]}/{key[1]}")
        cfg = configs[key]
        human_by_system.setdefault(cfg, []).append(labels[key])
        clf_by_system.setdefault(cfg, []).append(classifier_labels[key])
    systems = sorted(human_by_system)
    ranking_human = {s: sum(1 for lab in human_by_system[s] if lab == "N") for s in systems}
    ranking_classifier = {s: sum(1 for lab in clf_by_system[s] if lab == "N") for s in systems}
    try:
        tau = kendall_tau(
            [float(ranking_human[s]) for s in systems],
            [float(ranking_classifier[s]) for s in systems],
        )
    except DegenerateInputError:
        tau = None
    f1_table = {
        s: f1_agreement(human_by_system[s], clf_by_system[s]) for s in systems
    }
    return ComparisonReport(
        tau=tau,
        f1_table=f1_table,
        ranking_human=ranking_human,
        ranking_classifier=ranking_classifier,
    )


def comparison_to_dict(cmp: ComparisonReport) -> dict:
    return {
        "tau": None if cmp.tau is None else round(cmp.tau, 6),
        "ranking_human": dict(sorted(cmp.ranking_human.items())),
        "ranking_classifier": dict(sorted(cmp.ranking_classifier.items())),
        "f1": {
            system: {
                "per_class": {c: round(v, 2) for c, v in rep.per_class.items()},
                "weighted": round(rep.weighted, 2),
                "confusion": {f"{t}->{p}": c for (t, p), c in sorted(rep.confusion.items())},
            }
            for system, rep in sorted(cmp.f1_table.items())
        },
    }


# --- rendering -------------------------------------------------------------


def render_report_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _distribution_lines(title: str, dist: dict[str, dict], labels: tuple[str, ...]) -> list[str]:
    lines = [f"== {title} ==", ""]
    width = max([len("config")] + [len(cfg) for cfg in dist])
    header = f"{'config':<{width}}" + "".join(f"{lab:>8}" for lab in labels) + f"{'(n)':>7}"
    lines.append(header)
    for cfg, row in dist.items():
        total = sum(row["counts"].values())
        cells = "".join(f"{row['percent'][lab]:>8.2f}" for lab in labels)
        lines.append(f"{cfg:<{width}}{cells}{total:>7}")
    lines.append("")
    return lines


def render_report_text(payload: dict) -> str:
    lines: list[str] = ["GNT bench report", ""]
    if "neutrality" in payload:
        lines += _distribution_lines("Neutrality (%)", payload["neutrality"], LAYER1_LABELS)
    if "acceptability" in payload:
        lines += _distribution_lines("Acceptability (%)", payload["acceptability"], LAYER2_LABELS)
    if "agreement" in payload:
        lines += ["== Rater agreement =="]
        for name, value in sorted(payload["agreement"].items()):
            if value is None:
                shown = "n/a"
            elif isinstance(value, int):
                shown = str(value)
            else:
                shown = f"{value:.2f}"
            lines.append(f"{name} = {shown}")
        lines.append("")
    if "metrics" in payload:
        lines += ["== Surface metrics =="]
        for cfg, row in sorted(payload["metrics"].items()):
            cells = "  ".join(
                f"{name}={'n/a' if v is None else format(v, '.2f')}"
                for name, v in sorted(row.items())
            )
            lines.append(f"{cfg}: {cells}")
        lines.append("")
    if "comparison" in payload:
        cmp = payload["comparison"]
        tau = cmp.get("tau")
        lines += ["== Classifier vs human =="]
        lines.append(f"kendall_tau_b = {'n/a' if tau is None else format(tau, '.2f')}")
        lines.append(f"{'system':<28}{'human N':>9}{'clf N':>7}{'F1(N)':>8}{'F1(G)':>8}{'wF1':>8}")
        for system in sorted(cmp["f1"]):
            f1 = cmp["f1"][system]
            lines.append(
                f"{system:<28}"
                f"{cmp['ranking_human'][system]:>9}"
                f"{cmp['ranking_classifier'][system]:>7}"
                f"{f1['per_class']['N']:>8.2f}"
                f"{f1['per_class']['G']:>8.2f}"
                f"{f1['weighted']:>8.2f}"
            )
        lines.append("")
    return "\n".join(lines) + "\n"


PALETTE = ("#4878a8", "#e49444", "#6a9f58", "#d1605e")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def bar_chart_svg(
    title: str,
    groups: list[tuple[str, list[float]]],
    series: tuple[str, ...],
    y_max: float | None = None,
) -> str:
    """Deterministic grouped bar chart; no external plotting dependency."""
    bar_w = 22
    gap = 26
    margin_left, margin_top, margin_bottom = 52, 46, 76
    group_w = bar_w * len(series) + gap
    plot_h = 200.0
    width = margin_left + max(1, len(groups)) * group_w + 20
    height = margin_top + plot_h + margin_bottom
    if y_max is None:
        y_max = max((v for _, values in groups for v in values), default=1.0)
    y_max = max(y_max, 1.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0f}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{margin_left}" y="20" font-size="14">{_esc(title)}</text>',
        f'<line x1="{margin_left}" y1="{margin_top + plot_h:.1f}" '
        f'x2="{width - 10}" y2="{margin_top + plot_h:.1f}" stroke="#333"/>',
        f'<line x1="{margin_left}" y1="{margin_top}" '
        f'x2="{margin_left}" y2="{margin_top + plot_h:.1f}" stroke="#333"/>',
    ]
    for i, label in enumerate(series):
        x = margin_left + 8 + i * 92
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<rect x="{x}" y="28" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{x + 14}" y="37">{_esc(label)}</text>')
    for gi, (group_label, values) in enumerate(groups):
        gx = margin_left + gi * group_w + gap / 2
        for si, value in enumerate(values):
            h = plot_h * value / y_max
            x = gx + si * bar_w
            y = margin_top + plot_h - h
            color = PALETTE[si % len(PALETTE)]
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w - 3}" height="{h:.1f}" fill="{color}">'
                f"<title>{_esc(group_label)} {_esc(series[si])}: {value:.2f}</title></rect>"
            )
            parts.append(
                f'<text x="{x + (bar_w - 3) / 2:.1f}" y="{y - 3:.1f}" '
                f'text-anchor="middle" font-size="9">{value:.2f}</text>'
            )
        parts.append(
            f'<text x="{gx + bar_w * len(values) / 2:.1f}" y="{margin_top + plot_h + 12:.1f}" '
            f'text-anchor="end" font-size="10" '
            f'transform="rotate(-35 {gx + bar_w * len(values) / 2:.1f} {margin_top + plot_h + 12:.1f})">'
            f"{_esc(group_label)}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def neutrality_figure(dist: dict[str, dict]) -> str:
    groups = [(cfg, [row["percent"][lab] for lab in LAYER1_LABELS]) for cfg, row in dist.items()]
    return bar_chart_svg("Neutrality of outputs (%)", groups, LAYER1_LABELS, y_max=100.0)


def acceptability_figure(dist: dict[str, dict]) -> str:
    groups = [(cfg, [row["percent"][lab] for lab in LAYER2_LABELS]) for cfg, row in dist.items()]
    return bar_chart_svg("Acceptability of neutralizations (%)", groups, LAYER2_LABELS, y_max=100.0)


def classifier_figure(comparison: dict) -> str:
    systems = sorted(comparison["ranking_human"])
    groups = [
        (
            s,
            [
                float(comparison["ranking_human"][s]),
                float(comparison["ranking_classifier"][s]),
            ],
        )
        for s in systems
    ]
    tau = comparison.get("tau")
    title = "Neutral counts, human vs classifier"
    if tau is not None:
        title += f" (tau-b = {tau:.2f})"
    return bar_chart_svg(title, groups, ("human", "classifier"))


def write_report_files(run_dir, payload: dict) -> list[str]:
    """Write report.json, report.txt and any figures the payload supports."""
    from pathlib import Path

    run_dir = Path(run_dir)
    written = []

    def put(name: str, content: str) -> None:
        (run_dir / name).write_text(content, encoding="utf-8")
        written.append(name)

    put("report.json", render_report_json(payload))
    put("report.txt", render_report_text(payload))
    if "neutrality" in payload:
        put("fig_neutrality.svg", neutrality_figure(payload["neutrality"]))
    if "acceptability" in payload:
        put("fig_acceptability.svg", acceptability_figure(payload["acceptability"]))
    if "comparison" in payload:
        put("fig_classifier.svg", classifier_figure(payload["comparison"]))
    return written
