"""Command-line pipeline orchestration around a run-directory convention.

Run directory layout:
    manifest.json            config snapshots, seeds, artifact paths
    corpus.json              parsed corpus with derived term spans
    outputs/<config>.jsonl   one SystemOutput per line, per configuration
    plan.json                rater assignment plan
    annotations.jsonl        append-only judgment store
    classifier_labels.tsv    externally supplied neutrality labels
    agreement.json, scores.json, comparison.json, report.*, fig_*.svg

Exit codes: 0 success, 1 failure (single `error: ...` line on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import annotation, backend, corpus, postprocess, prompts, report, stats
from .annotation import AnnotationStore
from .server import create_app

TEMPLATE_CHOICES = ("zero_shot", "contr", "cot_src", "cot_tgt")
EXEMPLAR_CHOICES = ("seen", "not_seen", "none")
BACKEND_CHOICES = ("http_chat", "mock_echo_neutral", "mock_fixed")

# Effective setting = defaults, overridden by config file, overridden by flags.
SETTING_DEFAULTS = {
    "template": "",
    "exemplars": "",
    "backend": "",
    "system_name": "",
    "model": "default",
    "endpoint": "",
    "credential_env": "",
    "temperature": "0.0",
    "max_attempts": "3",
    "max_in_flight": "4",
    "shots": "3",
    "target_language": "Italian",
    "seed": "0",
    "fixed_text": "",
}


def parse_config_file(text: str) -> dict[str, str]:
    """`key = value` lines; blank lines and # comments ignored."""
    settings: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected key = value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in SETTING_DEFAULTS:
            raise ValueError(f"config line {lineno}: unknown setting {key!r}")
        settings[key] = value.strip().strip('"')
    return settings


def _load_manifest(run_dir: Path) -> dict:
    path = run_dir / "manifest.json"
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {"runs": {}}


def _save_manifest(run_dir: Path, manifest: dict) -> None:
    path = run_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _load_corpus(run_dir: Path) -> list[corpus.CorpusEntry]:
    path = run_dir / "corpus.json"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `prepare` first")
    return corpus.corpus_from_json(path.read_text(encoding="utf-8"))


def _load_outputs(run_dir: Path, configs: list[str] | None = None) -> list[postprocess.SystemOutput]:
    out_dir = run_dir / "outputs"
    if not out_dir.is_dir():
        raise FileNotFoundError(f"{out_dir} not found; run `translate` first")
    paths = sorted(out_dir.glob("*.jsonl"))
    if configs:
        wanted = {f"{c}.jsonl" for c in configs}
        paths = [p for p in paths if p.name in wanted]
        found = {p.name for p in paths}
        missing = sorted(wanted - found)
        if missing:
            raise FileNotFoundError(f"no outputs for configs: {', '.join(missing)}")
    outputs: list[postprocess.SystemOutput] = []
    for path in paths:
        outputs.extend(postprocess.read_outputs_jsonl(path.read_text(encoding="utf-8")))
    if not outputs:
        raise ValueError(f"no outputs found under {out_dir}")
    return outputs


def _load_annotations(run_dir: Path) -> list[annotation.AnnotationRecord]:
    store = AnnotationStore(run_dir / "annotations.jsonl")
    records = store.load()
    if not records:
        raise FileNotFoundError(f"{run_dir / 'annotations.jsonl'} is missing or empty")
    return records


def run_id_for(system_name: str, template: str, set_id: str, seed: int, model: str) -> str:
    digest = hashlib.sha256(f"{system_name}|{template}|{set_id}|{seed}|{model}".encode())
    return digest.hexdigest()[:12]


# --- subcommands ------------------------------------------------------------


def cmd_prepare(args) -> int:
    run_dir = Path(args.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    text = Path(args.corpus).read_text(encoding="utf-8")
    entries = corpus.derive_spans(corpus.parse_corpus(text))
    (run_dir / "corpus.json").write_text(corpus.corpus_to_json(entries), encoding="utf-8")
    manifest = _load_manifest(run_dir)
    manifest["corpus_path"] = str(args.corpus)
    manifest["corpus_entries"] = len(entries)
    manifest["prepared_at"] = annotation.utc_now_iso()
    _save_manifest(run_dir, manifest)
    print(f"prepared {len(entries)} entries -> {run_dir / 'corpus.json'}")
    return 0


def _effective_settings(args) -> dict[str, str]:
    settings = dict(SETTING_DEFAULTS)
    if args.config:
        settings.update(parse_config_file(Path(args.config).read_text(encoding="utf-8")))
    for key in SETTING_DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = str(flag)
    return settings


def _backend_config(settings: dict[str, str], entries) -> backend.BackendConfig:
    kind = settings["backend"]
    if kind not in BACKEND_CHOICES:
        raise ValueError(f"backend must be one of {', '.join(BACKEND_CHOICES)}, got {kind!r}")
    fixture = {}
    if kind == "mock_echo_neutral":
        fixture = {e.src_en: e.ref_neutral for e in entries}
    return backend.BackendConfig(
        kind=kind,
        model_name=settings["model"],
        temperature=float(settings["temperature"]),
        endpoint_url=settings["endpoint"],
        credential_env_var=settings["credential_env"],
        max_attempts=int(settings["max_attempts"]),
        max_in_flight=int(settings["max_in_flight"]),
        fixed_text=settings["fixed_text"],
        neutral_fixture=fixture,
    )


def _translate_one_config(
    run_dir: Path,
    entries,
    template: str,
    set_id: str,
    settings: dict[str, str],
    manifest: dict,
) -> str:
    config = _backend_config(settings, entries)
    system_name = settings["system_name"] or (
        settings["model"] if config.kind == "http_chat" else "mock"
    )
    seed = int(settings["seed"])
    shots = int(settings["shots"])
    if template == "zero_shot":
        bundles = [prompts.build_zero_shot(e.src_en, settings["target_language"]) for e in entries]
        set_id = "none"
    else:
        sets = prompts.load_default_exemplars()
        if set_id not in sets:
            raise ValueError(f"few-shot template needs --exemplars seen or not_seen, got {set_id!r}")
        full = sets[set_id]
        if not 1 <= shots <= len(full.triplets):
            raise ValueError(f"shots must be in [1, {len(full.triplets)}], got {shots}")
        exemplars = prompts.ExemplarSet(full.set_id, full.triplets[:shots])
        bundles = [prompts.build_few_shot(template, exemplars, e.src_en) for e in entries]
    run_id = run_id_for(system_name, template, set_id, seed, settings["model"])
    cfg_id = f"{system_name}_{template}_{set_id}"
    results = backend.run_batch(entries, bundles, config)
    outputs: list[postprocess.SystemOutput] = []
    failures: dict[str, str] = {}
    for result in results:
        if result.error is not None:
            failures[result.entry_id] = result.error
            continue
        outputs.append(
            postprocess.build_output(
                entry_id=result.entry_id,
                run_id=run_id,
                system_name=system_name,
                template_kind=template,
                set_id=set_id,
                raw_text=result.response.text,
            )
        )
    out_dir = run_dir / "outputs"
    out_dir.mkdir(exist_ok=True)
    out_path = out_dir / f"{cfg_id}.jsonl"
    out_path.write_text(postprocess.write_outputs_jsonl(outputs), encoding="utf-8")
    manifest["runs"][cfg_id] = {
        "run_id": run_id,
        "system_name": system_name,
        "template_kind": template,
        "set_id": set_id,
        "seed": seed,
        "backend": {
            "kind": config.kind,
            "model_name": config.model_name,
            "temperature": config.temperature,
            "endpoint_url": config.endpoint_url,
            "credential_env_var": config.credential_env_var,
            "max_attempts": config.max_attempts,
            "max_in_flight": config.max_in_flight,
        },
        "outputs_path": str(out_path.relative_to(run_dir)),
        "failures": failures,
        "created_at": annotation.utc_now_iso(),
    }
    print(f"{cfg_id}: {len(outputs)} outputs, {len(failures)} failures -> {out_path}")
    return cfg_id


def cmd_translate(args) -> int:
    run_dir = Path(args.run_dir)
    entries = _load_corpus(run_dir)
    settings = _effective_settings(args)
    manifest = _load_manifest(run_dir)
    if args.matrix:
        combos = [(t, s) for t in ("contr", "cot_src", "cot_tgt") for s in ("seen", "not_seen")]
    else:
        template = settings["template"]
        if template not in TEMPLATE_CHOICES:
            raise ValueError(
                f"template must be one of {', '.join(TEMPLATE_CHOICES)}, got {template!r}"
            )
        set_id = settings["exemplars"] if template != "zero_shot" else "none"
        combos = [(template, set_id)]
    if settings["backend"] == "http_chat" and not settings["credential_env"]:
        raise ValueError("http_chat requires --credential-env naming the secret's variable")
    for template, set_id in combos:
        _translate_one_config(run_dir, entries, template, set_id, settings, manifest)
    _save_manifest(run_dir, manifest)
    return 0


def cmd_sample(args) -> int:
    run_dir = Path(args.run_dir)
    configs = args.configs.split(",") if args.configs else None
    outputs = _load_outputs(run_dir, configs)
    raters = [r for r in args.raters.split(",") if r]
    plan = annotation.sample_outputs(outputs, args.n, raters, args.overlap, args.seed)
    (run_dir / "plan.json").write_text(annotation.plan_to_json(plan), encoding="utf-8")
    sizes = ", ".join(f"{r}={len(ks)}" for r, ks in plan.exclusive.items())
    print(
        f"plan: {len(plan.sample)} sampled, {len(plan.shared)} shared, "
        f"exclusive {sizes} -> {run_dir / 'plan.json'}"
    )
    return 0


def build_server_app(run_dir: Path, ui_dir: str | None = None):
    entries = _load_corpus(run_dir)
    outputs = _load_outputs(run_dir)
    plan_path = run_dir / "plan.json"
    if not plan_path.exists():
        raise FileNotFoundError(f"{plan_path} not found; run `sample` first")
    plan = annotation.plan_from_json(plan_path.read_text(encoding="utf-8"))
    store = AnnotationStore(run_dir / "annotations.jsonl")
    return create_app(
        plan=plan,
        outputs_by_key={o.output_key: o for o in outputs},
        entries_by_id={e.id: e for e in entries},
        store=store,
        ui_dir=ui_dir,
    )


def cmd_serve(args) -> int:
    import uvicorn

    app = build_server_app(Path(args.run_dir), args.ui_dir)
    print(f"serving annotation backend on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_agree(args) -> int:
    run_dir = Path(args.run_dir)
    plan_path = run_dir / "plan.json"
    if not plan_path.exists():
        raise FileNotFoundError(f"{plan_path} not found; run `sample` first")
    plan = annotation.plan_from_json(plan_path.read_text(encoding="utf-8"))
    records = _load_annotations(run_dir)
    grouped = annotation.latest_by_output(records)
    raters = list(plan.raters)
    complete = []
    for key in plan.shared:
        recs = {r.rater_id: r for r in grouped.get(key, [])}
        if len(recs) == len(raters) and all(r in recs for r in raters):
            complete.append((key, recs))
    if not complete:
        raise ValueError("no shared keys judged by every rater; nothing to agree on")
    rows = []
    for _, recs in complete:
        row = [0] * len(annotation.LAYER1_LABELS)
        for rec in recs.values():
            row[annotation.LAYER1_LABELS.index(rec.layer1)] += 1
        rows.append(tuple(row))
    result: dict[str, float | int | None] = {"n_shared_complete": len(complete)}
    try:
        kappa = stats.fleiss_kappa(rows)
        print(f"fleiss_kappa = {kappa:.2f} over {len(complete)} shared outputs")
        result["fleiss_kappa"] = round(kappa, 6)
    except stats.DegenerateInputError as exc:
        print(f"fleiss_kappa = n/a ({exc})")
        result["fleiss_kappa"] = None
    icc_rows = []
    for _, recs in complete:
        if all(recs[r].layer2 is not None for r in raters):
            icc_rows.append(tuple(float(annotation.LAYER2_NUMERIC[recs[r].layer2]) for r in raters))
    result["n_icc_rows"] = len(icc_rows)
    if len(icc_rows) >= 2:
        try:
            icc = stats.icc3(icc_rows)
            print(f"icc3 = {icc:.2f} over {len(icc_rows)} acceptability rows")
            result["icc3"] = round(icc, 6)
        except stats.DegenerateInputError as exc:
            print(f"icc3 = n/a ({exc})")
            result["icc3"] = None
    else:
        print("icc3 = n/a (fewer than 2 shared outputs with full acceptability judgments)")
        result["icc3"] = None
    (run_dir / "agreement.json").write_text(
        json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0


def cmd_score(args) -> int:
    run_dir = Path(args.run_dir)
    entries = {e.id: e for e in _load_corpus(run_dir)}
    outputs = _load_outputs(run_dir)
    by_config: dict[str, list[postprocess.SystemOutput]] = {}
    for output in outputs:
        by_config.setdefault(report.config_id(output), []).append(output)
    scores: dict[str, dict] = {}
    for cfg, outs in sorted(by_config.items()):
        hyps = [o.extracted for o in outs]
        neutral_refs = [entries[o.entry_id].ref_neutral for o in outs]
        gendered_refs = [entries[o.entry_id].ref_gendered for o in outs]
        scores[cfg] = {
            "bleu_vs_neutral": round(stats.bleu(hyps, neutral_refs), 2),
            "chrf_vs_neutral": round(stats.chrf(hyps, neutral_refs), 2),
            "bleu_vs_gendered": round(stats.bleu(hyps, gendered_refs), 2),
            "chrf_vs_gendered": round(stats.chrf(hyps, gendered_refs), 2),
            # reserved for externally computed neural metrics
            "bleurt": None,
            "comet": None,
        }
        row = scores[cfg]
        print(
            f"{cfg}: bleu_vs_neutral={row['bleu_vs_neutral']:.2f} "
            f"chrf_vs_neutral={row['chrf_vs_neutral']:.2f}"
        )
    (run_dir / "scores.json").write_text(
        json.dumps(scores, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0


def cmd_compare(args) -> int:
    run_dir = Path(args.run_dir)
    labels_path = Path(args.labels) if args.labels else run_dir / "classifier_labels.tsv"
    if not labels_path.exists():
        raise FileNotFoundError(f"classifier labels not found at {labels_path}")
    labels = stats.load_classifier_labels(labels_path.read_text(encoding="utf-8"))
    records = _load_annotations(run_dir)
    outputs = _load_outputs(run_dir)
    cmp = report.build_comparison(records, labels, outputs)
    payload = report.comparison_to_dict(cmp)
    (run_dir / "comparison.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    tau = "n/a" if cmp.tau is None else f"{cmp.tau:.2f}"
    print(f"kendall_tau_b = {tau} over {len(cmp.f1_table)} systems")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    manifest = _load_manifest(run_dir)
    for cfg, run in manifest.get("runs", {}).items():
        out_path = run_dir / run["outputs_path"]
        if not out_path.exists():
            raise FileNotFoundError(f"manifest references missing artifact {out_path} ({cfg})")
    outputs = _load_outputs(run_dir)
    payload: dict = {}
    ann_path = run_dir / "annotations.jsonl"
    if ann_path.exists():
        records = _load_annotations(run_dir)
        payload["neutrality"] = report.neutrality_distribution(records, outputs)
        try:
            payload["acceptability"] = report.acceptability_distribution(records, outputs)
        except ValueError as exc:
            if "no acceptability-bearing outputs" not in str(exc):
                raise
            # an all-gendered result set has no layer-2 judgments to chart
    for name in ("agreement", "scores", "comparison"):
        path = run_dir / f"{name}.json"
        if path.exists():
            key = "metrics" if name == "scores" else name
            payload[key] = json.loads(path.read_text(encoding="utf-8"))
    if not payload:
        raise ValueError("nothing to report: no annotations, scores, or comparison present")
    written = report.write_report_files(run_dir, payload)
    for name in written:
        print(f"wrote {run_dir / name}")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gntbench",
        description="Gender-neutral translation bench: prompting, annotation, statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="parse a corpus TSV and derive term spans")
    p.add_argument("--corpus", required=True)
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("translate", help="build prompts, query the backend, extract answers")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--template", choices=TEMPLATE_CHOICES)
    p.add_argument("--exemplars", choices=EXEMPLAR_CHOICES)
    p.add_argument("--backend", choices=BACKEND_CHOICES)
    p.add_argument("--system-name", dest="system_name")
    p.add_argument("--model")
    p.add_argument("--endpoint")
    p.add_argument("--credential-env", dest="credential_env")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--target-language", dest="target_language")
    p.add_argument("--seed", type=int)
    p.add_argument("--fixed-text", dest="fixed_text")
    p.add_argument("--matrix", action="store_true", help="run all six few-shot configurations")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("sample", help="draw an annotation sample and split it among raters")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--raters", required=True, help="comma-separated rater ids")
    p.add_argument("--overlap", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--configs", help="restrict to these comma-separated config ids")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("serve", help="serve annotation tasks over HTTP")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", dest="ui_dir", help="static frontend directory to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("agree", help="rater agreement statistics on the shared overlap")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("score", help="BLEU/chrF of outputs against both references")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="classifier-vs-human ranking correlation and F1")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--labels", help="classifier label TSV (default: run dir)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="aggregate everything into report files and figures")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 1
    except Exception as exc:
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
