"""HTTP server that feeds annotation tasks to raters and stores judgments.

Task views are anonymized: they expose the source sentence, the gendered
reference with highlight spans, and the output under judgment, but never
the producing system, the template, or the exemplar set. The neutral
reference is withheld too, so raters judge the output on its own.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .annotation import (
    AnnotationRecord,
    AnnotationStore,
    AssignmentPlan,
    OutputKey,
    utc_now_iso,
    validate_record,
)
from .corpus import CorpusEntry
from .postprocess import SystemOutput

FALLBACK_PAGE = """<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Annotation</title></head>
<body>
<h1>Annotation backend running</h1>
<p>No user interface bundle is configured. The JSON API is available at:</p>
<ul>
<li><code>GET /api/task?rater=&lt;id&gt;</code></li>
<li><code>POST /api/annotation</code></li>
<li><code>GET /api/progress?rater=&lt;id&gt;</code></li>
</ul>
</body>
</html>
"""


def task_order(plan: AssignmentPlan, rater_id: str) -> list[OutputKey]:
    """A rater's deterministic task sequence.

    Shared overlap keys are spread proportionally among the exclusive keys
    rather than batched at the end, so fatigue affects both slices alike.
    """
    if rater_id not in plan.exclusive:
        raise KeyError(rater_id)
    exclusive = list(plan.exclusive[rater_id])
    shared = list(plan.shared)
    n_ex, n_sh = len(exclusive), len(shared)
    order: list[OutputKey] = []
    e = s = 0
    while e < n_ex or s < n_sh:
        if e < n_ex and (s >= n_sh or (e + 1) * n_sh <= (s + 1) * n_ex):
            order.append(exclusive[e])
            e += 1
        else:
            order.append(shared[s])
            s += 1
    return order


def _task_view(
    key: OutputKey,
    output: SystemOutput,
    entry: CorpusEntry,
    done: int,
    total: int,
) -> dict:
    return {
        "output_key": list(key),
        "src_en": entry.src_en,
        "ref_gendered": entry.ref_gendered,
        "term_spans": [
            {"gendered_text": s.gendered_text, "start": s.start, "end": s.end}
            for s in entry.term_spans
        ],
        "output_text": output.extracted,
        "progress": {"done": done, "total": total},
    }


def create_app(
    plan: AssignmentPlan,
    outputs_by_key: dict[OutputKey, SystemOutput],
    entries_by_id: dict[str, CorpusEntry],
    store: AnnotationStore,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="annotation backend", docs_url=None, redoc_url=None)
    orders = {rater: task_order(plan, rater) for rater in plan.exclusive}

    def progress_of(rater: str) -> tuple[int, int]:
        latest = store.latest()
        order = orders[rater]
        done = sum(1 for key in order if (key, rater) in latest)
        return done, len(order)

    @app.get("/api/task")
    def get_task(rater: str = ""):
        if rater not in orders:
            return JSONResponse(status_code=404, content={"detail": f"unknown rater {rater!r}"})
        latest = store.latest()
        order = orders[rater]
        done = sum(1 for key in order if (key, rater) in latest)
        for key in order:
            if (key, rater) in latest:
                continue
            output = outputs_by_key[key]
            entry = entries_by_id[output.entry_id]
            return _task_view(key, output, entry, done, len(order))
        return {"done": True, "progress": {"done": done, "total": len(order)}}

    @app.post("/api/annotation")
    async def post_annotation(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(
                status_code=422,
                content={"accepted": False, "violations": ["body is not valid JSON"]},
            )
        raw_key = body.get("output_key")
        rater = body.get("rater_id", "")
        if not isinstance(raw_key, (list, tuple)) or len(raw_key) != 2:
            return JSONResponse(
                status_code=422,
                content={"accepted": False, "violations": ["output_key must be [run_id, entry_id]"]},
            )
        if rater not in orders:
            return JSONResponse(status_code=404, content={"detail": f"unknown rater {rater!r}"})
        key: OutputKey = (str(raw_key[0]), str(raw_key[1]))
        if key not in orders[rater]:
            return JSONResponse(
                status_code=422,
                content={
                    "accepted": False,
                    "violations": [f"output {key[0]}/{key[1]} is not assigned to rater {rater!r}"],
                },
            )
        record = AnnotationRecord(
            output_key=key,
            rater_id=rater,
            layer1=body.get("layer1", ""),
            layer2=body.get("layer2"),
            note=body.get("note"),
            timestamp=utc_now_iso(),
        )
        violations = validate_record(record)
        if violations:
            return JSONResponse(
                status_code=422, content={"accepted": False, "violations": violations}
            )
        store.append(record)
        done, total = progress_of(rater)
        return {"accepted": True, "progress": {"done": done, "total": total}}

    @app.get("/api/progress")
    def get_progress(rater: str = ""):
        if rater not in orders:
            return JSONResponse(status_code=404, content={"detail": f"unknown rater {rater!r}"})
        done, total = progress_of(rater)
        return {"done": done, "total": total}

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return HTMLResponse(FALLBACK_PAGE)

    return app
