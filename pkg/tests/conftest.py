from pathlib import Path

import pytest

from gntbench import corpus
from gntbench.annotation import AnnotationRecord
from gntbench.postprocess import SystemOutput

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return DATA_DIR / "fixture_corpus.tsv"


@pytest.fixture(scope="session")
def fixture_entries(fixture_corpus_path):
    text = fixture_corpus_path.read_text(encoding="utf-8")
    return corpus.derive_spans(corpus.parse_corpus(text))


@pytest.fixture
def make_output():
    def factory(
        entry_id="e01",
        run_id="run1",
        system_name="sysA",
        template_kind="contr",
        set_id="seen",
        raw_text="x",
        extracted="x",
        extraction_status="marker",
    ) -> SystemOutput:
        return SystemOutput(
            entry_id=entry_id,
            run_id=run_id,
            system_name=system_name,
            template_kind=template_kind,
            set_id=set_id,
            raw_text=raw_text,
            extracted=extracted,
            extraction_status=extraction_status,
        )

    return factory


_UNSET = object()


@pytest.fixture
def make_record():
    counter = iter(range(10_000))

    def factory(
        entry_id="e01",
        run_id="run1",
        rater_id="a",
        layer1="N",
        layer2=_UNSET,
        note=None,
        timestamp=None,
    ):
        # default acceptability tracks the gating rule unless given explicitly
        if layer2 is _UNSET:
            layer2 = "Acc" if layer1 in ("N", "P") else None
        if timestamp is None:
            timestamp = f"2026-01-01T00:00:00.{next(counter):04d}+00:00"
        return AnnotationRecord(
            output_key=(run_id, entry_id),
            rater_id=rater_id,
            layer1=layer1,
            layer2=layer2,
            note=note,
            timestamp=timestamp,
        )

    return factory
