"""Gender-neutral translation bench.

Pipeline: parse a triplet corpus, render prompts, query a translation
backend, extract final answers, sample outputs for two-layer human
annotation, and compute agreement/quality statistics and reports.
"""

from .corpus import CorpusEntry, TermSpan, parse_corpus, serialize_corpus, extract_gendered_terms
from .prompts import (
    ExemplarSet,
    ExemplarTriplet,
    PromptBundle,
    build_few_shot,
    build_zero_shot,
    estimate_length,
    load_default_exemplars,
)
from .backend import BackendConfig, BackendError, ConfigurationError, RawResponse, run_batch, translate
from .postprocess import SystemOutput, extract_translation
from .annotation import (
    AnnotationRecord,
    AnnotationStore,
    AssignmentPlan,
    average_overlap_acceptability,
    reconcile_layer1,
    sample_outputs,
    validate_record,
)
from .stats import (
    DegenerateInputError,
    F1Report,
    bleu,
    chrf,
    f1_agreement,
    fleiss_kappa,
    icc3,
    kendall_tau,
)
from .report import (
    ComparisonReport,
    acceptability_distribution,
    build_comparison,
    neutrality_distribution,
)
from .server import create_app

__version__ = "0.1.0"

__all__ = [
    "CorpusEntry",
    "TermSpan",
    "parse_corpus",
    "serialize_corpus",
    "extract_gendered_terms",
    "ExemplarSet",
    "ExemplarTriplet",
    "PromptBundle",
    "build_few_shot",
    "build_zero_shot",
    "estimate_length",
    "load_default_exemplars",
    "BackendConfig",
    "BackendError",
    "ConfigurationError",
    "RawResponse",
    "run_batch",
    "translate",
    "SystemOutput",
    "extract_translation",
    "AnnotationRecord",
    "AnnotationStore",
    "AssignmentPlan",
    "average_overlap_acceptability",
    "reconcile_layer1",
    "sample_outputs",
    "validate_record",
    "DegenerateInputError",
    "F1Report",
    "bleu",
    "chrf",
    "f1_agreement",
    "fleiss_kappa",
    "icc3",
    "kendall_tau",
    "ComparisonReport",
    "acceptability_distribution",
    "build_comparison",
    "neutrality_distribution",
    "create_app",
    "__version__",
]
