"""Agreement and quality statistics.

Fleiss' kappa and ICC(3,1) quantify rater agreement on the overlap slice,
Kendall's tau-b compares system rankings, F1 measures classifier-vs-human
agreement after merging P into G, and corpus BLEU/chrF score translations
against references. All implementations are direct transcriptions of the
published formulas; tests check them against independently coded oracles.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

import numpy as np


class DegenerateInputError(ValueError):
    """The statistic is undefined on this input (e.g. zero variance)."""


@dataclass(frozen=True)
class CountsMatrix:
    """Items x categories table of rater counts; every row sums to k raters."""

    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("counts matrix must have at least one row")
        widths = {len(row) for row in self.counts}
        if len(widths) != 1:
            raise ValueError("counts matrix rows must have equal length")
        if any(c < 0 or c != int(c) for row in self.counts for c in row):
            raise ValueError("counts must be non-negative integers")
        sums = {sum(row) for row in self.counts}
        if len(sums) != 1:
            raise ValueError(f"rows must sum to a constant rater count, got sums {sorted(sums)}")
        k = next(iter(sums))
        if k < 2:
            raise ValueError(f"need at least 2 raters per item, got {k}")

    @property
    def raters_per_item(self) -> int:
        return sum(self.counts[0])


@dataclass(frozen=True)
class RatingsMatrix:
    """Items x raters table of numeric ratings; complete, at least 2x2."""

    ratings: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.ratings) < 2:
            raise ValueError("need at least 2 items")
        widths = {len(row) for row in self.ratings}
        if len(widths) != 1:
            raise ValueError("ratings rows must have equal length")
        if next(iter(widths)) < 2:
            raise ValueError("need at least 2 raters")


def _as_counts(m) -> CountsMatrix:
    if isinstance(m, CountsMatrix):
        return m
    return CountsMatrix(tuple(tuple(int(c) for c in row) for row in m))


def _as_ratings(m) -> RatingsMatrix:
    if isinstance(m, RatingsMatrix):
        return m
    return RatingsMatrix(tuple(tuple(float(c) for c in row) for row in m))


def fleiss_kappa(m) -> float:
    """Fleiss (1971) kappa over a CountsMatrix or raw items x categories table."""
    cm = _as_counts(m)
    counts = np.asarray(cm.counts, dtype=float)
    n_items, _ = counts.shape
    k = cm.raters_per_item
    p_cat = counts.sum(axis=0) / (n_items * k)
    p_expected = float((p_cat**2).sum())
    if p_expected >= 1.0:
        raise DegenerateInputError("all assignments fall in one category; kappa undefined")
    p_item = ((counts**2).sum(axis=1) - k) / (k * (k - 1))
    p_observed = float(p_item.mean())
    return (p_observed - p_expected) / (1.0 - p_expected)


def icc3(m) -> float:
    """ICC(3,1): two-way mixed, consistency, single rater (Shrout & Fleiss)."""
    rm = _as_ratings(m)
    x = np.asarray(rm.ratings, dtype=float)
    n, k = x.shape
    grand = x.mean()
    if np.all(x == x.flat[0]):
        raise DegenerateInputError("all ratings identical; ICC undefined")
    ss_rows = k * float(((x.mean(axis=1) - grand) ** 2).sum())
    ss_cols = n * float(((x.mean(axis=0) - grand) ** 2).sum())
    ss_total = float(((x - grand) ** 2).sum())
    ss_err = ss_total - ss_rows - ss_cols
    ms_rows = ss_rows / (n - 1)
    ms_err = ss_err / ((n - 1) * (k - 1))
    denom = ms_rows + (k - 1) * ms_err
    if denom <= 0:
        raise DegenerateInputError("zero between-target and residual variance; ICC undefined")
    return (ms_rows - ms_err) / denom


def kendall_tau(rank_a, rank_b) -> float:
    """Kendall tau-b over two equal-length ranking score lists."""
    a = [float(v) for v in rank_a]
    b = [float(v) for v in rank_b]
    if len(a) != len(b):
        raise ValueError(f"rankings differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise DegenerateInputError("need at least 2 items to rank")
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            prod = (a[i] - a[j]) * (b[i] - b[j])
            if prod > 0:
                concordant += 1
            elif prod < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    n1 = sum(t * (t - 1) // 2 for t in Counter(a).values())
    n2 = sum(t * (t - 1) // 2 for t in Counter(b).values())
    if n0 == n1 or n0 == n2:
        raise DegenerateInputError("a fully tied ranking has no order; tau undefined")
    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


@dataclass(frozen=True)
class F1Report:
    per_class: dict[str, float]
    weighted: float
    confusion: dict[tuple[str, str], int] = field(default_factory=dict)


def merge_partial(label: str) -> str:
    """Collapse the three-way human label onto the classifier's binary scheme."""
    return "G" if label == "P" else label


def f1_agreement(human: list[str], classifier: list[str]) -> F1Report:
    """F1 of the binary classifier against human labels with P merged into G.

    Human labels are ground truth, classifier labels the prediction; scores
    are percentages, weighted by ground-truth class support.
    """
    if not human:
        raise ValueError("empty label lists")
    if len(human) != len(classifier):
        raise ValueError(f"label lists differ in length: {len(human)} vs {len(classifier)}")
    for lab in human:
        if lab not in ("N", "G", "P"):
            raise ValueError(f"unknown human label {lab!r}")
    for lab in classifier:
        if lab not in ("N", "G"):
            raise ValueError(f"unknown classifier label {lab!r}")
    truth = [merge_partial(lab) for lab in human]
    classes = ("N", "G")
    confusion = {(t, p): 0 for t in classes for p in classes}
    for t, p in zip(truth, classifier):
        confusion[(t, p)] += 1
    per_class: dict[str, float] = {}
    supports: dict[str, int] = {}
    for c in classes:
        tp = confusion[(c, c)]
        pred_c = sum(confusion[(t, c)] for t in classes)
        true_c = sum(confusion[(c, p)] for p in classes)
        supports[c] = true_c
        if tp == 0:
            per_class[c] = 0.0
            continue
        precision = tp / pred_c
        recall = tp / true_c
        per_class[c] = 2 * precision * recall / (precision + recall) * 100.0
    total = sum(supports.values())
    weighted = sum(per_class[c] * supports[c] for c in classes) / total
    return F1Report(per_class=per_class, weighted=weighted, confusion=confusion)


# --- surface metrics -------------------------------------------------------


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def bleu_tokenize(sentence: str) -> list[str]:
    """Whitespace tokens with punctuation detached from word edges."""
    tokens: list[str] = []
    for word in sentence.split():
        start, end = 0, len(word)
        lead: list[str] = []
        while start < end and _is_punct(word[start]):
            lead.append(word[start])
            start += 1
        trail: list[str] = []
        while end > start and _is_punct(word[end - 1]):
            trail.append(word[end - 1])
            end -= 1
        tokens.extend(lead)
        if start < end:
            tokens.append(word[start:end])
        tokens.extend(reversed(trail))
    return tokens


def _ngram_counts(tokens: list, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: list[str], references: list[str]) -> float:
    """Corpus BLEU, orders 1-4, brevity penalty, no smoothing."""
    if not hypotheses:
        raise ValueError("empty corpus")
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    matched = [0] * 4
    total = [0] * 4
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = bleu_tokenize(hyp)
        ref_tokens = bleu_tokenize(ref)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, 5):
            hyp_counts = _ngram_counts(hyp_tokens, n)
            ref_counts = _ngram_counts(ref_tokens, n)
            clipped = hyp_counts & ref_counts
            matched[n - 1] += sum(clipped.values())
            total[n - 1] += sum(hyp_counts.values())
    if any(t == 0 for t in total) or any(c == 0 for c in matched):
        return 0.0
    log_precision = sum(math.log(c / t) for c, t in zip(matched, total)) / 4
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision)


def chrf(hypotheses: list[str], references: list[str], beta: float = 2.0) -> float:
    """Corpus chrF: character n-grams (1-6) on whitespace-stripped text.

    Orders where neither side has any n-gram (short corpora) are skipped so
    identical corpora always score 100.
    """
    if not hypotheses:
        raise ValueError("empty corpus")
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    orders = range(1, 7)
    overlap = {n: 0 for n in orders}
    hyp_total = {n: 0 for n in orders}
    ref_total = {n: 0 for n in orders}
    for hyp, ref in zip(hypotheses, references):
        hyp_chars = list("".join(hyp.split()))
        ref_chars = list("".join(ref.split()))
        for n in orders:
            hyp_counts = _ngram_counts(hyp_chars, n)
            ref_counts = _ngram_counts(ref_chars, n)
            overlap[n] += sum((hyp_counts & ref_counts).values())
            hyp_total[n] += sum(hyp_counts.values())
            ref_total[n] += sum(ref_counts.values())
    scores = []
    beta_sq = beta * beta
    for n in orders:
        if hyp_total[n] == 0 and ref_total[n] == 0:
            continue
        if hyp_total[n] == 0 or ref_total[n] == 0:
            scores.append(0.0)
            continue
        precision = overlap[n] / hyp_total[n]
        recall = overlap[n] / ref_total[n]
        if precision + recall == 0:
            scores.append(0.0)
        else:
            scores.append((1 + beta_sq) * precision * recall / (beta_sq * precision + recall))
    if not scores:
        return 0.0
    return 100.0 * sum(scores) / len(scores)


def load_classifier_labels(tsv_text: str) -> dict[tuple[str, str], str]:
    """Parse the external neutrality classifier's label file.

    Format: `run_id<TAB>entry_id<TAB>label` per line, label N or G, no header.
    """
    labels: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(tsv_text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise ValueError(f"classifier labels line {lineno}: expected 3 columns, found {len(cells)}")
        run_id, entry_id, label = cells
        if label not in ("N", "G"):
            raise ValueError(f"classifier labels line {lineno}: label must be N or G, got {label!r}")
        key = (run_id, entry_id)
        if key in labels:
            raise ValueError(f"classifier labels line {lineno}: duplicate key {key}")
        labels[key] = label
    return labels
