"""Independent reference implementations used only by the test suite.

These are deliberately coded on different formulations than the package
(exact rationals, pairwise enumeration, recursive search) so that agreement
between the two is evidence of correctness rather than shared bugs.
"""

from __future__ import annotations

import math
import random
import unicodedata
from fractions import Fraction
from functools import lru_cache


def oracle_fleiss(counts) -> float:
    """Fleiss' kappa via agreeing-pair counting, exact rational arithmetic."""
    rows = [list(map(int, row)) for row in counts]
    k = sum(rows[0])
    pairs_per_item = k * (k - 1) // 2
    p_obs = Fraction(0)
    for row in rows:
        agreeing = sum(c * (c - 1) // 2 for c in row)
        p_obs += Fraction(agreeing, pairs_per_item)
    p_obs /= len(rows)
    total = len(rows) * k
    p_exp = Fraction(0)
    for j in range(len(rows[0])):
        column = sum(row[j] for row in rows)
        p_exp += Fraction(column, total) ** 2
    return float((p_obs - p_exp) / (1 - p_exp))


def oracle_icc3(matrix) -> float:
    """ICC(3,1) via explicit additive-model residuals, exact rationals."""
    x = [[Fraction(v) for v in row] for row in matrix]
    n, k = len(x), len(x[0])
    grand = sum(sum(row) for row in x) / (n * k)
    row_means = [sum(row) / k for row in x]
    col_means = [sum(x[i][j] for i in range(n)) / n for j in range(k)]
    ss_err = sum(
        (x[i][j] - row_means[i] - col_means[j] + grand) ** 2
        for i in range(n)
        for j in range(k)
    )
    ms_rows = sum(k * (rm - grand) ** 2 for rm in row_means) / (n - 1)
    ms_err = ss_err / ((n - 1) * (k - 1))
    denom = ms_rows + (k - 1) * ms_err
    return float((ms_rows - ms_err) / denom)


def oracle_kendall(a, b) -> float:
    """Tau-b via brute-force pair enumeration; denominators counted directly."""
    n = len(a)
    concordant = discordant = 0
    distinct_a = distinct_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            if a[i] != a[j]:
                distinct_a += 1
            if b[i] != b[j]:
                distinct_b += 1
            if (a[i] < a[j] and b[i] < b[j]) or (a[i] > a[j] and b[i] > b[j]):
                concordant += 1
            elif (a[i] < a[j] and b[i] > b[j]) or (a[i] > a[j] and b[i] < b[j]):
                discordant += 1
    return (concordant - discordant) / math.sqrt(distinct_a * distinct_b)


def oracle_f1(human, classifier):
    """(per_class, weighted) via confusion cells and the 2tp/(2tp+fp+fn) identity."""
    truth = ["G" if lab == "P" else lab for lab in human]
    per_class = {}
    support = {}
    for c in ("N", "G"):
        tp = sum(1 for t, p in zip(truth, classifier) if t == c and p == c)
        fp = sum(1 for t, p in zip(truth, classifier) if t != c and p == c)
        fn = sum(1 for t, p in zip(truth, classifier) if t == c and p != c)
        support[c] = tp + fn
        per_class[c] = float(Fraction(2 * tp, 2 * tp + fp + fn) * 100) if tp else 0.0
    weighted = sum(per_class[c] * support[c] for c in ("N", "G")) / sum(support.values())
    return per_class, weighted


def _oracle_tokens(sentence: str) -> list[str]:
    out: list[str] = []
    for word in sentence.split():
        letters = [i for i, ch in enumerate(word) if not unicodedata.category(ch).startswith("P")]
        if not letters:
            out.extend(word)
            continue
        first, last = letters[0], letters[-1]
        out.extend(word[:first])
        out.append(word[first : last + 1])
        out.extend(word[last + 1 :])
    return out


def _gram_counts(items, n):
    counts: dict[tuple, int] = {}
    for i in range(len(items) - n + 1):
        gram = tuple(items[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def oracle_bleu(hypotheses, references) -> float:
    matched = {n: 0 for n in range(1, 5)}
    total = {n: 0 for n in range(1, 5)}
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = _oracle_tokens(hyp)
        ref_tokens = _oracle_tokens(ref)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, 5):
            hyp_counts = _gram_counts(hyp_tokens, n)
            ref_counts = _gram_counts(ref_tokens, n)
            total[n] += sum(hyp_counts.values())
            matched[n] += sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items())
    if any(total[n] == 0 or matched[n] == 0 for n in range(1, 5)):
        return 0.0
    product = 1.0
    for n in range(1, 5):
        product *= matched[n] / total[n]
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * product**0.25


def oracle_chrf(hypotheses, references, beta=2.0) -> float:
    overlap = {n: 0 for n in range(1, 7)}
    hyp_total = {n: 0 for n in range(1, 7)}
    ref_total = {n: 0 for n in range(1, 7)}
    for hyp, ref in zip(hypotheses, references):
        hyp_chars = [ch for ch in hyp if not ch.isspace()]
        ref_chars = [ch for ch in ref if not ch.isspace()]
        for n in range(1, 7):
            hyp_counts = _gram_counts(hyp_chars, n)
            ref_counts = _gram_counts(ref_chars, n)
            hyp_total[n] += sum(hyp_counts.values())
            ref_total[n] += sum(ref_counts.values())
            overlap[n] += sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items())
    f_scores = []
    for n in range(1, 7):
        if hyp_total[n] == 0 and ref_total[n] == 0:
            continue
        if hyp_total[n] == 0 or ref_total[n] == 0 or overlap[n] == 0:
            f_scores.append(0.0)
            continue
        p = overlap[n] / hyp_total[n]
        r = overlap[n] / ref_total[n]
        f_scores.append((1 + beta * beta) * p * r / (beta * beta * p + r))
    return 100.0 * sum(f_scores) / len(f_scores) if f_scores else 0.0


_OP_RANK = {"match": 0, "sub": 1, "del": 2, "ins": 3}


def oracle_alignment(a: tuple, b: tuple) -> list[str]:
    """Lexicographically smallest minimal-cost alignment, by full search.

    Among all unit-cost Levenshtein alignments of minimal length, returns
    the op sequence that is smallest under match < sub < del < ins,
    comparing position by position from the left.
    """
    n, m = len(a), len(b)

    @lru_cache(maxsize=None)
    def dist(i: int, j: int) -> int:
        if i == n:
            return m - j
        if j == m:
            return n - i
        best = dist(i + 1, j + 1) + (0 if a[i] == b[j] else 1)
        return min(best, 1 + dist(i + 1, j), 1 + dist(i, j + 1))

    @lru_cache(maxsize=None)
    def best(i: int, j: int) -> tuple:
        if i == n and j == m:
            return ()
        options = []
        if i < n and j < m and a[i] == b[j] and dist(i, j) == dist(i + 1, j + 1):
            options.append(("match",) + best(i + 1, j + 1))
        if i < n and j < m and a[i] != b[j] and dist(i, j) == 1 + dist(i + 1, j + 1):
            options.append(("sub",) + best(i + 1, j + 1))
        if i < n and dist(i, j) == 1 + dist(i + 1, j):
            options.append(("del",) + best(i + 1, j))
        if j < m and dist(i, j) == 1 + dist(i, j + 1):
            options.append(("ins",) + best(i, j + 1))
        return min(options, key=lambda ops: [_OP_RANK[op] for op in ops])

    return list(best(0, 0))


def oracle_spans(ref_gendered: str, ref_neutral: str):
    """Differing-run spans from the oracle alignment: (g_text, n_text, start, end)."""
    a, b = ref_gendered.split(), ref_neutral.split()
    ops = oracle_alignment(tuple(a), tuple(b))
    # annotate every op with the word positions it consumes
    positions = []
    i = j = 0
    for op in ops:
        positions.append((op, i, j))
        if op != "ins":
            i += 1
        if op != "del":
            j += 1
    positions.append(("match", i, j))  # sentinel to flush the final run
    spans = []
    run = None
    for op, wi, wj in positions:
        if op == "match":
            if run is not None:
                gi, gj = run
                spans.append((" ".join(a[gi:wi]), " ".join(b[gj:wj]), gi, wi))
                run = None
        elif run is None:
            run = (wi, wj)
    return spans


def reference_sampler(keys, n, raters, overlap_frac, seed):
    """Recoded sampling procedure: seeded shuffle, prefix split, chunked rest."""
    order = list(keys)
    random.Random(seed).shuffle(order)
    chosen = order[:n]
    n_shared = round(overlap_frac * n)
    shared = chosen[:n_shared]
    remaining = chosen[n_shared:]
    per, leftover = divmod(len(remaining), len(raters))
    exclusive = {}
    cursor = 0
    for idx, rater in enumerate(raters):
        take = per + (1 if idx < leftover else 0)
        exclusive[rater] = remaining[cursor : cursor + take]
        cursor += take
    return chosen, shared, exclusive
