"""Evaluation metrics: tokenization, sentence- and document-level BLEU,
labeled-word span metrics (TC / CP / PT and their TCP aggregate), and
Pearson correlation.

All scores are reported on a 0-100 scale. BLEU is the standard
corpus-level formulation: clipped n-gram precisions pooled over the
corpus, geometric mean over orders 1..max_n, times the brevity penalty
min(1, e^(1 - r/c)). No smoothing: a zero pooled precision at any order
gives BLEU 0.
"""

from __future__ import annotations

import json
import math
import statistics
import unicodedata
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Document

CATEGORIES = ("TENSE", "CONJ", "PRON")
_CATEGORY_METRIC = {"TENSE": "TC", "CONJ": "CP", "PRON": "PT"}


@dataclass(frozen=True)
class TokenizerConfig:
    """Shared tokenization regime for all metrics."""

    lowercase: bool = True
    split_punctuation: bool = True


@dataclass(frozen=True)
class SpanConfig:
    """Half-width, in tokens, of the search window around a label position."""

    radius_d: int = 20

    def __post_init__(self) -> None:
        if self.radius_d < 0:
            raise ValueError(f"radius_d must be >= 0, got {self.radius_d}")


@dataclass(frozen=True)
class Label:
    """A labeled word at a 0-based token position of a flattened reference."""

    word: str
    position: int
    category: str

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(
                f"category must be one of {CATEGORIES}, got {self.category!r}"
            )
        if self.position < 0:
            raise ValueError(f"position must be >= 0, got {self.position}")


@dataclass(frozen=True)
class LabeledTestDoc:
    """A reference document plus its labeled (word, position) pairs."""

    doc_id: str
    reference: Document
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class MetricReport:
    """A named metric value; count metrics also carry their raw counts.

    For count metrics, ``value`` is the percentage 100 * numerator /
    denominator. Non-count metrics (BLEU, Pearson) leave the counts at 0.
    """

    name: str
    value: float
    numerator: int = 0
    denominator: int = 0

    def record(self) -> dict[str, object]:
        return {
            "name": self.name,
            "value": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
        }


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def tokenize(text: str, cfg: TokenizerConfig | None = None) -> list[str]:
    """Whitespace tokenization with optional lowercasing and detachment of
    leading/trailing punctuation characters into their own tokens."""
    cfg = cfg or TokenizerConfig()
    if cfg.lowercase:
        text = text.lower()
    raw = text.split()
    if not cfg.split_punctuation:
        return raw
    tokens: list[str] = []
    for tok in raw:
        trailing: list[str] = []
        while tok and _is_punct(tok[0]):
            tokens.append(tok[0])
            tok = tok[1:]
        while tok and _is_punct(tok[-1]):
            trailing.append(tok[-1])
            tok = tok[:-1]
        if tok:
            tokens.append(tok)
        tokens.extend(reversed(trailing))
    return tokens


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
) -> MetricReport:
    """Corpus-level BLEU over pre-tokenized hypothesis/reference pairs.

    Clipped n-gram counts are pooled over all pairs before the precision
    quotients are taken, so the score is invariant under reordering of
    the corpus. Orders for which the hypotheses contain no n-grams at
    all are vacuous and drop out of the geometric mean, so identical
    corpora score exactly 100 even below max_n tokens.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference length mismatch: "
            f"{len(hypotheses)} vs {len(references)}"
        )
    if not hypotheses:
        raise ValueError("cannot score an empty corpus")
    correct = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_grams = _ngram_counts(hyp, n)
            if not hyp_grams:
                continue
            ref_grams = _ngram_counts(ref, n)
            total[n - 1] += sum(hyp_grams.values())
            correct[n - 1] += sum(
                min(count, ref_grams[gram]) for gram, count in hyp_grams.items()
            )
    orders = [(c, t) for c, t in zip(correct, total) if t > 0]
    if not orders or any(c == 0 for c, _ in orders):
        return MetricReport("BLEU", 0.0)
    log_precision = sum(math.log(c / t) for c, t in orders) / len(orders)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return MetricReport("BLEU", 100.0 * bp * math.exp(log_precision))


def _flatten_tokens(doc: Document, cfg: TokenizerConfig) -> list[str]:
    return tokenize(doc.text, cfg)


def s_bleu(
    hypotheses: Sequence[Document],
    references: Sequence[Document],
    tok_cfg: TokenizerConfig | None = None,
    max_n: int = 4,
) -> MetricReport:
    """Corpus BLEU with each sentence pair as one unit.

    Requires one-to-one sentence correspondence inside every document
    pair; the first structural mismatch is reported by document index.
    """
    cfg = tok_cfg or TokenizerConfig()
    if len(hypotheses) != len(references):
        raise ValueError(
            f"document count mismatch: {len(hypotheses)} hypothesis vs "
            f"{len(references)} reference"
        )
    hyp_units = []
    ref_units = []
    for i, (hyp, ref) in enumerate(zip(hypotheses, references)):
        if len(hyp) != len(ref):
            raise ValueError(
                f"sentence count mismatch in document {i} (id {ref.doc_id!r}): "
                f"{len(hyp)} hypothesis vs {len(ref)} reference"
            )
        hyp_units.extend(tokenize(s, cfg) for s in hyp.sentences)
        ref_units.extend(tokenize(s, cfg) for s in ref.sentences)
    report = corpus_bleu(hyp_units, ref_units, max_n)
    return MetricReport("s-BLEU", report.value)


def d_bleu(
    hypotheses: Sequence[Document],
    references: Sequence[Document],
    tok_cfg: TokenizerConfig | None = None,
    max_n: int = 4,
) -> MetricReport:
    """Corpus BLEU with each whole flattened document as one unit."""
    cfg = tok_cfg or TokenizerConfig()
    if len(hypotheses) != len(references):
        raise ValueError(
            f"document count mismatch: {len(hypotheses)} hypothesis vs "
            f"{len(references)} reference"
        )
    hyp_units = [_flatten_tokens(doc, cfg) for doc in hypotheses]
    ref_units = [_flatten_tokens(doc, cfg) for doc in references]
    report = corpus_bleu(hyp_units, ref_units, max_n)
    return MetricReport("d-BLEU", report.value)


def span_metric(
    outputs: Sequence[Document],
    refs: Sequence[LabeledTestDoc],
    category: str,
    span_cfg: SpanConfig | None = None,
    tok_cfg: TokenizerConfig | None = None,
) -> MetricReport:
    """Appearance rate of labeled words inside their scaled token windows.

    For a label at reference position p, the window in the output is
    [max(0, floor(a*p - d)), min(len_out - 1, ceil(a*p + d))] where a is
    the output/reference token-count ratio and d the configured radius.
    The label scores a hit when its word occurs at any window index.
    Category TENSE reports TC, CONJ reports CP, PRON reports PT.
    """
    if category not in CATEGORIES:
        raise ValueError(f"category must be one of {CATEGORIES}, got {category!r}")
    span_cfg = span_cfg or SpanConfig()
    cfg = tok_cfg or TokenizerConfig()
    by_id = {doc.doc_id: doc for doc in outputs}
    hits = 0
    total = 0
    for ref in refs:
        labels = [label for label in ref.labels if label.category == category]
        if not labels:
            continue
        if ref.doc_id not in by_id:
            raise ValueError(f"missing output for labeled document {ref.doc_id!r}")
        ref_tokens = _flatten_tokens(ref.reference, cfg)
        if not ref_tokens:
            raise ValueError(f"reference document {ref.doc_id!r} has no tokens")
        out_tokens = _flatten_tokens(by_id[ref.doc_id], cfg)
        alpha = len(out_tokens) / len(ref_tokens)
        for label in labels:
            word = label.word.lower() if cfg.lowercase else label.word
            if label.position >= len(ref_tokens):
                raise ValueError(
                    f"label position {label.position} out of range for document "
                    f"{ref.doc_id!r} ({len(ref_tokens)} tokens)"
                )
            if ref_tokens[label.position] != word:
                raise ValueError(
                    f"label word {label.word!r} does not match reference token "
                    f"{ref_tokens[label.position]!r} at position {label.position} "
                    f"of document {ref.doc_id!r}"
                )
            total += 1
            lo = max(0, math.floor(alpha * label.position - span_cfg.radius_d))
            hi = min(
                len(out_tokens) - 1,
                math.ceil(alpha * label.position + span_cfg.radius_d),
            )
            if any(out_tokens[i] == word for i in range(lo, hi + 1)):
                hits += 1
    if total == 0:
        raise ValueError(f"no labels of category {category!r} in the test set")
    return MetricReport(_CATEGORY_METRIC[category], 100.0 * hits / total, hits, total)


def tcp(tc: float, cp: float, pt: float) -> float:
    """Geometric mean of the three span metrics.

    A non-positive input degenerates the mean; it is reported as 0 with
    a warning instead of aborting batch evaluation.
    """
    if min(tc, cp, pt) <= 0.0:
        warnings.warn(
            f"tcp inputs must be positive, got ({tc}, {cp}, {pt}); reporting 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return (tc * cp * pt) ** (1.0 / 3.0)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("pearson needs at least two points")
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError as exc:
        raise ValueError(f"degenerate input: {exc}")


def bucketed_bleu(
    bucket_map: Mapping[int, tuple[Sequence[Document], Sequence[Document]]],
    tok_cfg: TokenizerConfig | None = None,
    max_n: int = 4,
) -> dict[int, MetricReport]:
    """Document-level BLEU per token-budget bucket.

    Empty buckets are omitted from the result rather than reported as 0.
    """
    results: dict[int, MetricReport] = {}
    for budget in sorted(bucket_map):
        hyp, ref = bucket_map[budget]
        if not ref:
            continue
        results[budget] = d_bleu(hyp, ref, tok_cfg, max_n)
    return results


def format_bucket_table(results: Mapping[int, MetricReport]) -> str:
    """Plot-ready two-column table: token budget and d-BLEU."""
    lines = ["budget\td-BLEU"]
    for budget in sorted(results):
        lines.append(f"{budget}\t{results[budget].value:.2f}")
    return "\n".join(lines)


def read_labeled_docs(
    references: Sequence[Document], labels_path: str | Path
) -> list[LabeledTestDoc]:
    """Join a JSON-lines label file against its reference documents.

    Each record carries doc_id, word, position, and category; labels for
    unknown documents are an error. Documents without labels are omitted.
    """
    by_id: dict[str, list[Label]] = {}
    with open(labels_path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                label = Label(record["word"], record["position"], record["category"])
                doc_id = record["doc_id"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(
                    f"{labels_path}: malformed label on line {lineno}: {exc}"
                )
            by_id.setdefault(doc_id, []).append(label)
    refs_by_id = {doc.doc_id: doc for doc in references}
    unknown = sorted(set(by_id) - set(refs_by_id))
    if unknown:
        raise ValueError(f"{labels_path}: labels for unknown documents {unknown}")
    return [
        LabeledTestDoc(doc_id, refs_by_id[doc_id], tuple(labels))
        for doc_id, labels in by_id.items()
    ]


def write_reports(reports: Iterable[MetricReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for report in reports:
            handle.write(json.dumps(report.record(), ensure_ascii=False) + "\n")


def read_reports(path: str | Path) -> list[MetricReport]:
    reports = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                reports.append(
                    MetricReport(
                        record["name"],
                        record["value"],
                        record.get("numerator", 0),
                        record.get("denominator", 0),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: malformed metric record on line {lineno}: {exc}")
    return reports
