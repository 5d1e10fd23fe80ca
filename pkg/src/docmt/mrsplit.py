"""Multi-resolution corpus construction.

A document of M sentences is re-emitted at every power-of-two
granularity: level k splits it into k contiguous parts of near-equal
size, for k = 1, 2, 4, ... up to M (plus a final k = M sentence level
when M is not itself a power of two). An 8-sentence document therefore
yields 15 segments (1 + 2 + 4 + 8). Also provides the oversampling
balancer and token-budgeted re-paragraphing for length-bucketed
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import Document, ParallelCorpus, ParallelDocument


@dataclass(frozen=True)
class MRConfig:
    """Splitting options: sentence-level fallback and flattening joiner."""

    include_singletons: bool = True
    joiner: str = " "

    def __post_init__(self) -> None:
        if "\n" in self.joiner or "\r" in self.joiner:
            raise ValueError("joiner must not contain newlines")


@dataclass(frozen=True)
class Segment:
    """One contiguous sentence run emitted at a given resolution level."""

    doc_id: str
    level_k: int
    part_index: int
    source_text: str
    target_text: str
    sentence_span: tuple[int, int]

    @property
    def segment_id(self) -> str:
        return f"{self.doc_id}.k{self.level_k}.p{self.part_index}"


def mr_levels(m: int, cfg: MRConfig | None = None) -> list[int]:
    """Resolution levels for an ``m``-sentence document, ascending.

    Powers of two up to ``m``; when ``m`` is not a power of two and
    singletons are enabled, ``m`` itself is appended so sentence-level
    pairs always exist. Never exceeds ``m``.
    """
    cfg = cfg or MRConfig()
    if m < 1:
        raise ValueError(f"document must have at least one sentence, got {m}")
    levels = [1]
    while levels[-1] * 2 <= m:
        levels.append(levels[-1] * 2)
    if cfg.include_singletons and levels[-1] != m:
        levels.append(m)
    return levels


def _part_spans(m: int, k: int) -> list[tuple[int, int]]:
    # Sizes differ by at most 1; the first (m mod k) parts get the extra.
    base, remainder = divmod(m, k)
    spans = []
    start = 0
    for part in range(k):
        size = base + (1 if part < remainder else 0)
        spans.append((start, start + size))
        start += size
    return spans


def split_document(pd: ParallelDocument, cfg: MRConfig | None = None) -> list[Segment]:
    """Emit every resolution level's segments for one aligned document.

    Source and target are cut on the same sentence indices, so the
    document must be aligned.
    """
    cfg = cfg or MRConfig()
    if not pd.aligned:
        raise ValueError(f"document {pd.doc_id!r} is not sentence-aligned")
    m = len(pd.source)
    segments = []
    for k in mr_levels(m, cfg):
        for part, (start, end) in enumerate(_part_spans(m, k)):
            segments.append(
                Segment(
                    doc_id=pd.doc_id,
                    level_k=k,
                    part_index=part,
                    source_text=cfg.joiner.join(pd.source.sentences[start:end]),
                    target_text=cfg.joiner.join(pd.target.sentences[start:end]),
                    sentence_span=(start, end),
                )
            )
    return segments


def build_mr_corpus(corpus: ParallelCorpus, cfg: MRConfig | None = None) -> ParallelCorpus:
    """Flatten every document's segments into a new training corpus.

    Each segment becomes a one-sentence parallel document whose text is
    the joined run; order is input document order, then ascending level,
    then part index.
    """
    cfg = cfg or MRConfig()
    documents = []
    for pd in corpus:
        for seg in split_document(pd, cfg):
            documents.append(
                ParallelDocument(
                    Document(seg.segment_id, (seg.source_text,)),
                    Document(seg.segment_id, (seg.target_text,)),
                    aligned=True,
                )
            )
    return ParallelCorpus(tuple(documents), dict(corpus.metadata))


def _source_tokens(doc: ParallelDocument) -> int:
    return sum(len(sentence.split()) for sentence in doc.source.sentences)


def mr_ratio(corpus: ParallelCorpus, cfg: MRConfig | None = None) -> float:
    """Source-token ratio of the multi-resolution corpus to its input.

    Joiners are excluded from the count, so a corpus whose documents all
    have M = 2^L sentences gives exactly L + 1.
    """
    cfg = cfg or MRConfig()
    if not corpus.documents:
        raise ValueError("mr_ratio of an empty corpus is undefined")
    input_tokens = 0
    output_tokens = 0
    for doc in corpus:
        if not doc.aligned:
            raise ValueError(f"document {doc.doc_id!r} is not sentence-aligned")
        tokens = _source_tokens(doc)
        input_tokens += tokens
        # Every level repeats each sentence exactly once.
        output_tokens += len(mr_levels(len(doc.source), cfg)) * tokens
    return output_tokens / input_tokens


def suggested_oversample_factor(corpus: ParallelCorpus, cfg: MRConfig | None = None) -> int:
    """Replication factor that balances a plain corpus against its MR version."""
    return max(1, round(mr_ratio(corpus, cfg)))


def oversample(corpus: ParallelCorpus, factor: int) -> ParallelCorpus:
    """Replicate every document ``factor`` times with replica-suffixed ids.

    All replicas of a document are adjacent, in input document order.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    documents = []
    for pd in corpus:
        for replica in range(factor):
            doc_id = f"{pd.doc_id}.r{replica}"
            documents.append(
                ParallelDocument(
                    Document(doc_id, pd.source.sentences),
                    Document(doc_id, pd.target.sentences),
                    aligned=pd.aligned,
                )
            )
    return ParallelCorpus(tuple(documents), dict(corpus.metadata))


def bucket_by_length(
    corpus: ParallelCorpus,
    token_budgets: Sequence[int],
    tokenizer: Callable[[str], list[str]] = str.split,
) -> dict[int, ParallelCorpus]:
    """Re-cut documents into paragraphs under each source-token budget.

    For each budget, consecutive sentences are accumulated greedily until
    adding the next one would exceed the budget; a single over-budget
    sentence forms its own paragraph. Paragraphs never cross document
    boundaries, and every sentence appears exactly once per budget.
    """
    if not token_budgets:
        raise ValueError("token_budgets must be non-empty")
    budgets = list(token_budgets)
    if any(b < 1 for b in budgets):
        raise ValueError(f"token budgets must be positive: {budgets}")
    if budgets != sorted(budgets):
        raise ValueError(f"token budgets must be ascending: {budgets}")
    buckets: dict[int, ParallelCorpus] = {}
    for budget in budgets:
        documents = []
        for pd in corpus:
            if not pd.aligned:
                raise ValueError(f"document {pd.doc_id!r} is not sentence-aligned")
            counts = [len(tokenizer(s)) for s in pd.source.sentences]
            paragraphs: list[tuple[int, int]] = []
            start = 0
            running = 0
            for i, count in enumerate(counts):
                if i > start and running + count > budget:
                    paragraphs.append((start, i))
                    start = i
                    running = 0
                running += count
            paragraphs.append((start, len(counts)))
            for j, (a, b) in enumerate(paragraphs):
                doc_id = f"{pd.doc_id}.b{budget}.p{j}"
                documents.append(
                    ParallelDocument(
                        Document(doc_id, pd.source.sentences[a:b]),
                        Document(doc_id, pd.target.sentences[a:b]),
                        aligned=True,
                    )
                )
        metadata = dict(corpus.metadata)
        metadata["token_budget"] = str(budget)
        buckets[budget] = ParallelCorpus(tuple(documents), metadata)
    return buckets
