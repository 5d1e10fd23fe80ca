"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import math
import random
from typing import Sequence

from docmt import Document, ParallelCorpus, ParallelDocument

VOCAB = "the a of and to in cat dog house tree river stone bird cloud ran sat".split()


def make_sentence(rng: random.Random, min_tokens: int = 1, max_tokens: int = 8) -> str:
    n = rng.randint(min_tokens, max_tokens)
    return " ".join(rng.choice(VOCAB) for _ in range(n))


def make_doc_pair(
    doc_id: str, n_sentences: int, rng: random.Random | None = None
) -> ParallelDocument:
    if rng is None:
        src = tuple(f"src {doc_id} sentence {i}" for i in range(n_sentences))
        tgt = tuple(f"tgt {doc_id} sentence {i}" for i in range(n_sentences))
    else:
        src = tuple(make_sentence(rng) for _ in range(n_sentences))
        tgt = tuple(make_sentence(rng) for _ in range(n_sentences))
    return ParallelDocument(Document(doc_id, src), Document(doc_id, tgt), aligned=True)


def make_corpus(
    sizes: Sequence[int], rng: random.Random | None = None
) -> ParallelCorpus:
    docs = tuple(make_doc_pair(f"d{i:03d}", m, rng) for i, m in enumerate(sizes))
    return ParallelCorpus(docs)


def random_corpus(
    rng: random.Random, max_docs: int = 6, max_sentences: int = 9
) -> ParallelCorpus:
    sizes = [rng.randint(1, max_sentences) for _ in range(rng.randint(1, max_docs))]
    return make_corpus(sizes, rng)


def naive_bleu(
    hyps: Sequence[Sequence[str]], refs: Sequence[Sequence[str]], max_n: int = 4
) -> float:
    """Brute-force corpus BLEU used as an independent cross-check.

    Clipped counts come from nested-loop occurrence counting over n-gram
    lists (no Counter), and the brevity penalty is the explicit
    min(1, e^(1 - r/c)) formula. Orders with no hypothesis n-grams drop
    out of the geometric mean.
    """
    correct = [0] * max_n
    total = [0] * max_n
    c = sum(len(h) for h in hyps)
    r = sum(len(f) for f in refs)
    for hyp, ref in zip(hyps, refs):
        for n in range(1, max_n + 1):
            hyp_ngrams = [tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1)]
            ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
            total[n - 1] += len(hyp_ngrams)
            for gram in set(hyp_ngrams):
                hyp_count = 0
                for other in hyp_ngrams:
                    if other == gram:
                        hyp_count += 1
                ref_count = 0
                for other in ref_ngrams:
                    if other == gram:
                        ref_count += 1
                correct[n - 1] += min(hyp_count, ref_count)
    n_orders = sum(1 for t in total if t > 0)
    if n_orders == 0:
        return 0.0
    precision = 1.0
    for x, t in zip(correct, total):
        if t == 0:
            continue
        if x == 0:
            return 0.0
        precision *= (x / t) ** (1.0 / n_orders)
    bp = min(1.0, math.exp(1.0 - r / c))
    return 100.0 * bp * precision
