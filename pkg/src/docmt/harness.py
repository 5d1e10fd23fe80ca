"""Robustness probes: seeded sentence-shuffle perturbations with
invertible permutation records, and contrastive-set accuracy over a
pluggable candidate scorer.

Shuffles permute only the source side (targets stay fixed so perturbed
sources can be evaluated against unchanged references); the returned
records allow exact inversion or reference realignment. Each document
draws from its own seed substream, so results do not depend on
traversal order.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document, ParallelCorpus, ParallelDocument
from .metrics import MetricReport, TokenizerConfig, tokenize

OVERALL = "overall"


@dataclass(frozen=True)
class PermutationRecord:
    """Where each sentence of a perturbed document originally lived.

    ``mapping[i]`` is the original (doc_id, sentence_index) of the
    sentence now at position i.
    """

    doc_id: str
    mapping: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "mapping", tuple((d, int(i)) for d, i in self.mapping)
        )


@dataclass(frozen=True)
class ContrastiveInstance:
    """A source with one positive translation and minimally wrong negatives."""

    instance_id: str
    source: str
    candidates: tuple[str, ...]
    positive_index: int
    phenomenon: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) < 2:
            raise ValueError(
                f"instance {self.instance_id!r} needs at least 2 candidates"
            )
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"instance {self.instance_id!r} has duplicate candidates")
        if not 0 <= self.positive_index < len(self.candidates):
            raise ValueError(
                f"instance {self.instance_id!r}: positive_index "
                f"{self.positive_index} out of range"
            )


@dataclass(frozen=True)
class CandidateScore:
    """Force-decoding style score for one candidate; higher is more probable."""

    instance_id: str
    candidate_index: int
    score: float


def _substream(seed: int, namespace: str) -> random.Random:
    # String seeding hashes all bits deterministically (no PYTHONHASHSEED
    # dependence), giving every namespace an independent stream.
    return random.Random(f"{seed}:{namespace}")


def local_shuffle(
    corpus: ParallelCorpus, seed: int
) -> tuple[ParallelCorpus, list[PermutationRecord]]:
    """Permute source sentences independently inside each document.

    Documents with at least two sentences never receive the identity
    permutation (it is redrawn). Single-sentence documents pass through.
    """
    if not corpus.documents:
        raise ValueError("cannot shuffle an empty corpus")
    documents = []
    records = []
    for ordinal, pd in enumerate(corpus):
        m = len(pd.source)
        perm = list(range(m))
        if m >= 2:
            rng = _substream(seed, f"doc:{ordinal}")
            rng.shuffle(perm)
            while perm == sorted(perm):
                rng.shuffle(perm)
        shuffled = Document(pd.doc_id, tuple(pd.source.sentences[j] for j in perm))
        documents.append(ParallelDocument(shuffled, pd.target, aligned=pd.aligned))
        records.append(
            PermutationRecord(pd.doc_id, tuple((pd.doc_id, j) for j in perm))
        )
    return ParallelCorpus(tuple(documents), dict(corpus.metadata)), records


def global_shuffle(
    corpus: ParallelCorpus, seed: int
) -> tuple[ParallelCorpus, list[PermutationRecord]]:
    """Pool all source sentences corpus-wide, permute, and redistribute.

    Per-document sentence counts are preserved; sentences migrate across
    documents.
    """
    if not corpus.documents:
        raise ValueError("cannot shuffle an empty corpus")
    pool = [
        (pd.doc_id, i, sentence)
        for pd in corpus
        for i, sentence in enumerate(pd.source.sentences)
    ]
    perm = list(range(len(pool)))
    _substream(seed, "global").shuffle(perm)
    documents = []
    records = []
    cursor = 0
    for pd in corpus:
        m = len(pd.source)
        slots = perm[cursor : cursor + m]
        cursor += m
        sentences = tuple(pool[s][2] for s in slots)
        mapping = tuple((pool[s][0], pool[s][1]) for s in slots)
        shuffled = Document(pd.doc_id, sentences)
        documents.append(ParallelDocument(shuffled, pd.target, aligned=pd.aligned))
        records.append(PermutationRecord(pd.doc_id, mapping))
    return ParallelCorpus(tuple(documents), dict(corpus.metadata)), records


def unshuffle(
    corpus: ParallelCorpus, records: Sequence[PermutationRecord]
) -> ParallelCorpus:
    """Invert a local or global shuffle using its permutation records."""
    if len(records) != len(corpus.documents):
        raise ValueError(
            f"record count {len(records)} != document count {len(corpus.documents)}"
        )
    original: dict[str, list[str | None]] = {
        pd.doc_id: [None] * len(pd.source) for pd in corpus
    }
    for record, pd in zip(records, corpus):
        if record.doc_id != pd.doc_id:
            raise ValueError(
                f"record doc_id {record.doc_id!r} does not match document "
                f"{pd.doc_id!r}"
            )
        if len(record.mapping) != len(pd.source):
            raise ValueError(
                f"record for {pd.doc_id!r} has {len(record.mapping)} entries for "
                f"{len(pd.source)} sentences"
            )
        for position, (orig_doc, orig_index) in enumerate(record.mapping):
            if orig_doc not in original or not 0 <= orig_index < len(original[orig_doc]):
                raise ValueError(
                    f"record for {pd.doc_id!r} names unknown slot "
                    f"({orig_doc!r}, {orig_index})"
                )
            if original[orig_doc][orig_index] is not None:
                raise ValueError(
                    f"records are not a bijection: slot ({orig_doc!r}, {orig_index}) "
                    "assigned twice"
                )
            original[orig_doc][orig_index] = pd.source.sentences[position]
    documents = []
    for pd in corpus:
        sentences = original[pd.doc_id]
        restored = Document(pd.doc_id, tuple(sentences))
        documents.append(ParallelDocument(restored, pd.target, aligned=pd.aligned))
    return ParallelCorpus(tuple(documents), dict(corpus.metadata))


def contrastive_accuracy(
    instances: Sequence[ContrastiveInstance],
    scores: Iterable[CandidateScore],
) -> dict[str, MetricReport]:
    """Fraction of instances whose positive candidate scores strictly highest.

    Ties with any negative count as incorrect. Returns one report per
    phenomenon plus an ``"overall"`` entry, on a 0-100 scale.
    """
    by_instance = {inst.instance_id: inst for inst in instances}
    if len(by_instance) != len(instances):
        raise ValueError("duplicate instance_id in instance list")
    table: dict[tuple[str, int], float] = {}
    for score in scores:
        inst = by_instance.get(score.instance_id)
        if inst is None:
            raise ValueError(f"score for unknown instance {score.instance_id!r}")
        if not 0 <= score.candidate_index < len(inst.candidates):
            raise ValueError(
                f"score for unknown candidate {score.candidate_index} of instance "
                f"{score.instance_id!r}"
            )
        key = (score.instance_id, score.candidate_index)
        if key in table:
            raise ValueError(f"duplicate score for {key}")
        table[key] = score.score
    correct: Counter = Counter()
    total: Counter = Counter()
    for inst in instances:
        candidate_scores = []
        for i in range(len(inst.candidates)):
            key = (inst.instance_id, i)
            if key not in table:
                raise ValueError(
                    f"missing score for candidate {i} of instance "
                    f"{inst.instance_id!r}"
                )
            candidate_scores.append(table[key])
        positive = candidate_scores[inst.positive_index]
        negatives = [
            s for i, s in enumerate(candidate_scores) if i != inst.positive_index
        ]
        hit = all(positive > neg for neg in negatives)
        total[inst.phenomenon] += 1
        total[OVERALL] += 1
        if hit:
            correct[inst.phenomenon] += 1
            correct[OVERALL] += 1
    return {
        phenomenon: MetricReport(
            phenomenon, 100.0 * correct[phenomenon] / count, correct[phenomenon], count
        )
        for phenomenon, count in total.items()
    }


@dataclass(frozen=True)
class BigramModel:
    """Add-one-smoothed bigram statistics over tokenized training text.

    Deterministic stand-in for a neural force decoder: candidate scores
    are sums of within-candidate transition log-probabilities, so bigram
    overlap with the training text ranks candidates.
    """

    unigrams: dict[str, int]
    bigrams: dict[tuple[str, str], int]
    vocab_size: int
    tok_cfg: TokenizerConfig = TokenizerConfig()

    @classmethod
    def fit(cls, text: str, tok_cfg: TokenizerConfig | None = None) -> "BigramModel":
        cfg = tok_cfg or TokenizerConfig()
        tokens = tokenize(text, cfg)
        unigrams: Counter = Counter(tokens)
        bigrams: Counter = Counter(zip(tokens, tokens[1:]))
        # One extra vocabulary slot reserves smoothing mass for unseen words.
        return cls(dict(unigrams), dict(bigrams), len(unigrams) + 1, cfg)

    def log_prob(self, prev: str, cur: str) -> float:
        numerator = self.bigrams.get((prev, cur), 0) + 1
        denominator = self.unigrams.get(prev, 0) + self.vocab_size
        return math.log(numerator / denominator)

    def score(self, text: str) -> float:
        """Total log-probability of the candidate's internal transitions."""
        tokens = tokenize(text, self.tok_cfg)
        if not tokens:
            raise ValueError("cannot score an empty candidate")
        return sum(self.log_prob(a, b) for a, b in zip(tokens, tokens[1:]))


def reference_scorer(
    instance: ContrastiveInstance, model: BigramModel
) -> list[CandidateScore]:
    """Score every candidate of an instance with the bigram model."""
    return [
        CandidateScore(instance.instance_id, i, model.score(candidate))
        for i, candidate in enumerate(instance.candidates)
    ]


def read_instances(path: str | Path) -> list[ContrastiveInstance]:
    instances = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                instances.append(
                    ContrastiveInstance(
                        record["instance_id"],
                        record["source"],
                        tuple(record["candidates"]),
                        record["positive_index"],
                        record["phenomenon"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed instance on line {lineno}: {exc}")
    return instances


def read_candidate_scores(path: str | Path) -> list[CandidateScore]:
    scores = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                scores.append(
                    CandidateScore(
                        record["instance_id"],
                        record["candidate_index"],
                        record["score"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: malformed score on line {lineno}: {exc}")
    return scores


def write_candidate_scores(scores: Iterable[CandidateScore], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for score in scores:
            handle.write(
                json.dumps(
                    {
                        "instance_id": score.instance_id,
                        "candidate_index": score.candidate_index,
                        "score": score.score,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def write_permutation_records(
    records: Iterable[PermutationRecord], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "doc_id": record.doc_id,
                        "mapping": [list(entry) for entry in record.mapping],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_permutation_records(path: str | Path) -> list[PermutationRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                records.append(
                    PermutationRecord(
                        record["doc_id"],
                        tuple((d, i) for d, i in record["mapping"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed record on line {lineno}: {exc}")
    return records
