"""Parallel-document data model and the toolkit's two file formats.

Doc-text format (a pair of plain-text files, one per language side):

* UTF-8, one sentence per line, no blank lines inside a document.
* Exactly one blank line between consecutive documents; the file ends
  with a newline after the last sentence, no trailing blank block.
* A document block may begin with a header line ``# doc_id: <id>``
  giving an explicit id. Without a header, the id is the zero-padded
  ordinal of the block ("000000", "000001", ...). Headers are written
  back only for ids that differ from the ordinal default, so plain
  corpora stay plain text.
* Source and target files must contain the same number of blocks, and
  paired blocks must have the same number of lines.

Records format (a single JSON-lines file):

* One document per line: ``{"doc_id": ..., "src": [...], "tgt": [...]}``.
* An ``"aligned"`` key is emitted only when the flag differs from the
  default derived from equal sentence counts.
* Corpus metadata, when non-empty, travels as a single leading
  ``{"metadata": {...}}`` line.

Both formats round-trip exactly: ``read(write(c)) == c``. Doc-text
carries aligned, metadata-free corpora (which is all it can ever
produce); records carries every corpus.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

_HEADER_RE = re.compile(r"^#\s*doc_id:\s*(\S+)\s*$")


def _ordinal_id(index: int) -> str:
    return f"{index:06d}"


@dataclass(frozen=True)
class Document:
    """An ordered run of sentences with a stable id."""

    doc_id: str
    sentences: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.sentences:
            raise ValueError(f"document {self.doc_id!r} has no sentences")
        for i, sentence in enumerate(self.sentences):
            if "\n" in sentence or "\r" in sentence:
                raise ValueError(
                    f"document {self.doc_id!r}, sentence {i}: embedded newline"
                )
            if not sentence.strip():
                raise ValueError(f"document {self.doc_id!r}, sentence {i}: blank sentence")

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def text(self) -> str:
        """The document flattened to a single space-joined line."""
        return " ".join(self.sentences)


@dataclass(frozen=True)
class ParallelDocument:
    """A source/target document pair.

    ``aligned`` asserts a one-to-one sentence correspondence; when it is
    left unset it defaults to "the two sides have equal sentence counts".
    """

    source: Document
    target: Document
    aligned: bool | None = None

    def __post_init__(self) -> None:
        if self.source.doc_id != self.target.doc_id:
            raise ValueError(
                f"source doc_id {self.source.doc_id!r} != target doc_id "
                f"{self.target.doc_id!r}"
            )
        if self.aligned is None:
            object.__setattr__(self, "aligned", len(self.source) == len(self.target))
        if self.aligned and len(self.source) != len(self.target):
            raise ValueError(
                f"document {self.doc_id!r} marked aligned but has "
                f"{len(self.source)} source vs {len(self.target)} target sentences"
            )

    @property
    def doc_id(self) -> str:
        return self.source.doc_id

    @property
    def n_pairs(self) -> int:
        """Number of aligned sentence pairs (0 for unaligned documents)."""
        return len(self.source) if self.aligned else 0


@dataclass(frozen=True)
class ParallelCorpus:
    """An ordered collection of parallel documents with unique ids."""

    documents: tuple[ParallelDocument, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        seen: set[str] = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc.doc_id!r} in corpus")
            seen.add(doc.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[ParallelDocument]:
        return iter(self.documents)

    def __getitem__(self, index: int) -> ParallelDocument:
        return self.documents[index]

    @property
    def n_sentence_pairs(self) -> int:
        return sum(doc.n_pairs for doc in self.documents)


def read_docs(path: str | Path) -> list[Document]:
    """Read one side of the doc-text format into a list of documents."""
    text = Path(path).read_text(encoding="utf-8")
    docs: list[Document] = []
    lines: list[str] = []
    header: str | None = None

    def flush() -> None:
        nonlocal lines, header
        if lines:
            doc_id = header if header is not None else _ordinal_id(len(docs))
            docs.append(Document(doc_id, tuple(lines)))
        lines = []
        header = None

    for raw in text.split("\n"):
        if not raw.strip():
            flush()
            continue
        match = _HEADER_RE.match(raw)
        if match and not lines:
            header = match.group(1)
        else:
            lines.append(raw)
    flush()
    return docs


def write_docs(docs: Sequence[Document], path: str | Path) -> None:
    """Write one side of the doc-text format.

    A ``# doc_id:`` header is emitted only for ids that differ from the
    block-ordinal default, keeping default corpora header-free.
    """
    blocks: list[str] = []
    for i, doc in enumerate(docs):
        lines: list[str] = []
        if doc.doc_id != _ordinal_id(i):
            lines.append(f"# doc_id: {doc.doc_id}")
        elif _HEADER_RE.match(doc.sentences[0]):
            raise ValueError(
                f"document {doc.doc_id!r}: first sentence collides with the "
                "doc_id header syntax; give the document an explicit id"
            )
        lines.extend(doc.sentences)
        blocks.append("\n".join(lines))
    content = "\n\n".join(blocks)
    if blocks:
        content += "\n"
    Path(path).write_text(content, encoding="utf-8", newline="\n")


def read_doc_text(src_path: str | Path, tgt_path: str | Path) -> ParallelCorpus:
    """Read a parallel doc-text file pair into an aligned corpus.

    Errors out (naming the first offending document index) when the two
    files disagree in block count or in per-block sentence count; partial
    alignment is never silently accepted.
    """
    src_docs = read_docs(src_path)
    tgt_docs = read_docs(tgt_path)
    if len(src_docs) != len(tgt_docs):
        raise ValueError(
            f"document count mismatch: {src_path} has {len(src_docs)} blocks, "
            f"{tgt_path} has {len(tgt_docs)}"
        )
    documents = []
    for i, (src, tgt) in enumerate(zip(src_docs, tgt_docs)):
        if tgt.doc_id not in (src.doc_id, _ordinal_id(i)):
            raise ValueError(
                f"document {i}: source doc_id {src.doc_id!r} conflicts with "
                f"target doc_id {tgt.doc_id!r}"
            )
        if len(src) != len(tgt):
            raise ValueError(
                f"sentence count mismatch in document {i} (id {src.doc_id!r}): "
                f"{len(src)} source vs {len(tgt)} target"
            )
        documents.append(
            ParallelDocument(src, Document(src.doc_id, tgt.sentences), aligned=True)
        )
    return ParallelCorpus(tuple(documents))


def write_doc_text(
    corpus: ParallelCorpus, src_path: str | Path, tgt_path: str | Path
) -> None:
    """Write a corpus as a parallel doc-text file pair."""
    write_docs([doc.source for doc in corpus], src_path)
    write_docs([doc.target for doc in corpus], tgt_path)


def read_records(path: str | Path) -> ParallelCorpus:
    """Read the JSON-lines records format; malformed lines report line numbers."""
    documents = []
    metadata: dict[str, str] = {}
    first_record = True
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: malformed record on line {lineno}: {exc}")
            if first_record and isinstance(record, dict) and set(record) == {"metadata"}:
                metadata = dict(record["metadata"])
                first_record = False
                continue
            first_record = False
            try:
                doc_id = record["doc_id"]
                src = record["src"]
                tgt = record["tgt"]
            except (KeyError, TypeError) as exc:
                raise ValueError(f"{path}: malformed record on line {lineno}: {exc}")
            try:
                documents.append(
                    ParallelDocument(
                        Document(doc_id, tuple(src)),
                        Document(doc_id, tuple(tgt)),
                        aligned=record.get("aligned"),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: invalid record on line {lineno}: {exc}")
    try:
        return ParallelCorpus(tuple(documents), metadata)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}")


def write_records(corpus: ParallelCorpus, path: str | Path) -> None:
    """Write the JSON-lines records format (UTF-8, one document per line)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if corpus.metadata:
            handle.write(
                json.dumps({"metadata": corpus.metadata}, ensure_ascii=False) + "\n"
            )
        for doc in corpus:
            record: dict[str, object] = {
                "doc_id": doc.doc_id,
                "src": list(doc.source.sentences),
                "tgt": list(doc.target.sentences),
            }
            if doc.aligned != (len(doc.source) == len(doc.target)):
                record["aligned"] = doc.aligned
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
