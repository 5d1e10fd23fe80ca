"""Command-line surface: one executable, one subcommand per pipeline stage.

Every file-writing run leaves a ``<output>.manifest.json`` next to its
primary output recording the command, flag snapshot, seed, and SHA-256
digests of all inputs and outputs, so reruns can be checked for
byte-identical behavior. Exit codes: 0 success, 1 validation or IO
error (diagnostics name the offending file/document/index), 2 usage
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_io
from . import harness, metrics, mrsplit, pipeline

_COLUMNS = ("d-BLEU", "TC", "CP", "PT")


@dataclass
class RunManifest:
    """Reproducibility record for one CLI run."""

    command: str
    config: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    input_digests: dict[str, str] = field(default_factory=dict)
    output_digests: dict[str, str] = field(default_factory=dict)

    def write(self, path: str | Path) -> None:
        record = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "input_digests": self.input_digests,
            "output_digests": self.output_digests,
        }
        Path(path).write_text(
            json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
            newline="\n",
        )


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(
    args: argparse.Namespace,
    inputs: Sequence[str],
    outputs: Sequence[str],
    flags: dict[str, object],
) -> None:
    manifest = RunManifest(
        command=args.command,
        config={k: str(v) for k, v in sorted(flags.items()) if v is not None},
        seed=getattr(args, "seed", None),
        input_digests={p: _sha256(p) for p in inputs},
        output_digests={p: _sha256(p) for p in outputs},
    )
    manifest.write(f"{outputs[0]}.manifest.json")


def _cmd_convert(args: argparse.Namespace) -> None:
    if args.to == "records":
        if not (args.src and args.tgt and args.out):
            raise ValueError("convert --to records needs --src, --tgt, and --out")
        corpus = corpus_io.read_doc_text(args.src, args.tgt)
        corpus_io.write_records(corpus, args.out)
        _manifest(args, [args.src, args.tgt], [args.out], {"to": args.to})
    else:
        if not (args.input and args.src_out and args.tgt_out):
            raise ValueError(
                "convert --to doc-text needs --in, --src-out, and --tgt-out"
            )
        corpus = corpus_io.read_records(args.input)
        corpus_io.write_doc_text(corpus, args.src_out, args.tgt_out)
        _manifest(
            args, [args.input], [args.src_out, args.tgt_out], {"to": args.to}
        )


def _cmd_clean(args: argparse.Namespace) -> None:
    corpus = corpus_io.read_records(args.input)
    scores = (
        pipeline.read_alignment_scores(args.align_scores)
        if args.align_scores
        else None
    )
    cleaned, report = pipeline.clean_corpus(
        corpus,
        dedup=args.dedup,
        segment=args.segment,
        punct_filler=args.fix_punct,
        scores=scores,
        threshold=args.align_threshold,
    )
    corpus_io.write_records(cleaned, args.out)
    outputs = [args.out]
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as handle:
            for row in report.records():
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
        outputs.append(args.report)
    inputs = [args.input] + ([args.align_scores] if args.align_scores else [])
    _manifest(
        args,
        inputs,
        outputs,
        {
            "in": args.input,
            "out": args.out,
            "dedup": args.dedup,
            "segment": args.segment,
            "fix_punct": args.fix_punct,
            "align_scores": args.align_scores,
            "align_threshold": args.align_threshold,
            "report": args.report,
        },
    )
    print(
        f"kept {len(cleaned)} of {len(corpus)} documents "
        f"({len(report.removed_duplicates)} duplicate, "
        f"{len(report.removed_misaligned)} misaligned)"
    )


def _cmd_mr_split(args: argparse.Namespace) -> None:
    corpus = corpus_io.read_records(args.input)
    cfg = mrsplit.MRConfig(
        include_singletons=not args.no_singletons, joiner=args.joiner
    )
    built = mrsplit.build_mr_corpus(corpus, cfg)
    corpus_io.write_records(built, args.out)
    _manifest(
        args,
        [args.input],
        [args.out],
        {
            "in": args.input,
            "out": args.out,
            "no_singletons": args.no_singletons,
            "joiner": args.joiner,
        },
    )
    ratio = mrsplit.mr_ratio(corpus, cfg) if len(corpus) else float("nan")
    print(f"wrote {len(built)} segment pairs (token ratio {ratio:.2f})")


def _cmd_oversample(args: argparse.Namespace) -> None:
    corpus = corpus_io.read_records(args.input)
    replicated = mrsplit.oversample(corpus, args.factor)
    corpus_io.write_records(replicated, args.out)
    _manifest(
        args,
        [args.input],
        [args.out],
        {"in": args.input, "out": args.out, "factor": args.factor},
    )
    print(f"wrote {len(replicated)} documents")


def _cmd_bucket(args: argparse.Namespace) -> None:
    corpus = corpus_io.read_records(args.input)
    budgets = [int(b) for b in args.budgets.split(",") if b]
    buckets = mrsplit.bucket_by_length(corpus, budgets)
    outputs = []
    for budget, bucket in buckets.items():
        out = f"{args.out_prefix}.b{budget}.jsonl"
        corpus_io.write_records(bucket, out)
        outputs.append(out)
    _manifest(
        args,
        [args.input],
        outputs,
        {"in": args.input, "out_prefix": args.out_prefix, "budgets": args.budgets},
    )
    print(f"wrote {len(outputs)} buckets")


def _cmd_bleu(args: argparse.Namespace) -> None:
    hyp = corpus_io.read_docs(args.hyp)
    ref = corpus_io.read_docs(args.ref)
    cfg = metrics.TokenizerConfig(lowercase=not args.cased)
    if args.level == "sent":
        report = metrics.s_bleu(hyp, ref, cfg, args.max_n)
    else:
        report = metrics.d_bleu(hyp, ref, cfg, args.max_n)
    print(f"{report.name} = {report.value:.2f}")
    if args.out:
        metrics.write_reports([report], args.out)
        _manifest(
            args,
            [args.hyp, args.ref],
            [args.out],
            {"hyp": args.hyp, "ref": args.ref, "level": args.level,
             "max_n": args.max_n, "cased": args.cased},
        )


def _cmd_tcp(args: argparse.Namespace) -> None:
    hyp = corpus_io.read_docs(args.hyp)
    ref = corpus_io.read_docs(args.ref)
    labeled = metrics.read_labeled_docs(ref, args.labels)
    span_cfg = metrics.SpanConfig(radius_d=args.radius)
    reports = [
        metrics.span_metric(hyp, labeled, category, span_cfg)
        for category in metrics.CATEGORIES
    ]
    overall = metrics.tcp(*(r.value for r in reports))
    for report in reports:
        print(
            f"{report.name} = {report.value:.1f} "
            f"({report.numerator}/{report.denominator})"
        )
    print(f"TCP = {overall:.1f}")
    if args.out:
        metrics.write_reports(
            reports + [metrics.MetricReport("TCP", overall)], args.out
        )
        _manifest(
            args,
            [args.hyp, args.ref, args.labels],
            [args.out],
            {"hyp": args.hyp, "ref": args.ref, "labels": args.labels,
             "radius": args.radius},
        )


def _cmd_pearson(args: argparse.Namespace) -> None:
    def read_column(path: str) -> list[float]:
        values = []
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                if not raw.strip():
                    continue
                try:
                    values.append(float(raw))
                except ValueError:
                    raise ValueError(f"{path}: not a number on line {lineno}: {raw!r}")
        return values

    value = metrics.pearson(read_column(args.x), read_column(args.y))
    print(f"pearson = {value:.4f}")


def _cmd_shuffle(args: argparse.Namespace) -> None:
    corpus = corpus_io.read_records(args.input)
    if args.mode == "local":
        shuffled, records = harness.local_shuffle(corpus, args.seed)
    else:
        shuffled, records = harness.global_shuffle(corpus, args.seed)
    corpus_io.write_records(shuffled, args.out)
    perm_out = args.perm_out or f"{args.out}.perm.jsonl"
    harness.write_permutation_records(records, perm_out)
    _manifest(
        args,
        [args.input],
        [args.out, perm_out],
        {"in": args.input, "out": args.out, "mode": args.mode,
         "perm_out": perm_out, "seed": args.seed},
    )
    print(f"wrote {len(shuffled)} documents ({args.mode} shuffle, seed {args.seed})")


def _cmd_contrastive(args: argparse.Namespace) -> None:
    instances = harness.read_instances(args.instances)
    scores = harness.read_candidate_scores(args.scores)
    results = harness.contrastive_accuracy(instances, scores)
    for phenomenon in sorted(k for k in results if k != harness.OVERALL):
        report = results[phenomenon]
        print(
            f"{report.name} = {report.value:.1f} "
            f"({report.numerator}/{report.denominator})"
        )
    overall = results[harness.OVERALL]
    print(f"overall = {overall.value:.1f} ({overall.numerator}/{overall.denominator})")
    if args.out:
        metrics.write_reports(
            [results[k] for k in sorted(results)], args.out
        )
        _manifest(
            args,
            [args.instances, args.scores],
            [args.out],
            {"instances": args.instances, "scores": args.scores},
        )


def _cmd_report(args: argparse.Namespace) -> None:
    rows = []
    for path in args.files:
        by_name = {r.name: r for r in metrics.read_reports(path)}
        cells = {name: by_name.get(name) for name in _COLUMNS}
        row = {"system": Path(path).stem}
        row["d-BLEU"] = f"{cells['d-BLEU'].value:.2f}" if cells["d-BLEU"] else "-"
        for name in ("TC", "CP", "PT"):
            row[name] = f"{cells[name].value:.1f}" if cells[name] else "-"
        if all(cells[name] for name in ("TC", "CP", "PT")):
            value = metrics.tcp(*(cells[name].value for name in ("TC", "CP", "PT")))
            row["TCP"] = f"{value:.1f}"
        else:
            row["TCP"] = "-"
        rows.append(row)
    headers = ["system", "d-BLEU", "TC", "CP", "PT", "TCP"]
    widths = {
        h: max(len(h), *(len(row[h]) for row in rows)) if rows else len(h)
        for h in headers
    }
    lines = ["  ".join(h.ljust(widths[h]) for h in headers)]
    for row in rows:
        lines.append("  ".join(row[h].ljust(widths[h]) for h in headers))
    table = "\n".join(lines)
    print(table)
    if args.out:
        Path(args.out).write_text(table + "\n", encoding="utf-8", newline="\n")
        _manifest(args, list(args.files), [args.out], {"files": ",".join(args.files)})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docmt",
        description="Document-level MT corpus construction, cleaning, and evaluation.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker cap (results are deterministic regardless)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between doc-text and records formats")
    p.add_argument("--to", choices=["records", "doc-text"], required=True)
    p.add_argument("--src", help="source-side doc-text input")
    p.add_argument("--tgt", help="target-side doc-text input")
    p.add_argument("--out", help="records output path")
    p.add_argument("--in", dest="input", help="records input path")
    p.add_argument("--src-out", help="source-side doc-text output")
    p.add_argument("--tgt-out", help="target-side doc-text output")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("clean", help="deduplicate, segment, fix punctuation, filter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--segment", action="store_true")
    p.add_argument("--fix-punct", metavar="FILLER")
    p.add_argument("--align-scores", metavar="PATH")
    p.add_argument("--align-threshold", type=float, default=0.40)
    p.add_argument("--report", metavar="PATH", help="removal report output")
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("mr-split", help="build the multi-resolution corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-singletons", action="store_true")
    p.add_argument("--joiner", default=" ")
    p.set_defaults(func=_cmd_mr_split)

    p = sub.add_parser("oversample", help="replicate every document N times")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factor", type=int, required=True)
    p.set_defaults(func=_cmd_oversample)

    p = sub.add_parser("bucket", help="re-cut documents under token budgets")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--budgets", required=True, help="comma-separated, ascending")
    p.set_defaults(func=_cmd_bucket)

    p = sub.add_parser("bleu", help="sentence- or document-level BLEU")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--level", choices=["sent", "doc"], default="doc")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--cased", action="store_true", help="keep case distinctions")
    p.add_argument("--out", help="also write the report as records")
    p.set_defaults(func=_cmd_bleu)

    p = sub.add_parser("tcp", help="labeled-word span metrics and their TCP mean")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--radius", type=int, default=20)
    p.add_argument("--out", help="also write the reports as records")
    p.set_defaults(func=_cmd_tcp)

    p = sub.add_parser("pearson", help="correlation of two number-per-line files")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(func=_cmd_pearson)

    p = sub.add_parser("shuffle", help="seeded local or global sentence shuffle")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["local", "global"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--perm-out", help="permutation record output")
    p.set_defaults(func=_cmd_shuffle)

    p = sub.add_parser("contrastive", help="score-ranking accuracy per phenomenon")
    p.add_argument("--instances", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--out", help="also write the reports as records")
    p.set_defaults(func=_cmd_contrastive)

    p = sub.add_parser("report", help="consolidated metric table across systems")
    p.add_argument("files", nargs="+", help="metric record files, one per system")
    p.add_argument("--out", help="also write the table to a file")
    p.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv: Sequence[str]) -> int:
    """Parse and run one invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
