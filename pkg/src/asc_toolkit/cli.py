"""Command-line driver.

Subcommands:
  analyze      tag a directory of CoNLL-U files and write one CSV row per file
  build-norms  build a reference norm table from a CoNLL-U corpus
  stats        relate an indices CSV to a scores CSV and write a model report

Running with bare flags (no subcommand) behaves like `analyze`.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Iterator

from .indices import INDEX_NAMES, IndexConfig, compute_from_tags
from .ingest import ConlluError, Document, parse_conllu_file
from .norms import NormTable, NormTableError, build_norms, count_tags, load_norms, save_norms
from .stats import format_report, load_feature_matrix, run_pipeline
from .tagger import debug_lines, tag_document

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_COMMANDS = ("analyze", "build-norms", "stats")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="asc-toolkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_an = sub.add_parser("analyze", help="analyze a directory of CoNLL-U files to CSV")
    p_an.add_argument("--input-dir", required=True, help="directory of *.conllu files")
    p_an.add_argument("--output-csv", required=True, help="destination CSV path")
    p_an.add_argument(
        "--source",
        required=True,
        help="norm table: bundled name (e.g. 'demo') or path to a norm TSV",
    )
    p_an.add_argument("--window", type=int, default=11, help="MATTR window (default 11)")
    p_an.add_argument(
        "--min-ref-freq",
        type=int,
        default=5,
        help="minimum reference frequency for the frequency indices (default 5)",
    )
    p_an.add_argument("--recursive", action="store_true", help="search input dir recursively")
    p_an.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_an.add_argument("--debug-tags", metavar="PATH", help="write the tagged-token stream here")
    p_an.set_defaults(func=cmd_analyze)

    p_bn = sub.add_parser("build-norms", help="build a norm TSV from a CoNLL-U corpus")
    p_bn.add_argument("--corpus-dir", required=True, help="directory of *.conllu files")
    p_bn.add_argument("--out", required=True, help="destination norm TSV path")
    p_bn.add_argument("--label", default=None, help="source label (default: corpus dir name)")
    p_bn.add_argument("--recursive", action="store_true", help="search corpus dir recursively")
    p_bn.add_argument("--debug-tags", metavar="PATH", help="write the tagged-token stream here")
    p_bn.set_defaults(func=cmd_build_norms)

    p_st = sub.add_parser("stats", help="correlation filter + model selection report")
    p_st.add_argument("--indices-csv", required=True, help="CSV produced by analyze")
    p_st.add_argument("--scores-csv", required=True, help="CSV with filename + score column(s)")
    p_st.add_argument("--report", required=True, help="destination report path")
    p_st.add_argument(
        "--score-column", default="score", help="score column name (default 'score')"
    )
    p_st.add_argument(
        "--composite-of",
        default=None,
        help="comma-separated subscore columns to average into the target",
    )
    p_st.add_argument("--r-threshold", type=float, default=0.10, help="|r| cutoff (default 0.10)")
    p_st.add_argument("--vif-limit", type=float, default=5.0, help="VIF cutoff (default 5)")
    p_st.set_defaults(func=cmd_stats)
    return parser


def bundled_norm_names() -> list[str]:
    data = resources.files("asc_toolkit").joinpath("data")
    return sorted(p.name[:-4] for p in data.iterdir() if p.name.endswith(".tsv"))


def resolve_source(source: str) -> Path:
    """Map a --source value to a norm TSV path: explicit path or bundled name."""
    p = Path(source)
    if p.is_file():
        return p
    bundled = resources.files("asc_toolkit").joinpath("data", f"{source}.tsv")
    if bundled.is_file():
        return Path(str(bundled))
    names = ", ".join(bundled_norm_names()) or "none"
    raise NormTableError(
        f"unknown norm source {source!r}: not a file and not a bundled table "
        f"(bundled: {names})"
    )


def discover_files(root: Path, recursive: bool) -> list[tuple[str, Path]]:
    """(key, path) pairs sorted by key; key is the posix path relative to root."""
    pattern = "**/*.conllu" if recursive else "*.conllu"
    pairs = [(p.relative_to(root).as_posix(), p) for p in root.glob(pattern)]
    return sorted(pairs)


def _format_cell(value: float | None) -> str:
    return "" if value is None else format(value, ".6g")


def _analyze_one(path: Path, key: str, norm: NormTable, cfg: IndexConfig, want_debug: bool):
    try:
        doc = parse_conllu_file(path, source_id=key)
    except (OSError, UnicodeDecodeError, ConlluError) as exc:
        return key, None, f"{key}: {exc}", []
    tags = tag_document(doc)
    values = compute_from_tags(tags, norm, cfg)
    dbg = list(debug_lines(tags)) if want_debug else []
    return key, [values[name] for name in INDEX_NAMES], None, dbg


_WORKER_STATE: dict = {}


def _init_worker(norm_path: str, window: int, min_ref_freq: int) -> None:
    _WORKER_STATE["norm"] = load_norms(norm_path)
    _WORKER_STATE["cfg"] = IndexConfig(window=window, min_ref_freq=min_ref_freq)


def _worker_task(item: tuple[str, str, bool]):
    key, path_str, want_debug = item
    return _analyze_one(
        Path(path_str), key, _WORKER_STATE["norm"], _WORKER_STATE["cfg"], want_debug
    )


def cmd_analyze(args) -> int:
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        raise ValueError(f"input dir {input_dir} does not exist")
    files = discover_files(input_dir, args.recursive)
    if not files:
        raise ValueError(f"no .conllu files found in {input_dir}")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    try:
        cfg = IndexConfig(window=args.window, min_ref_freq=args.min_ref_freq)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    norm_path = resolve_source(args.source)
    norm = load_norms(norm_path)
    want_debug = args.debug_tags is not None

    results = []
    if args.jobs == 1:
        for key, path in files:
            results.append(_analyze_one(path, key, norm, cfg, want_debug))
    else:
        tasks = [(key, str(path), want_debug) for key, path in files]
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_init_worker,
            initargs=(str(norm_path), args.window, args.min_ref_freq),
        ) as pool:
            results = list(pool.map(_worker_task, tasks))

    results.sort(key=lambda r: r[0])
    warnings = [r[2] for r in results if r[2] is not None]
    out_path = Path(args.output_csv)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["filename", *INDEX_NAMES])
        for key, values, error, _ in results:
            if error is not None:
                continue
            writer.writerow([key, *(_format_cell(v) for v in values)])
    if want_debug:
        with open(args.debug_tags, "w", encoding="utf-8", newline="") as fh:
            for _, _, error, dbg in results:
                if error is None:
                    for line in dbg:
                        fh.write(line + "\n")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"analyzed {len(results) - len(warnings)} of {len(files)} files, "
        f"{len(warnings)} warnings -> {out_path}",
        file=sys.stderr,
    )
    return EXIT_OK


def _iter_corpus(files: list[tuple[str, Path]]) -> Iterator[Document]:
    for key, path in files:
        yield parse_conllu_file(path, source_id=key)


def cmd_build_norms(args) -> int:
    corpus_dir = Path(args.corpus_dir)
    if not corpus_dir.is_dir():
        raise ValueError(f"corpus dir {corpus_dir} does not exist")
    files = discover_files(corpus_dir, args.recursive)
    if not files:
        raise NormTableError("empty norm table")
    label = args.label if args.label is not None else corpus_dir.name
    if args.debug_tags is not None:
        with open(args.debug_tags, "w", encoding="utf-8", newline="") as fh:

            def tags_with_debug():
                for doc in _iter_corpus(files):
                    tags = tag_document(doc)
                    for line in debug_lines(tags):
                        fh.write(line + "\n")
                    yield from tags

            norm = count_tags(tags_with_debug(), label)
    else:
        norm = build_norms(_iter_corpus(files), label)
    save_norms(norm, args.out)
    print(f"{norm.total} ASC tokens ({len(norm.pair_counts)} pairs) -> {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    composite = (
        [c.strip() for c in args.composite_of.split(",") if c.strip()]
        if args.composite_of
        else None
    )
    matrix = load_feature_matrix(
        args.indices_csv,
        args.scores_csv,
        score_column=args.score_column,
        composite_of=composite,
    )
    if matrix.n_rows() < 10:
        raise ValueError(f"join produced only {matrix.n_rows()} rows (need >= 10)")
    result = run_pipeline(matrix, r_threshold=args.r_threshold, vif_limit=args.vif_limit)
    report = format_report(result)
    Path(args.report).write_text(report, encoding="utf-8", newline="\n")
    print(f"report -> {args.report}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in _COMMANDS and argv[0] not in ("-h", "--help"):
        argv.insert(0, "analyze")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConlluError, NormTableError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
