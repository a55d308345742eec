"""``citeflow`` command line: ingest, events, curve, estimate, synth, simulate, report.

Data-consuming subcommands read a corpus cache written by ``citeflow
ingest`` (``--cache``) or parse an input file directly (``--input``).
Every run that writes to a file also writes a JSON manifest next to it
(``<output>.manifest.json`` unless ``--manifest`` is given) listing the
flags, seeds, input digests, timing and output digests.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from typing import Sequence

from . import __version__
from .corpus import (
    CacheError,
    Corpus,
    corpus_stats,
    ingest_dump,
    ingest_event_table,
    load_cache,
    save_cache,
    write_event_table,
)
from .estimator import DEFAULT_TOL, estimate_aggregate, estimate_authors
from .events import (
    AuthorNotFoundError,
    build_career,
    build_streams,
    extract_events,
    filter_authors,
    write_stream,
)
from .likelihood import KindFilter, loglik_curve
from .report import cohort_rho, rho_histogram, rho_vs_citability, self_fraction_stats
from .simulator import run_hindex_experiment
from .synth import CohortProfile, cohort_corpus, generate_cohort

__all__ = ["build_parser", "main", "parse_grid"]

FILTERS = [f.value for f in KindFilter]


class DataError(Exception):
    pass


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list of values."""
    if ":" not in text:
        values = [float(v) for v in text.split(",") if v.strip()]
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected start:stop:step")
        start, stop, step = map(float, parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        n = int(round((stop - start) / step)) + 1
        values = [round(start + i * step, 12) for i in range(n)]
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError("grid values must lie in [0, 1]")
    return values


# --------------------------------------------------------------------------
# I/O helpers
# --------------------------------------------------------------------------


class _Run:
    """Collects what goes into the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.started = time.time()
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}

    def note_input(self, path: str) -> None:
        if path and path != "-" and os.path.isfile(path):
            self.inputs[path] = _digest_file(path)

    def write_text(self, path: str | None, text: str) -> None:
        if path is None or path == "-":
            sys.stdout.write(text)
            return
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.outputs[path] = _digest_file(path)

    def note_output(self, path: str) -> None:
        self.outputs[path] = _digest_file(path)

    def write_manifest(self) -> None:
        target = self.args.manifest
        if target is None:
            if not self.outputs:
                return
            target = next(iter(self.outputs)) + ".manifest.json"
        flags = {k: v for k, v in vars(self.args).items() if k != "func"}
        manifest = {
            "tool": "citeflow",
            "version": __version__,
            "command": self.args.command,
            "flags": flags,
            "seed": getattr(self.args, "seed", None),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timing": {"started": self.started, "elapsed_s": time.time() - self.started},
        }
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _digest_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load_corpus(args, run: _Run) -> Corpus:
    if getattr(args, "input", None):
        run.note_input(args.input)
        if args.input == "-":
            if args.format != "table":
                raise DataError("only --format table can be read from stdin")
            return ingest_event_table(sys.stdin)[0]
        reader = ingest_dump if args.format == "dump" else ingest_event_table
        return reader(args.input)[0]
    if not args.cache:
        raise DataError(
            "no corpus given: build a cache with `citeflow ingest --input ... --cache PATH` "
            "and pass --cache PATH, or pass --input directly"
        )
    run.note_input(args.cache)
    return load_cache(args.cache)[0]


def _select_streams(corpus: Corpus, args, default_min_citations: int = 0):
    min_cit = args.min_citations if args.min_citations is not None else default_min_citations
    authors = filter_authors(corpus, args.min_papers, min_cit)
    return build_streams(corpus, authors)


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_ingest(args, run: _Run) -> int:
    run.note_input(args.input)
    if args.format == "dump":
        corpus, report = ingest_dump(args.input, args.limit)
    else:
        corpus, report = ingest_event_table(args.input)
    save_cache(corpus, report, args.cache)
    run.note_output(args.cache)
    summary = corpus_stats(corpus)
    info = dict(vars(report))
    info.update(authors=summary.n_authors, citations=summary.n_citations)
    sys.stderr.write(json.dumps(info, sort_keys=True) + "\n")
    return 0


def cmd_events(args, run: _Run) -> int:
    corpus = _load_corpus(args, run)
    stream = extract_events(corpus, build_career(corpus, args.author))
    buf = io.StringIO()
    write_stream(stream, buf)
    run.write_text(args.output, buf.getvalue())
    return 0


def cmd_curve(args, run: _Run) -> int:
    corpus = _load_corpus(args, run)
    if args.author:
        target = extract_events(corpus, build_career(corpus, args.author))
    else:
        target = _select_streams(corpus, args)
    curve = loglik_curve(target, args.filter, args.grid, workers=args.threads)
    run.write_text(args.output, _csv_text(["rho", "loglik"], [(_fmt(r), _fmt(v)) for r, v in curve]))
    return 0


def cmd_estimate(args, run: _Run) -> int:
    corpus = _load_corpus(args, run)
    per_author = args.scope == "author"
    streams = _select_streams(corpus, args, default_min_citations=50 if per_author else 0)
    if not streams:
        raise DataError("no authors pass the --min-papers/--min-citations thresholds")
    rows = []
    for kind in args.filter:
        if per_author:
            results = estimate_authors(streams, kind, tol=args.tol, workers=args.threads)
        else:
            res = estimate_aggregate(streams, kind, tol=args.tol, workers=args.threads)
            results = [res]
        for r in results:
            rows.append(
                (
                    r.author_id if per_author else "*",
                    r.filter.value,
                    _fmt(r.rho_hat),
                    _fmt(r.loglik_at_max),
                    r.events_used,
                    int(r.converged),
                )
            )
    header = ["author_id", "filter", "rho_hat", "loglik", "events_used", "converged"]
    run.write_text(args.output, _csv_text(header, rows))
    return 0


def cmd_synth(args, run: _Run) -> int:
    profile = CohortProfile(
        rho_external=args.rho_ext,
        rho_self=args.rho_self,
        years=(args.years, args.years),
        papers_rate=args.papers_rate,
        external_rate=args.external_rate,
        self_prob=args.self_prob,
        start_year=args.start_year,
        start_spread=args.start_spread,
    )
    streams = generate_cohort(args.authors, profile, args.seed)
    buf = io.StringIO()
    write_event_table(cohort_corpus(streams), buf)
    run.write_text(args.output, buf.getvalue())
    return 0


def cmd_simulate(args, run: _Run) -> int:
    corpus = _load_corpus(args, run)
    streams = _select_streams(corpus, args)
    exp = run_hindex_experiment(streams, args.replicates, args.seed)
    rows = [
        (o.author_id, o.replicate, o.h_external_only, o.h_with_self_effect) for o in exp.outcomes
    ]
    header = ["author_id", "replicate", "h_external_only", "h_with_self_effect"]
    run.write_text(args.output, _csv_text(header, rows))
    if args.histogram:
        hist_rows = [
            (a, b, n, _fmt(exp.mean_b_given_a[a])) for (a, b), n in exp.histogram.items()
        ]
        run.write_text(
            args.histogram,
            _csv_text(["h_external_only", "h_with_self_effect", "count", "mean_h_with_self_effect"], hist_rows),
        )
    return 0


def _edges_rows(stat, value_name: str):
    rows = []
    edges = stat.edges[0]
    for i, n in enumerate(stat.counts):
        rows.append((_fmt(edges[i]), _fmt(edges[i + 1]), int(n), _fmt(stat.means[i])))
    return ["bin_lo", "bin_hi", "count", f"mean_{value_name}"], rows


def cmd_report(args, run: _Run) -> int:
    corpus = _load_corpus(args, run)
    kind = args.filter[0]
    if args.kind == "rho-hist":
        streams = _select_streams(corpus, args, default_min_citations=50)
        stat = rho_histogram(estimate_authors(streams, kind, tol=args.tol, workers=args.threads), args.bins)
        header, rows = _edges_rows(stat, "rho")
        _note_exclusions(stat)
    elif args.kind == "rho-citability":
        streams = _select_streams(corpus, args, default_min_citations=50)
        results = estimate_authors(streams, kind, tol=args.tol, workers=args.threads)
        stat = rho_vs_citability(results, streams)
        x_edges, y_edges = stat.edges
        header = ["cit_lo", "cit_hi", "rho_lo", "rho_hi", "count", "column_mean_rho"]
        rows = []
        for i in range(len(x_edges) - 1):
            for j in range(len(y_edges) - 1):
                rows.append(
                    (
                        _fmt(x_edges[i]), _fmt(x_edges[i + 1]),
                        _fmt(y_edges[j]), _fmt(y_edges[j + 1]),
                        int(stat.counts[i, j]), _fmt(stat.column_means[i]),
                    )
                )
        _note_exclusions(stat)
    elif args.kind == "self-fraction":
        streams = _select_streams(corpus, args)
        stats = self_fraction_stats(streams)
        header, rows = _edges_rows(stats.histogram, "fraction")
        _note_exclusions(stats.histogram)
        sys.stderr.write(f"mean self-citation fraction: {stats.mean_fraction!r}\n")
    else:
        streams = _select_streams(corpus, args)
        cohorts = cohort_rho(streams, kind, min_authors=args.min_authors, tol=args.tol, workers=args.threads)
        header = ["start_year", "rho_hat", "n_authors", "events_used", "converged"]
        rows = [
            (c.start_year, _fmt(c.rho_hat), c.n_authors, c.result.events_used, int(c.result.converged))
            for c in cohorts
        ]
    run.write_text(args.output, _csv_text(header, rows))
    return 0


def _note_exclusions(stat) -> None:
    for reason, n in sorted(stat.excluded.items()):
        sys.stderr.write(f"excluded {n} record(s): {reason}\n")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (results do not depend on it)")
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--cache", help="corpus cache written by `citeflow ingest`")
    data.add_argument("--input", help="parse this file instead of a cache ('-' = table on stdin)")
    data.add_argument("--format", choices=["dump", "table"], default="table")

    select = argparse.ArgumentParser(add_help=False)
    select.add_argument("--min-papers", type=int, default=10)
    select.add_argument("--min-citations", type=int, default=None,
                        help="keep authors with MORE than this many citations "
                             "(default 50 for per-author estimates, otherwise 0 = no threshold)")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--output", "-o", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="citeflow",
        description="Estimate the preferential-attachment share of citations from author histories.",
    )
    parser.add_argument("--version", action="version", version=f"citeflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[common], help="parse a dump or event table into a cache")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["dump", "table"], default="dump")
    p.add_argument("--cache", required=True)
    p.add_argument("--limit", type=int, default=None, help="stop after this many records")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("events", parents=[common, data, out], help="dump one author's event stream")
    p.add_argument("--author", required=True)
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("curve", parents=[common, data, select, out], help="log-likelihood over a rho grid")
    p.add_argument("--filter", choices=FILTERS, default="all")
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0:1:0.01"))
    p.add_argument("--author", help="single author instead of the aggregate")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("estimate", parents=[common, data, select, out], help="maximum-likelihood rho")
    p.add_argument("--scope", choices=["author", "aggregate"], default="aggregate")
    p.add_argument("--filter", choices=FILTERS, nargs="+", default=["all"])
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synth", parents=[common, out], help="synthetic cohort as an event table")
    p.add_argument("--authors", type=int, required=True)
    p.add_argument("--rho-ext", type=float, required=True)
    p.add_argument("--rho-self", type=float, default=0.0)
    p.add_argument("--years", type=int, default=15)
    p.add_argument("--papers-rate", type=float, default=2.5)
    p.add_argument("--external-rate", type=float, default=1.0)
    p.add_argument("--self-prob", type=float, default=0.0)
    p.add_argument("--start-year", type=int, default=2000)
    p.add_argument("--start-spread", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", parents=[common, data, select, out], help="h-index self-citation experiment")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--histogram", help="also write (h_A, h_B, count, mean) rows here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common, data, select, out], help="binned tables behind the figures")
    p.add_argument("--kind", required=True, choices=["rho-hist", "rho-citability", "self-fraction", "cohort"])
    p.add_argument("--filter", choices=FILTERS, nargs=1, default=["all"])
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--min-authors", type=int, default=1)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    run = _Run(args)
    try:
        code = args.func(args, run)
    except (DataError, CacheError, AuthorNotFoundError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, AuthorNotFoundError) else exc
        if isinstance(exc, AuthorNotFoundError):
            msg = f"unknown author {msg!r}"
        sys.stderr.write(f"citeflow: error: {msg}\n")
        return 1
    run.write_manifest()
    return code

