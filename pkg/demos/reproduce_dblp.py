"""
Reproducing the DBLP numbers
============================

Runs the full pipeline on the AMiner DBLP v12 citation dump (a JSON array or
newline-delimited records, optionally gzipped)::

    python demos/reproduce_dblp.py /data/dblpv12.json [cache.gz]

Expect hours of runtime and several GB of memory.  The cache, if given, is
written on the first run and reused afterwards.
"""

import os
import sys

import numpy as np

from citeflow import (
    build_streams,
    estimate_aggregate,
    estimate_authors,
    filter_authors,
    ingest_dump,
    load_cache,
    rho_histogram,
    save_cache,
    self_fraction,
)

dump = sys.argv[1]
cache = sys.argv[2] if len(sys.argv) > 2 else None
workers = os.cpu_count() or 1

if cache and os.path.exists(cache):
    corpus, report = load_cache(cache)
else:
    corpus, report = ingest_dump(dump)
    if cache:
        save_cache(corpus, report, cache)
print(report)

# %%
# Authors with at least 10 papers: self-citation fraction and aggregate rho.
cohort = build_streams(corpus, filter_authors(corpus, min_papers=10, min_citations=0))
fractions = [self_fraction(s) for s in cohort if s.events]
print(f"authors: {len(cohort)}   mean self fraction: {np.mean(fractions):.3f}   (expected ~0.16)")
for kind, expected in [("all", 0.68), ("external", 0.73), ("self", 0.18)]:
    res = estimate_aggregate(cohort, kind, workers=workers)
    print(f"aggregate {kind:>8}: {res.rho_hat:.3f}   (expected ~{expected})")

# %%
# Per-author estimates for authors with more than 50 citations.
strong = build_streams(corpus, filter_authors(corpus, min_papers=10, min_citations=50))
for kind, expected in [("all", 0.53), ("external", 0.58), ("self", 0.17)]:
    hist = rho_histogram(estimate_authors(strong, kind, workers=workers))
    print(f"per-author {kind:>8}: mean {hist.mean:.3f}   (expected ~{expected})   excluded {hist.excluded}")
