"""Binned summaries behind the figures: rho histograms, rho against citability,
self-citation fractions and per-cohort aggregate estimates.

All bins are half-open ``[lo, hi)`` except the last, which is closed (numpy's
histogram convention).  Records that cannot be binned are never dropped
silently; they are itemized in ``BinnedStat.excluded``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .estimator import DEFAULT_TOL, EstimationResult, estimate_aggregate
from .events import EventStream, citations_per_paper, group_by_cohort, self_fraction
from .likelihood import KindFilter

__all__ = [
    "BinnedStat",
    "CohortEstimate",
    "KeyMismatchError",
    "SelfFractionStats",
    "citability_edges",
    "cohort_rho",
    "log_edges",
    "rho_histogram",
    "rho_vs_citability",
    "self_fraction_stats",
]

DEFAULT_RHO_BINS = 20


class KeyMismatchError(ValueError):
    def __init__(self, missing_streams, missing_results):
        self.missing_streams = sorted(missing_streams)
        self.missing_results = sorted(missing_results)
        super().__init__(
            f"results without a stream: {self.missing_streams}; "
            f"streams without a result: {self.missing_results}"
        )


@dataclass
class BinnedStat:
    """Counts and per-bin means of a value channel over 1-D or 2-D bins.

    ``means`` has the shape of ``counts`` (NaN in empty bins).  For 2-D
    stats ``column_means`` averages the value channel over each bin of the
    first axis.
    """

    edges: tuple[np.ndarray, ...]
    counts: np.ndarray
    means: np.ndarray
    n_records: int = 0
    mean: float = math.nan
    column_means: np.ndarray | None = None
    excluded: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def reconciles(self) -> bool:
        return self.total + sum(self.excluded.values()) == self.n_records


def _uniform_edges(bins: int | Sequence[float]) -> np.ndarray:
    if np.isscalar(bins):
        return np.linspace(0.0, 1.0, int(bins) + 1)
    return np.asarray(bins, dtype=float)


def log_edges(values, per_decade: int = 4, floor: float = 0.1) -> np.ndarray:
    """Edges ``[0, floor, ..., 10**k]`` geometric above ``floor``, covering ``values``."""
    values = np.asarray(values, dtype=float)
    top = max(float(values.max()) if values.size else 1.0, floor)
    hi = math.ceil(math.log10(top) + 1e-12)
    lo = math.floor(math.log10(floor))
    hi = max(hi, lo + 1)
    return np.concatenate([[0.0], np.logspace(lo, hi, per_decade * (hi - lo) + 1)])


citability_edges = log_edges


def _bin_means(sample: tuple[np.ndarray, ...], values: np.ndarray, edges, counts) -> np.ndarray:
    sums, _ = np.histogramdd(sample, bins=edges, weights=values)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.where(counts > 0, counts, 1), np.nan)


def _in_range(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    return (x >= edges[0]) & (x <= edges[-1])


def _usable(results: Sequence[EstimationResult]):
    kept = [r for r in results if r.converged and not r.unidentifiable]
    return kept, len(results) - len(kept)


def rho_histogram(
    results: Sequence[EstimationResult], bins: int | Sequence[float] = DEFAULT_RHO_BINS
) -> BinnedStat:
    """Histogram of per-author rho estimates; unconverged ones are excluded and counted."""
    edges = _uniform_edges(bins)
    kept, dropped = _usable(results)
    rho = np.array([r.rho_hat for r in kept], dtype=float)
    excluded = {"unconverged": dropped} if dropped else {}
    ok = _in_range(rho, edges)
    if (~ok).any():
        excluded["rho_out_of_range"] = int((~ok).sum())
    mean = float(rho.mean()) if rho.size else math.nan
    rho = rho[ok]
    counts, _ = np.histogram(rho, bins=edges)
    means = _bin_means((rho,), rho, (edges,), counts) if rho.size else np.full(counts.shape, np.nan)
    return BinnedStat(
        edges=(edges,),
        counts=counts,
        means=means,
        n_records=len(results),
        mean=mean,
        excluded=excluded,
    )


def rho_vs_citability(
    results: Sequence[EstimationResult],
    streams: Sequence[EventStream],
    bins: tuple | None = None,
) -> BinnedStat:
    """2-D counts over (citations per paper, rho) with the mean rho per citability column.

    ``bins`` is ``(citability_edges, rho_bins)``; by default citability bins
    are logarithmic and rho bins are 20 uniform bins on [0, 1].
    """
    by_author = {s.author_id: s for s in streams}
    result_ids = {r.author_id for r in results}
    missing_streams = result_ids - by_author.keys()
    missing_results = by_author.keys() - result_ids
    if missing_streams or missing_results:
        raise KeyMismatchError(missing_streams, missing_results)

    kept, dropped = _usable(results)
    x = np.array([citations_per_paper(by_author[r.author_id]) for r in kept], dtype=float)
    y = np.array([r.rho_hat for r in kept], dtype=float)
    if bins is None:
        x_edges, y_edges = log_edges(x), _uniform_edges(DEFAULT_RHO_BINS)
    else:
        x_edges, y_edges = np.asarray(bins[0], dtype=float), _uniform_edges(bins[1])

    excluded = {"unconverged": dropped} if dropped else {}
    ok = _in_range(x, x_edges)
    if (~ok).any():
        excluded["citability_out_of_range"] = int((~ok).sum())
    x, y = x[ok], y[ok]

    counts, _, _ = np.histogram2d(x, y, bins=(x_edges, y_edges))
    counts = counts.astype(np.int64)
    means = _bin_means((x, y), y, (x_edges, y_edges), counts)
    col_counts = counts.sum(axis=1)
    col_sums, _ = np.histogram(x, bins=x_edges, weights=y)
    with np.errstate(invalid="ignore", divide="ignore"):
        column_means = np.where(col_counts > 0, col_sums / np.maximum(col_counts, 1), np.nan)
    return BinnedStat(
        edges=(x_edges, y_edges),
        counts=counts,
        means=means,
        n_records=len(results),
        mean=float(y.mean()) if y.size else math.nan,
        column_means=column_means,
        excluded=excluded,
    )


@dataclass
class SelfFractionStats:
    histogram: BinnedStat
    grouped: BinnedStat
    mean_fraction: float


def self_fraction_stats(
    streams: Sequence[EventStream],
    group_bins: tuple | None = None,
    fraction_bins: int | Sequence[float] = DEFAULT_RHO_BINS,
) -> SelfFractionStats:
    """Histogram of self-citation fractions plus their mean over
    (total citations, number of papers) groups.  Authors without citations
    are excluded and counted.
    """
    cited = [s for s in streams if s.events]
    n_uncited = len(streams) - len(cited)
    frac = np.array([self_fraction(s) for s in cited], dtype=float)
    total = np.array([len(s.events) for s in cited], dtype=float)
    papers = np.array([s.career.n_papers for s in cited], dtype=float)
    excluded = {"no_citations": n_uncited} if n_uncited else {}

    f_edges = _uniform_edges(fraction_bins)
    f_counts, _ = np.histogram(frac, bins=f_edges)
    f_means = _bin_means((frac,), frac, (f_edges,), f_counts) if frac.size else np.full(f_counts.shape, np.nan)
    mean = float(frac.mean()) if frac.size else math.nan
    histogram = BinnedStat((f_edges,), f_counts, f_means, len(streams), mean, excluded=dict(excluded))

    if group_bins is None:
        c_edges, p_edges = log_edges(total, floor=1.0), log_edges(papers, floor=1.0)
    else:
        c_edges, p_edges = (np.asarray(b, dtype=float) for b in group_bins)
    ok = _in_range(total, c_edges) & _in_range(papers, p_edges)
    g_excluded = dict(excluded)
    if (~ok).any():
        g_excluded["group_out_of_range"] = int((~ok).sum())
    g_counts, _, _ = np.histogram2d(total[ok], papers[ok], bins=(c_edges, p_edges))
    g_counts = g_counts.astype(np.int64)
    g_means = _bin_means((total[ok], papers[ok]), frac[ok], (c_edges, p_edges), g_counts)
    grouped = BinnedStat((c_edges, p_edges), g_counts, g_means, len(streams), mean, excluded=g_excluded)
    return SelfFractionStats(histogram, grouped, mean)


@dataclass(frozen=True)
class CohortEstimate:
    start_year: int
    rho_hat: float
    n_authors: int
    result: EstimationResult


def cohort_rho(
    streams: Sequence[EventStream],
    kind_filter: KindFilter | str = KindFilter.ALL,
    min_authors: int = 1,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> list[CohortEstimate]:
    """Aggregate rho per career-start cohort, skipping cohorts under ``min_authors``."""
    out = []
    for year, members in group_by_cohort(streams).items():
        if len(members) < min_authors:
            continue
        res = estimate_aggregate(members, kind_filter, tol=tol, workers=workers)
        out.append(CohortEstimate(year, res.rho_hat, len(members), res))
    return out
