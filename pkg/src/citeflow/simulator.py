"""Counterfactual re-allocation of a career's citations and its h-index effect.

Two variants replay an author's yearly citation totals with synthetic
targets:

* variant A drops self citations and places every external citation by
  pure preferential attachment;
* variant B also places self citations, uniformly over papers from earlier
  years, lets them shape later preferential draws, and subtracts them again
  at the end.

Both variants draw external targets from the same random stream (one
uniform per external citation, inverse-CDF over the year-start weights),
so for a career without self citations they produce identical vectors.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .events import EventStream
from .synth import derive_seed, make_rng

__all__ = [
    "HIndexExperiment",
    "SimOutcome",
    "SimVector",
    "h_index",
    "run_hindex_experiment",
    "simulate_variant_a",
    "simulate_variant_b",
]

_EXTERNAL_STREAM = 0
_SELF_STREAM = 1


@dataclass(frozen=True)
class SimVector:
    """Simulated per-paper citation totals, in career order."""

    external: np.ndarray
    self: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.external + self.self

    def __eq__(self, other):
        if not isinstance(other, SimVector):
            return NotImplemented
        return np.array_equal(self.external, other.external) and np.array_equal(
            self.self, other.self
        )


@dataclass(frozen=True)
class SimOutcome:
    author_id: str
    replicate: int
    h_external_only: int
    h_with_self_effect: int
    seed: int


def h_index(counts) -> int:
    """Largest h such that h entries of ``counts`` are at least h."""
    c = np.sort(np.asarray(counts, dtype=np.int64))[::-1]
    return int(np.count_nonzero(c >= np.arange(1, c.size + 1)))


def _place(u: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Inverse-CDF placement of uniforms ``u``; uniform when all weights are zero."""
    n = weights.size
    total = weights.sum()
    if total == 0:
        return np.minimum((u * n).astype(np.int64), n - 1)
    cdf = np.cumsum(weights)
    return np.minimum(np.searchsorted(cdf, u * total, side="right"), n - 1).astype(np.int64)


def _year_blocks(stream: EventStream):
    """(year, n_papers_existing, n_papers_before_year, n_external, n_self) per event year."""
    years = stream.event_years
    career = stream.career
    for t in np.unique(years).tolist():
        in_year = years == t
        n_self = int(np.count_nonzero(stream.is_self & in_year))
        n_ext = int(np.count_nonzero(in_year)) - n_self
        yield t, career.n_papers_at(t), career.n_papers_at(t - 1), n_ext, n_self


def _simulate(stream: EventStream, seed: int, with_self: bool) -> SimVector:
    n = stream.career.n_papers
    ext = np.zeros(n, dtype=np.int64)
    own = np.zeros(n, dtype=np.int64)
    rng_ext = make_rng(derive_seed(seed, _EXTERNAL_STREAM))
    rng_self = make_rng(derive_seed(seed, _SELF_STREAM))
    for _, n_now, n_before, n_ext, n_self in _year_blocks(stream):
        weights = (ext + own)[:n_now] if with_self else ext[:n_now]
        ext_targets = _place(rng_ext.random(n_ext), weights)
        if with_self and n_self:
            eligible = n_before if n_before > 0 else n_now
            own += np.bincount(rng_self.integers(0, eligible, n_self), minlength=n)
        ext += np.bincount(ext_targets, minlength=n)
    return SimVector(ext, own)


def simulate_variant_a(stream: EventStream, seed: int) -> SimVector:
    """External citations only, placed by preferential attachment."""
    return _simulate(stream, seed, with_self=False)


def simulate_variant_b(stream: EventStream, seed: int) -> SimVector:
    """External citations by preferential attachment over external + self counts,
    self citations uniform over papers from strictly earlier years (all existing
    papers when there are none).  Report ``.external`` for the final vector.
    """
    return _simulate(stream, seed, with_self=True)


@dataclass
class HIndexExperiment:
    outcomes: list[SimOutcome]
    histogram: dict[tuple[int, int], int] = field(default_factory=dict)
    mean_b_given_a: dict[int, float] = field(default_factory=dict)

    @property
    def mean_difference(self) -> float:
        if not self.outcomes:
            return 0.0
        return float(
            np.mean([o.h_with_self_effect - o.h_external_only for o in self.outcomes])
        )


def run_hindex_experiment(
    streams: Sequence[EventStream], seeds_per_author: int = 1, base_seed: int = 0
) -> HIndexExperiment:
    """Paired A/B h-index outcomes for every (author, replicate).

    The replicate seed is ``derive_seed(base_seed, author_index, replicate)``
    and is shared by both variants.
    """
    outcomes = []
    for i, stream in enumerate(streams):
        for r in range(seeds_per_author):
            seed = derive_seed(base_seed, i, r)
            h_a = h_index(simulate_variant_a(stream, seed).external)
            h_b = h_index(simulate_variant_b(stream, seed).external)
            outcomes.append(SimOutcome(stream.author_id, r, h_a, h_b, seed))

    hist = Counter((o.h_external_only, o.h_with_self_effect) for o in outcomes)
    by_a = defaultdict(list)
    for o in outcomes:
        by_a[o.h_external_only].append(o.h_with_self_effect)
    return HIndexExperiment(
        outcomes,
        dict(sorted(hist.items())),
        {a: float(np.mean(v)) for a, v in sorted(by_a.items())},
    )
