"""Mixture-model log-likelihood of citation-event streams.

Each event at year ``t`` targeting paper ``k`` has probability::

    p(k) = rho * X_k(t-1) / sum_i X_i(t-1) + (1 - rho) / N(t)

where ``X(t-1)`` holds the citation counts accumulated before year ``t``
(papers published in ``t`` enter at zero) and ``N(t)`` is the number of
papers published up to and including ``t``.  When no citations have been
accumulated yet the preferential term is undefined and the distribution is
taken to be uniform.

Events are reduced to two numbers, the preferential share ``X_k/sum X``
and the uniform share ``1/N``, so the log-likelihood at any ``rho`` is a
single vectorized pass.  Sums use :func:`math.fsum` (correctly rounded) and
authors are combined in canonical id order, which makes aggregate values
independent of thread count.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .corpus import id_sort_key
from .events import EventStream

__all__ = [
    "KindFilter",
    "LogLik",
    "LogLikObjective",
    "YearState",
    "aggregate_loglik",
    "author_loglik",
    "event_probability",
    "event_terms",
    "loglik_curve",
]


class KindFilter(str, Enum):
    ALL = "all"
    EXTERNAL = "external"
    SELF = "self"

    @classmethod
    def parse(cls, value: "KindFilter | str") -> "KindFilter":
        if isinstance(value, cls):
            return value
        v = str(value).lower().removesuffix("_only")
        return cls(v)

    def mask(self, is_self: np.ndarray) -> np.ndarray:
        if self is KindFilter.ALL:
            return np.ones(is_self.shape, dtype=bool)
        if self is KindFilter.SELF:
            return is_self.copy()
        return ~is_self

    def __str__(self) -> str:
        return self.value


class YearState:
    """Citation counts at the start of a year, same-year papers included at zero."""

    __slots__ = ("counts", "total")

    def __init__(self, counts):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("a year state needs at least one paper")
        if (counts < 0).any():
            raise ValueError("citation counts must be non-negative")
        self.counts = counts
        self.total = int(counts.sum())

    @property
    def n(self) -> int:
        return int(self.counts.size)

    def __repr__(self) -> str:
        return f"YearState(counts={self.counts.tolist()})"


@dataclass(frozen=True)
class LogLik:
    value: float
    events_used: int


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return rho


def event_probability(state: YearState, k: int, rho: float) -> float:
    """Probability that a citation lands on paper ``k`` (1-based)."""
    rho = _check_rho(rho)
    if not 1 <= k <= state.n:
        raise IndexError(f"paper index {k} outside 1..{state.n}")
    unif = 1.0 / state.n
    if state.total == 0:
        return unif
    return rho * (int(state.counts[k - 1]) / state.total) + (1.0 - rho) * unif


def event_terms(
    stream: EventStream, kind_filter: KindFilter | str = KindFilter.ALL
) -> tuple[np.ndarray, np.ndarray]:
    """Preferential and uniform shares for each selected event of ``stream``.

    The state advances with every event regardless of ``kind_filter``; the
    filter only chooses which events are returned.
    """
    kind_filter = KindFilter.parse(kind_filter)
    if not stream.events:
        return np.empty(0), np.empty(0)
    years = stream.event_years
    targets = stream.targets
    selected = kind_filter.mask(stream.is_self)
    pub_years = stream.career.years
    counts = np.zeros(stream.career.n_papers, dtype=np.int64)
    total = 0

    pref_parts, unif_parts = [], []
    cuts = np.flatnonzero(np.diff(years)) + 1
    for lo, hi in zip(np.r_[0, cuts], np.r_[cuts, years.size]):
        t = int(years[lo])
        n_t = bisect_right(pub_years, t)
        block = targets[lo:hi]
        chosen = block[selected[lo:hi]]
        if chosen.size:
            unif = np.full(chosen.size, 1.0 / n_t)
            pref = counts[chosen] / total if total > 0 else unif.copy()
            pref_parts.append(pref)
            unif_parts.append(unif)
        counts += np.bincount(block, minlength=counts.size)
        total += hi - lo

    if not pref_parts:
        return np.empty(0), np.empty(0)
    return np.concatenate(pref_parts), np.concatenate(unif_parts)


def _sum_log(pref: np.ndarray, unif: np.ndarray, rho: float) -> float:
    if pref.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(rho * pref + (1.0 - rho) * unif)
    return math.fsum(logs.tolist())


class LogLikObjective:
    """Precomputed log-likelihood of one or more streams as a function of rho.

    Calling the object returns the summed log-likelihood (``-inf`` when an
    event has probability zero, which only happens at ``rho == 1``).
    """

    def __init__(
        self,
        streams: EventStream | Iterable[EventStream],
        kind_filter: KindFilter | str = KindFilter.ALL,
        workers: int = 1,
    ):
        if isinstance(streams, EventStream):
            streams = [streams]
        self.kind_filter = KindFilter.parse(kind_filter)
        ordered = sorted(streams, key=lambda s: id_sort_key(s.author_id))
        self.author_ids = [s.author_id for s in ordered]
        self._terms = [event_terms(s, self.kind_filter) for s in ordered]
        self.workers = max(1, int(workers))
        self.events_used = sum(p.size for p, _ in self._terms)
        self.identifiable_events = sum(int(np.count_nonzero(p != u)) for p, u in self._terms)

    def per_author(self, rho: float) -> list[float]:
        rho = _check_rho(rho)
        if self.workers > 1 and len(self._terms) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                return list(pool.map(lambda pu: _sum_log(pu[0], pu[1], rho), self._terms))
        return [_sum_log(p, u, rho) for p, u in self._terms]

    def __call__(self, rho: float) -> float:
        return math.fsum(self.per_author(rho))

    def loglik(self, rho: float) -> LogLik:
        return LogLik(self(rho), self.events_used)


def author_loglik(
    stream: EventStream, rho: float, kind_filter: KindFilter | str = KindFilter.ALL
) -> LogLik:
    rho = _check_rho(rho)
    pref, unif = event_terms(stream, kind_filter)
    return LogLik(_sum_log(pref, unif, rho), int(pref.size))


def aggregate_loglik(
    streams: Sequence[EventStream],
    rho: float,
    kind_filter: KindFilter | str = KindFilter.ALL,
    workers: int = 1,
) -> LogLik:
    """Sum of per-author log-likelihoods, reduced in canonical author order."""
    return LogLikObjective(streams, kind_filter, workers).loglik(rho)


def loglik_curve(
    target: EventStream | Sequence[EventStream],
    kind_filter: KindFilter | str,
    grid: Iterable[float],
    workers: int = 1,
) -> list[tuple[float, float]]:
    objective = LogLikObjective(target, kind_filter, workers)
    return [(float(r), objective(r)) for r in grid]
