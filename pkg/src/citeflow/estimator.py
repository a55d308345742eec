"""Maximum-likelihood estimation of rho on [0, 1]."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .events import EventStream
from .likelihood import KindFilter, LogLikObjective

__all__ = [
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "EstimationResult",
    "estimate_aggregate",
    "estimate_author",
    "estimate_authors",
    "maximize",
]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of one maximization.

    ``converged`` is False when the search ran out of iterations or the
    estimate is unreliable; ``unidentifiable`` marks objectives that do not
    depend on rho at all (no usable events), in which case ``rho_hat`` is 0.
    """

    rho_hat: float
    loglik_at_max: float
    filter: KindFilter = KindFilter.ALL
    events_used: int = 0
    iterations: int = 0
    converged: bool = True
    unidentifiable: bool = False
    identifiable_events: int = 0
    author_id: str | None = None


def maximize(
    objective: Callable[[float], float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EstimationResult:
    """Golden-section search for the maximum of a concave function on [0, 1].

    The search shrinks the bracket until its width is at most ``tol`` and
    reports the bracket midpoint.  When the final bracket touches 0 or 1 and
    that endpoint is at least as good as the midpoint, the endpoint is
    returned instead, so boundary maxima come back exactly.  Ties go to the
    smaller rho.  ``-inf`` values (rho = 1 with an unexplainable event)
    compare like any other number.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    f0, f_half, f1 = objective(0.0), objective(0.5), objective(1.0)
    if f0 == f_half == f1:
        return EstimationResult(0.0, f0, converged=False, unidentifiable=True)

    a, b = 0.0, 1.0
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    iterations = 0
    while b - a > tol and iterations < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(d)
        iterations += 1

    mid = 0.5 * (a + b)
    best_rho, best_val = mid, objective(mid)
    if a == 0.0 and f0 >= best_val:
        best_rho, best_val = 0.0, f0
    elif b == 1.0 and f1 > best_val:
        best_rho, best_val = 1.0, f1
    return EstimationResult(best_rho, best_val, iterations=iterations, converged=b - a <= tol)


def _estimate(
    objective: LogLikObjective, tol: float, max_iter: int, min_events: int
) -> EstimationResult:
    if objective.identifiable_events == 0:
        res = EstimationResult(0.0, objective(0.0), converged=False, unidentifiable=True)
    else:
        res = maximize(objective, tol, max_iter)
    if objective.identifiable_events < min_events:
        res = replace(res, converged=False)
    return replace(
        res,
        filter=objective.kind_filter,
        events_used=objective.events_used,
        identifiable_events=objective.identifiable_events,
    )


def estimate_author(
    stream: EventStream,
    kind_filter: KindFilter | str = KindFilter.ALL,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    min_events: int = 1,
) -> EstimationResult:
    """Maximum-likelihood rho for a single author.

    ``min_events`` is the number of rho-dependent events below which the
    estimate is flagged as not converged.
    """
    res = _estimate(LogLikObjective(stream, kind_filter), tol, max_iter, min_events)
    return replace(res, author_id=stream.author_id)


def estimate_aggregate(
    streams: Sequence[EventStream],
    kind_filter: KindFilter | str = KindFilter.ALL,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    min_events: int = 1,
    workers: int = 1,
) -> EstimationResult:
    """Maximum-likelihood rho of the summed log-likelihood of ``streams``."""
    return _estimate(LogLikObjective(streams, kind_filter, workers), tol, max_iter, min_events)


def estimate_authors(
    streams: Sequence[EventStream],
    kind_filter: KindFilter | str = KindFilter.ALL,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    min_events: int = 1,
    workers: int = 1,
) -> list[EstimationResult]:
    """Independent per-author estimates, returned in input order."""

    def one(s):
        return estimate_author(s, kind_filter, tol, max_iter, min_events)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, streams))
    return [one(s) for s in streams]
