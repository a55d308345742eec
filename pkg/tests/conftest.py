import numpy as np
import pytest

from citeflow.events import Career, CitationEvent, EventStream, Kind


def make_stream(paper_years, events, author_id="A"):
    """Stream from ``paper_years`` (career order) and ``(year, k, kind)`` triples.

    ``kind`` is "s" for self, anything else external.  Citing ids are made
    up so that the canonical sort keeps the given within-year order.
    """
    paper_ids = tuple(f"{author_id}-p{i:03d}" for i in range(len(paper_years)))
    career = Career(author_id, paper_ids, tuple(paper_years))
    evs = []
    for n, (year, k, kind) in enumerate(events):
        evs.append(
            CitationEvent(year, k, Kind.SELF if kind == "s" else Kind.EXTERNAL, f"c{n:06d}")
        )
    evs.sort(key=CitationEvent.sort_key)
    return EventStream(career, tuple(evs))


def naive_event_states(stream, kind_filter="all"):
    """(X_k(t-1), sum_i X_i(t-1), N(t)) for every selected event, by brute replay."""
    years = list(stream.career.years)
    counts = [0] * len(years)
    out = []
    by_year = {}
    for e in stream.events:
        by_year.setdefault(e.year, []).append(e)
    for t in sorted(by_year):
        n_t = sum(1 for y in years if y <= t)
        total = sum(counts)
        for e in by_year[t]:
            is_self = e.kind is Kind.SELF
            if kind_filter == "all" or (kind_filter == "self") == is_self:
                out.append((counts[e.target_index - 1], total, n_t))
        for e in by_year[t]:
            counts[e.target_index - 1] += 1
    return out


def grid_loglik(states, grid):
    """Log-likelihood on every rho of ``grid`` straight from the mixture formula."""
    grid = np.asarray(grid, dtype=float)[:, None]
    if not states:
        return np.zeros(grid.shape[0])
    x, s, n = (np.array(v, dtype=float) for v in zip(*states))
    safe_s = np.where(s > 0, s, 1.0)
    pref = np.where(s > 0, x / safe_s, 1.0 / n)
    with np.errstate(divide="ignore"):
        return np.log(grid * pref + (1.0 - grid) / n).sum(axis=1)


def grid_argmax(stream, kind_filter="all", step=1e-4):
    grid = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    values = grid_loglik(naive_event_states(stream, kind_filter), grid)
    return grid[int(np.argmax(values))], values


@pytest.fixture
def closed_form_stream():
    """Papers A, B in year 0; year 1: two citations to A; year 2: A, A, B.

    l(rho) = 2 ln((1+rho)/2) + ln((1-rho)/2) + const, maximized at rho = 1/3.
    """
    return make_stream(
        [2000, 2000],
        [(2001, 1, "x"), (2001, 1, "x"), (2002, 1, "x"), (2002, 1, "x"), (2002, 2, "x")],
    )
