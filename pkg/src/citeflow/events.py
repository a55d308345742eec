"""Per-author careers and ordered citation-event streams."""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import Corpus, id_sort_key

__all__ = [
    "AuthorNotFoundError",
    "Career",
    "CitationEvent",
    "EmptyStreamError",
    "EventStream",
    "Kind",
    "build_career",
    "build_streams",
    "career_start_cohort",
    "citation_counts",
    "citations_per_paper",
    "extract_events",
    "filter_authors",
    "group_by_cohort",
    "self_fraction",
    "write_stream",
]


class AuthorNotFoundError(KeyError):
    pass


class EmptyStreamError(ValueError):
    """A statistic was requested that is undefined for an empty stream or career."""


class Kind(str, Enum):
    SELF = "self"
    EXTERNAL = "external"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Career:
    """An author's papers in canonical ``(year, paper_id)`` order."""

    author_id: str
    paper_ids: tuple[str, ...]
    years: tuple[int, ...]

    def __post_init__(self):
        if len(self.paper_ids) != len(self.years):
            raise ValueError("paper_ids and years differ in length")
        keys = [(y, id_sort_key(p)) for p, y in zip(self.paper_ids, self.years)]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("career papers must be strictly sorted by (year, paper_id)")

    @property
    def n_papers(self) -> int:
        return len(self.paper_ids)

    def n_papers_at(self, year: int) -> int:
        """Number of papers published in or before ``year``."""
        return bisect_right(self.years, year)


@dataclass(frozen=True, slots=True)
class CitationEvent:
    year: int
    target_index: int  # 1-based position in Career.paper_ids
    kind: Kind
    citing_paper_id: str

    def sort_key(self):
        return (self.year, id_sort_key(self.citing_paper_id), self.target_index)


@dataclass(frozen=True)
class EventStream:
    """All kept citations received by one career, sorted by ``CitationEvent.sort_key``."""

    career: Career
    events: tuple[CitationEvent, ...] = ()
    excluded_time_travel: int = 0

    @property
    def author_id(self) -> str:
        return self.career.author_id

    @property
    def n_self(self) -> int:
        return int(self.is_self.sum())

    @property
    def n_external(self) -> int:
        return len(self.events) - self.n_self

    @property
    def totals(self) -> dict[Kind, int]:
        return {Kind.SELF: self.n_self, Kind.EXTERNAL: self.n_external}

    @property
    def time_travel_fraction(self) -> float:
        seen = self.excluded_time_travel + len(self.events)
        return self.excluded_time_travel / seen if seen else 0.0

    # array views used by the likelihood and the simulator
    @cached_property
    def event_years(self) -> np.ndarray:
        return np.fromiter((e.year for e in self.events), dtype=np.int64, count=len(self.events))

    @cached_property
    def targets(self) -> np.ndarray:
        """0-based target positions."""
        return np.fromiter(
            (e.target_index - 1 for e in self.events), dtype=np.int64, count=len(self.events)
        )

    @cached_property
    def is_self(self) -> np.ndarray:
        return np.fromiter(
            (e.kind is Kind.SELF for e in self.events), dtype=bool, count=len(self.events)
        )

    def validate(self) -> None:
        """Check ordering, index validity and the no-time-travel guarantee."""
        keys = [e.sort_key() for e in self.events]
        if keys != sorted(keys):
            raise ValueError("events are not in canonical order")
        for e in self.events:
            if not 1 <= e.target_index <= self.career.n_papers_at(e.year):
                raise ValueError(f"event {e} targets a paper not yet published")


def build_career(corpus: Corpus, author_id: str) -> Career:
    try:
        pids = corpus.by_author[author_id]
    except KeyError:
        raise AuthorNotFoundError(author_id) from None
    return Career(author_id, tuple(pids), tuple(corpus.papers[p].year for p in pids))


def extract_events(corpus: Corpus, career: Career) -> EventStream:
    """Every in-corpus citation to ``career``'s papers, time-travel ones excluded.

    A citation whose citing paper is dated before the cited paper is dropped
    and counted; same-year citations are kept.  It is a self citation when
    the career's author is among the citing paper's authors.
    """
    events = []
    excluded = 0
    papers = corpus.papers
    for k, (pid, pub_year) in enumerate(zip(career.paper_ids, career.years), start=1):
        for citer in corpus.citations_of(pid):
            rec = papers[citer]
            if rec.year < pub_year:
                excluded += 1
                continue
            kind = Kind.SELF if career.author_id in rec.author_ids else Kind.EXTERNAL
            events.append(CitationEvent(rec.year, k, kind, citer))
    events.sort(key=CitationEvent.sort_key)
    return EventStream(career, tuple(events), excluded)


def build_streams(corpus: Corpus, author_ids: Iterable[str]) -> list[EventStream]:
    return [extract_events(corpus, build_career(corpus, a)) for a in author_ids]


def self_fraction(stream: EventStream) -> float:
    if not stream.events:
        raise EmptyStreamError(f"author {stream.author_id} has no citations")
    return stream.n_self / len(stream.events)


def citation_counts(corpus: Corpus) -> dict[str, int]:
    """Kept (non-time-travel) citations received by each cited paper."""
    papers = corpus.papers
    out = {}
    for pid, citers in corpus.in_citations.items():
        y = papers[pid].year
        out[pid] = sum(1 for c in citers if papers[c].year >= y)
    return out


def filter_authors(corpus: Corpus, min_papers: int = 10, min_citations: int = 0) -> list[str]:
    """Authors with at least ``min_papers`` papers and more than ``min_citations`` citations.

    The citation threshold is strict ("more than 50"); ``min_citations=0``
    disables it so that uncited authors still pass.  Citations of both kinds
    count, time-travel citations do not.
    """
    counts = citation_counts(corpus) if min_citations > 0 else {}
    keep = []
    for aid, pids in corpus.by_author.items():
        if len(pids) < min_papers:
            continue
        if min_citations > 0 and sum(counts.get(p, 0) for p in pids) <= min_citations:
            continue
        keep.append(aid)
    return sorted(keep, key=id_sort_key)


def citations_per_paper(stream: EventStream) -> float:
    if stream.career.n_papers == 0:
        raise EmptyStreamError(f"author {stream.author_id} has no papers")
    return len(stream.events) / stream.career.n_papers


def career_start_cohort(career: Career) -> int:
    if not career.years:
        raise EmptyStreamError(f"author {career.author_id} has no papers")
    return career.years[0]


def write_stream(stream: EventStream, out: IO[str], delimiter: str = ",") -> None:
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["year", "target_index", "kind", "citing_paper_id"])
    for e in stream.events:
        writer.writerow([e.year, e.target_index, e.kind.value, e.citing_paper_id])


def group_by_cohort(streams: Sequence[EventStream]) -> dict[int, list[EventStream]]:
    """Streams keyed by career-start year, years ascending."""
    groups: dict[int, list[EventStream]] = {}
    for s in streams:
        groups.setdefault(career_start_cohort(s.career), []).append(s)
    return dict(sorted(groups.items()))
