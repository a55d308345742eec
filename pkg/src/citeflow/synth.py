"""Synthetic careers sampled from the same mixture model the estimator fits.

Random numbers come from numpy's Philox counter-based bit generator seeded
through :class:`numpy.random.SeedSequence`.  Per-author seeds are derived
with ``SeedSequence(entropy=seed, spawn_key=(author_index,))``, so every
author's draws are independent of how many other authors are generated and
of the order in which they are generated.

Within a year, targets are drawn from the frozen year-start state with
inverse-CDF sampling on ``rng.random()`` doubles; all of the year's events
are applied to the counts only once the year is over.  Self citations are
attributed to the author's own papers of that year (each paper cites a
given target at most once and never itself), which makes a synthetic
cohort exportable as an ordinary corpus.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .corpus import Corpus, PaperRecord, corpus_from_records
from .events import Career, CitationEvent, EventStream, Kind

__all__ = [
    "CohortProfile",
    "SynthProfile",
    "cohort_corpus",
    "derive_seed",
    "generate_cohort",
    "generate_stream",
    "make_rng",
    "sample_targets",
    "stream_records",
]


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit child seed for the counter path ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def _as_schedule(value, years: int, name: str) -> tuple[int, ...]:
    if np.isscalar(value):
        out = (int(value),) * years
    else:
        out = tuple(int(v) for v in value)
    if len(out) != years:
        raise ValueError(f"{name} has {len(out)} entries, expected {years}")
    if any(v < 0 for v in out):
        raise ValueError(f"{name} must be non-negative")
    return out


@dataclass(frozen=True)
class SynthProfile:
    """Ground truth for one synthetic career.

    Schedules are per career year; a scalar is broadcast to every year.
    """

    years: int
    papers_per_year: tuple[int, ...] | int
    external_per_year: tuple[int, ...] | int
    self_per_year: tuple[int, ...] | int = 0
    rho_external: float = 0.0
    rho_self: float = 0.0
    seed: int = 0
    author_id: str = "synth"
    start_year: int = 2000

    def __post_init__(self):
        if self.years < 1:
            raise ValueError("a career spans at least one year")
        for name in ("papers_per_year", "external_per_year", "self_per_year"):
            object.__setattr__(self, name, _as_schedule(getattr(self, name), self.years, name))
        if self.papers_per_year[0] < 1:
            raise ValueError("at least one paper must be published in the first year")
        for name in ("rho_external", "rho_self"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if ";" in self.author_id:
            raise ValueError("author_id may not contain ';'")


def sample_targets(
    rng: np.random.Generator, counts: np.ndarray, rho: float, size: int
) -> np.ndarray:
    """Draw ``size`` 0-based targets from the mixture over frozen ``counts``."""
    n = counts.size
    if size == 0:
        return np.empty(0, dtype=np.int64)
    if n == 0:
        raise ValueError("cannot place citations before the first paper exists")
    total = counts.sum()
    if total > 0:
        probs = rho * (counts / total) + (1.0 - rho) / n
    else:
        probs = np.full(n, 1.0 / n)
    cdf = np.cumsum(probs)
    u = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), n - 1).astype(np.int64)


def _assign_self_citers(
    targets: np.ndarray, new_papers: range, fallback: Callable[[], str], paper_id
) -> list[str]:
    used: set[tuple[int, int]] = set()
    load = {p: 0 for p in new_papers}
    citers = []
    for k in targets.tolist():
        options = [p for p in new_papers if p != k and (p, k) not in used]
        if not options:
            citers.append(fallback())
            continue
        p = min(options, key=lambda q: (load[q], q))
        used.add((p, k))
        load[p] += 1
        citers.append(paper_id(p))
    return citers


def generate_stream(profile: SynthProfile) -> EventStream:
    """Sample one career's citation stream (deterministic given ``profile.seed``)."""
    rng = make_rng(profile.seed)
    aid = profile.author_id

    def paper_id(i: int) -> str:
        return f"{aid}/p{i:05d}"

    n_ext = 0
    n_orphan = 0

    def external_id() -> str:
        nonlocal n_ext
        n_ext += 1
        return f"{aid}/x{n_ext:06d}"

    def orphan_id() -> str:
        nonlocal n_orphan
        n_orphan += 1
        return f"{aid}/s{n_orphan:06d}"

    pub_years: list[int] = []
    counts = np.zeros(0, dtype=np.int64)
    events: list[CitationEvent] = []
    for y in range(profile.years):
        year = profile.start_year + y
        first_new = len(pub_years)
        pub_years.extend([year] * profile.papers_per_year[y])
        counts = np.concatenate([counts, np.zeros(len(pub_years) - counts.size, dtype=np.int64)])

        ext = sample_targets(rng, counts, profile.rho_external, profile.external_per_year[y])
        own = sample_targets(rng, counts, profile.rho_self, profile.self_per_year[y])
        for k in ext.tolist():
            events.append(CitationEvent(year, k + 1, Kind.EXTERNAL, external_id()))
        citers = _assign_self_citers(own, range(first_new, len(pub_years)), orphan_id, paper_id)
        for k, c in zip(own.tolist(), citers):
            events.append(CitationEvent(year, k + 1, Kind.SELF, c))

        counts += np.bincount(np.concatenate([ext, own]), minlength=counts.size)

    career = Career(aid, tuple(paper_id(i) for i in range(len(pub_years))), tuple(pub_years))
    events.sort(key=CitationEvent.sort_key)
    return EventStream(career, tuple(events))


@dataclass(frozen=True)
class CohortProfile:
    """Distribution of career shapes used by :func:`generate_cohort`.

    Career length is uniform on ``years``.  Each year the author publishes
    ``Poisson(papers_rate)`` papers (at least one in the first year) and
    receives ``Poisson(external_rate * N)`` external citations, ``N`` being
    the number of papers published so far.  Each new paper except one
    self-cites with probability ``self_prob``, which keeps every self
    citation attributable to a distinct paper of that year.
    """

    rho_external: float = 0.7
    rho_self: float = 0.0
    years: tuple[int, int] = (10, 20)
    papers_rate: float = 2.5
    external_rate: float = 1.0
    self_prob: float = 0.0
    start_year: int = 2000
    start_spread: int = 0

    def __call__(self, rng: np.random.Generator, author_id: str) -> SynthProfile:
        n_years = int(rng.integers(self.years[0], self.years[1] + 1))
        papers = rng.poisson(self.papers_rate, n_years)
        papers[0] = max(papers[0], 1)
        n_so_far = np.cumsum(papers)
        external = rng.poisson(self.external_rate * n_so_far)
        own = rng.binomial(np.maximum(papers - 1, 0), self.self_prob)
        start = self.start_year + int(rng.integers(0, self.start_spread + 1))
        return SynthProfile(
            years=n_years,
            papers_per_year=tuple(papers.tolist()),
            external_per_year=tuple(external.tolist()),
            self_per_year=tuple(own.tolist()),
            rho_external=self.rho_external,
            rho_self=self.rho_self,
            author_id=author_id,
            start_year=start,
        )


def generate_cohort(
    n_authors: int,
    profile_distribution: Callable[[np.random.Generator, str], SynthProfile] | SynthProfile,
    seed: int,
    author_prefix: str = "a",
) -> list[EventStream]:
    """Independent synthetic careers ``{prefix}00000, {prefix}00001, ...``.

    ``profile_distribution`` is either a fixed :class:`SynthProfile` or a
    callable ``(rng, author_id) -> SynthProfile``; in both cases the
    profile's seed is replaced by ``derive_seed(seed, i)``.
    """
    if n_authors < 1:
        raise ValueError("n_authors must be at least 1")
    streams = []
    for i in range(n_authors):
        aid = f"{author_prefix}{i:05d}"
        if isinstance(profile_distribution, SynthProfile):
            profile = replace(profile_distribution, author_id=aid)
        else:
            profile = profile_distribution(make_rng(derive_seed(seed, i, 1)), aid)
        streams.append(generate_stream(replace(profile, seed=derive_seed(seed, i))))
    return streams


def stream_records(stream: EventStream) -> list[PaperRecord]:
    """Corpus records that reproduce ``stream`` under ``extract_events``.

    External citers become single-reference papers by a one-off author.
    Raises ``ValueError`` if a self citation could not be attributed to one
    of the author's papers.
    """
    aid = stream.author_id
    own = {pid: [] for pid in stream.career.paper_ids}
    phantoms = []
    for e in stream.events:
        target = stream.career.paper_ids[e.target_index - 1]
        if e.kind is Kind.SELF:
            if e.citing_paper_id not in own:
                raise ValueError(
                    f"self citation {e} of {aid} has no citing paper in the career"
                )
            own[e.citing_paper_id].append(target)
        else:
            phantoms.append(
                PaperRecord(e.citing_paper_id, e.year, (f"ext:{e.citing_paper_id}",), (target,))
            )
    papers = [
        PaperRecord(pid, year, (aid,), tuple(own[pid]))
        for pid, year in zip(stream.career.paper_ids, stream.career.years)
    ]
    return papers + phantoms


def cohort_corpus(streams: Sequence[EventStream]) -> Corpus:
    records = [r for s in streams for r in stream_records(s)]
    return corpus_from_records(records)[0]
