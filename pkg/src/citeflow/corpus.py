"""Ingestion of citation-corpus dumps and normalized event tables.

Two input shapes are supported:

* the AMiner/DBLP style dump: one JSON object per line (optionally wrapped
  in a JSON array with leading/trailing commas), with ``id``, ``year``,
  ``authors`` (list of ``{"id": ...}`` objects or bare ids) and
  ``references`` (list of paper ids);
* a delimited table with header ``paper_id,year,author_ids,reference_ids``
  where the two list columns are ``;``-joined.

Both produce the same immutable :class:`Corpus`.  References that do not
resolve to a kept paper are counted in the :class:`IngestReport` and
discarded.
"""

from __future__ import annotations

import csv
import gzip
import json
import os
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Iterator, Mapping

__all__ = [
    "CACHE_VERSION",
    "CacheError",
    "Corpus",
    "CorpusSummary",
    "IngestReport",
    "PaperRecord",
    "TABLE_COLUMNS",
    "corpus_from_records",
    "corpus_stats",
    "id_sort_key",
    "ingest_dump",
    "ingest_event_table",
    "load_cache",
    "save_cache",
    "write_event_table",
]

MIN_YEAR = 1000
MAX_YEAR = 3000
TABLE_COLUMNS = ("paper_id", "year", "author_ids", "reference_ids")
LIST_SEP = ";"
CACHE_FORMAT = "citeflow-corpus"
CACHE_VERSION = 1


class CacheError(ValueError):
    """Raised when a corpus cache is missing, corrupt or of another version."""


def id_sort_key(identifier: str) -> tuple[int, int, str]:
    """Canonical ordering for opaque ids: numeric ids numerically, then the rest."""
    if identifier.isdigit():
        return (0, int(identifier), identifier)
    return (1, 0, identifier)


@dataclass(frozen=True, slots=True)
class PaperRecord:
    paper_id: str
    year: int
    author_ids: tuple[str, ...]
    reference_ids: tuple[str, ...] = ()


@dataclass
class IngestReport:
    """Counters collected while building a corpus.

    ``records_seen`` counts well-formed records; every one of them ends up
    either kept or in exactly one of the ``papers_dropped_*`` counters.
    Malformed input is counted in ``parse_errors`` only.
    """

    records_seen: int = 0
    papers_kept: int = 0
    papers_dropped_no_year: int = 0
    papers_dropped_no_authors: int = 0
    papers_dropped_duplicate: int = 0
    references_total: int = 0
    references_resolved: int = 0
    self_references_dropped: int = 0
    parse_errors: int = 0

    @property
    def papers_dropped(self) -> int:
        return (
            self.papers_dropped_no_year
            + self.papers_dropped_no_authors
            + self.papers_dropped_duplicate
        )

    def is_consistent(self) -> bool:
        counters = asdict(self).values()
        return all(c >= 0 for c in counters) and (
            self.papers_kept + self.papers_dropped == self.records_seen
        )


class Corpus:
    """Immutable paper collection with author and reverse-reference indexes.

    ``papers`` maps paper id to :class:`PaperRecord` (reference lists only
    contain ids of papers in the corpus).  ``by_author`` maps author id to
    that author's paper ids sorted by ``(year, id)``.  ``in_citations`` maps
    a paper id to the ids of corpus papers referencing it; papers nobody
    cites are absent from it.
    """

    __slots__ = ("_papers", "_by_author", "_in_citations")

    def __init__(
        self,
        papers: Mapping[str, PaperRecord],
        by_author: Mapping[str, tuple[str, ...]],
        in_citations: Mapping[str, tuple[str, ...]],
    ):
        object.__setattr__(self, "_papers", MappingProxyType(dict(papers)))
        object.__setattr__(self, "_by_author", MappingProxyType(dict(by_author)))
        object.__setattr__(self, "_in_citations", MappingProxyType(dict(in_citations)))

    def __setattr__(self, name, value):
        raise AttributeError("Corpus is immutable")

    @property
    def papers(self) -> Mapping[str, PaperRecord]:
        return self._papers

    @property
    def by_author(self) -> Mapping[str, tuple[str, ...]]:
        return self._by_author

    @property
    def in_citations(self) -> Mapping[str, tuple[str, ...]]:
        return self._in_citations

    def citations_of(self, paper_id: str) -> tuple[str, ...]:
        return self._in_citations.get(paper_id, ())

    @property
    def author_ids(self) -> list[str]:
        return sorted(self._by_author, key=id_sort_key)

    def __len__(self) -> int:
        return len(self._papers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            dict(self._papers) == dict(other._papers)
            and dict(self._by_author) == dict(other._by_author)
            and dict(self._in_citations) == dict(other._in_citations)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Corpus(papers={len(self._papers)}, authors={len(self._by_author)})"


# --------------------------------------------------------------------------
# record normalization
# --------------------------------------------------------------------------


class _BadRecord(Exception):
    pass


def _clean_id(value) -> str | None:
    if value is None or isinstance(value, bool):
        return None
    if isinstance(value, float):
        if not value.is_integer():
            return None
        value = int(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        value = value.strip()
        return value or None
    return None


def _clean_year(value) -> int | None:
    if value is None or isinstance(value, bool):
        return None
    try:
        year = int(str(value).strip())
    except ValueError:
        return None
    if MIN_YEAR <= year <= MAX_YEAR:
        return year
    return None


def _dedupe(ids: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for i in ids:
        if i not in seen:
            seen.add(i)
            out.append(i)
    return out


def _normalize(paper_id, year, authors, references, report: IngestReport):
    """Turn raw field values into a PaperRecord, or None if it is dropped."""
    pid = _clean_id(paper_id)
    if pid is None:
        raise _BadRecord("missing paper id")
    if authors is None:
        authors = []
    if references is None:
        references = []
    if not isinstance(authors, list) or not isinstance(references, list):
        raise _BadRecord("authors/references must be lists")

    report.records_seen += 1
    clean_year = _clean_year(year)
    if clean_year is None:
        report.papers_dropped_no_year += 1
        return None

    author_ids = []
    for a in authors:
        aid = _clean_id(a.get("id")) if isinstance(a, dict) else _clean_id(a)
        if aid is not None:
            author_ids.append(aid)
    author_ids = _dedupe(author_ids)
    if not author_ids:
        report.papers_dropped_no_authors += 1
        return None

    refs = []
    for r in _dedupe(x for x in map(_clean_id, references) if x is not None):
        if r == pid:
            report.self_references_dropped += 1
        else:
            refs.append(r)
    return PaperRecord(pid, clean_year, tuple(author_ids), tuple(refs))


def corpus_from_records(
    records: Iterable[PaperRecord], report: IngestReport | None = None
) -> tuple[Corpus, IngestReport]:
    """Index already-normalized records.

    Duplicate paper ids keep the first occurrence.  When called directly
    (without a report from a parser) every record counts as seen.
    """
    if report is None:
        report = IngestReport()
        fresh = True
    else:
        fresh = False

    kept: dict[str, PaperRecord] = {}
    for rec in records:
        if fresh:
            report.records_seen += 1
        if rec.paper_id in kept:
            report.papers_dropped_duplicate += 1
            continue
        kept[rec.paper_id] = rec

    papers: dict[str, PaperRecord] = {}
    by_author: dict[str, list[str]] = defaultdict(list)
    in_citations: dict[str, list[str]] = defaultdict(list)
    for pid in sorted(kept, key=id_sort_key):
        rec = kept[pid]
        report.references_total += len(rec.reference_ids)
        resolved = tuple(
            sorted((r for r in rec.reference_ids if r in kept), key=id_sort_key)
        )
        report.references_resolved += len(resolved)
        for r in resolved:
            in_citations[r].append(pid)
        if resolved != rec.reference_ids:
            rec = PaperRecord(rec.paper_id, rec.year, rec.author_ids, resolved)
        papers[pid] = rec
        for aid in rec.author_ids:
            by_author[aid].append(pid)

    report.papers_kept = len(papers)
    years = {pid: rec.year for pid, rec in papers.items()}
    author_index = {
        aid: tuple(sorted(pids, key=lambda p: (years[p], id_sort_key(p))))
        for aid, pids in sorted(by_author.items(), key=lambda kv: id_sort_key(kv[0]))
    }
    # citing ids were appended in canonical order already
    citation_index = {pid: tuple(citers) for pid, citers in in_citations.items()}
    return Corpus(papers, author_index, citation_index), report


# --------------------------------------------------------------------------
# dump format
# --------------------------------------------------------------------------


def _open_text(path: str | os.PathLike) -> IO[str]:
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _strip_array_syntax(line: str) -> str:
    s = line.strip()
    if s.startswith("["):
        s = s[1:].lstrip()
    if s.startswith(","):
        s = s[1:].lstrip()
    if s.endswith("]") and not s.endswith("]]") and s[:-1].rstrip().endswith("}"):
        s = s[:-1].rstrip()
    if s.endswith(","):
        s = s[:-1].rstrip()
    return s


def _iter_dump_objects(fh: IO[str]) -> Iterator[object]:
    for line in fh:
        s = line.strip()
        if not s or s in ("[", "]"):
            continue
        try:
            obj = json.loads(s)
        except json.JSONDecodeError:
            try:
                obj = json.loads(_strip_array_syntax(s))
            except json.JSONDecodeError:
                yield _BadRecord("invalid JSON")
                continue
        if isinstance(obj, list):
            yield from obj
        else:
            yield obj


def ingest_dump(
    path: str | os.PathLike, limits: int | None = None
) -> tuple[Corpus, IngestReport]:
    """Parse a DBLP-style dump in one streaming pass.

    Parameters
    ----------
    path : path-like
        Dump file, optionally gzip-compressed (``.gz``).
    limits : int, optional
        Stop after this many input records (parse errors included).

    Unknown fields are ignored.  Malformed records are skipped and counted
    in ``parse_errors``; an unreadable file raises ``OSError``.
    """
    report = IngestReport()
    records = []
    with _open_text(path) as fh:
        for n, obj in enumerate(_iter_dump_objects(fh)):
            if limits is not None and n >= limits:
                break
            if isinstance(obj, _BadRecord) or not isinstance(obj, dict):
                report.parse_errors += 1
                continue
            try:
                rec = _normalize(
                    obj.get("id"),
                    obj.get("year"),
                    obj.get("authors"),
                    obj.get("references"),
                    report,
                )
            except _BadRecord:
                report.parse_errors += 1
                continue
            if rec is not None:
                records.append(rec)
    return corpus_from_records(records, report)


# --------------------------------------------------------------------------
# normalized event table
# --------------------------------------------------------------------------


def _split_list(cell: str | None) -> list[str]:
    if cell is None:
        return []
    return [x for x in (p.strip() for p in cell.split(LIST_SEP)) if x]


def _delimiter_for(path: str) -> str:
    return "\t" if path.endswith((".tsv", ".tsv.gz")) else ","


def ingest_event_table(
    path: str | os.PathLike | IO[str], delimiter: str | None = None
) -> tuple[Corpus, IngestReport]:
    """Load a normalized event table (see module docstring for the columns).

    ``path`` may also be an open text stream.  Rows with the wrong number of
    fields or a missing paper id are skipped and counted in ``parse_errors``.
    """
    if hasattr(path, "read"):
        return _read_table(path, delimiter or ",")
    spath = os.fspath(path)
    with _open_text(spath) as fh:
        return _read_table(fh, delimiter or _delimiter_for(spath))


def _read_table(fh: IO[str], delimiter: str) -> tuple[Corpus, IngestReport]:
    report = IngestReport()
    records = []
    reader = csv.reader(fh, delimiter=delimiter)
    header = next(reader, None)
    if header is None:
        return corpus_from_records(records, report)
    header = [h.strip() for h in header]
    missing = [c for c in TABLE_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"event table is missing columns: {', '.join(missing)}")
    cols = [header.index(c) for c in TABLE_COLUMNS]
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            report.parse_errors += 1
            continue
        pid, year, authors, refs = (row[i] for i in cols)
        try:
            rec = _normalize(pid, year or None, _split_list(authors), _split_list(refs), report)
        except _BadRecord:
            report.parse_errors += 1
            continue
        if rec is not None:
            records.append(rec)
    return corpus_from_records(records, report)


def write_event_table(corpus: Corpus, out: str | os.PathLike | IO[str], delimiter: str = ",") -> None:
    """Write ``corpus`` as a normalized event table, rows in canonical id order."""
    if hasattr(out, "write"):
        _write_table(corpus, out, delimiter)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        _write_table(corpus, fh, delimiter)


def _write_table(corpus: Corpus, fh: IO[str], delimiter: str) -> None:
    writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for pid, rec in corpus.papers.items():
        for i in (*rec.author_ids, *rec.reference_ids):
            if LIST_SEP in i:
                raise ValueError(f"identifier {i!r} contains the list separator")
        writer.writerow(
            [pid, rec.year, LIST_SEP.join(rec.author_ids), LIST_SEP.join(rec.reference_ids)]
        )


# --------------------------------------------------------------------------
# cache
# --------------------------------------------------------------------------


def save_cache(corpus: Corpus, report: IngestReport, path: str | os.PathLike) -> None:
    """Write a versioned, gzip-compressed JSON cache (byte-stable for equal input)."""
    payload = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "report": asdict(report),
        "papers": [
            [r.paper_id, r.year, list(r.author_ids), list(r.reference_ids)]
            for r in corpus.papers.values()
        ],
    }
    raw = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0, filename="") as gz:
            gz.write(raw)


def load_cache(path: str | os.PathLike) -> tuple[Corpus, IngestReport]:
    if not os.path.exists(path):
        raise CacheError(
            f"no corpus cache at {os.fspath(path)!r}; run `citeflow ingest` first"
        )
    try:
        with gzip.open(path, "rb") as gz:
            payload = json.loads(gz.read().decode("utf-8"))
    except (OSError, ValueError) as exc:
        raise CacheError(f"unreadable corpus cache {os.fspath(path)!r}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CACHE_FORMAT:
        raise CacheError(f"{os.fspath(path)!r} is not a citeflow corpus cache")
    if payload.get("version") != CACHE_VERSION:
        raise CacheError(
            f"cache version {payload.get('version')} is not supported "
            f"(expected {CACHE_VERSION}); re-run `citeflow ingest`"
        )
    records = [PaperRecord(p, y, tuple(a), tuple(r)) for p, y, a, r in payload["papers"]]
    corpus, _ = corpus_from_records(records)
    return corpus, IngestReport(**payload["report"])


# --------------------------------------------------------------------------
# summaries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusSummary:
    n_papers: int = 0
    n_authors: int = 0
    n_citations: int = 0
    year_histogram: dict[int, int] = field(default_factory=dict)
    first_year_histogram: dict[int, int] = field(default_factory=dict)


def corpus_stats(corpus: Corpus) -> CorpusSummary:
    """Paper/author/citation totals plus publication-year histograms.

    ``first_year_histogram`` counts authors by the year of their first paper.
    """
    years = Counter(rec.year for rec in corpus.papers.values())
    first = Counter(corpus.papers[pids[0]].year for pids in corpus.by_author.values())
    return CorpusSummary(
        n_papers=len(corpus.papers),
        n_authors=len(corpus.by_author),
        n_citations=sum(len(c) for c in corpus.in_citations.values()),
        year_histogram=dict(sorted(years.items())),
        first_year_histogram=dict(sorted(first.items())),
    )

