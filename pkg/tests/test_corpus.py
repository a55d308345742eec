import gzip
import io
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citeflow.corpus import (
    CacheError,
    PaperRecord,
    corpus_from_records,
    corpus_stats,
    id_sort_key,
    ingest_dump,
    ingest_event_table,
    load_cache,
    save_cache,
    write_event_table,
)


def write_dump(path, records, wrap=False):
    lines = [json.dumps(r) for r in records]
    if wrap:
        text = "[\n" + "\n,".join(lines) + "\n]\n"
    else:
        text = "\n".join(lines) + "\n"
    path.write_text(text)
    return path


TWO_PAPERS = [
    {"id": 1, "year": 2000, "authors": [{"name": "Ann", "id": "A"}], "references": []},
    {"id": 2, "year": 2005, "authors": [{"name": "Bob", "id": "B"}], "references": [1]},
]

TWO_PAPERS_TABLE = "paper_id,year,author_ids,reference_ids\n1,2000,A,\n2,2005,B,1\n"


def test_single_minimal_record(tmp_path):
    corpus, report = ingest_dump(
        write_dump(tmp_path / "d.json", [{"id": 1, "year": 2000, "authors": [{"id": "A"}], "references": []}])
    )
    assert len(corpus) == 1
    assert report.references_resolved == 0
    assert report.papers_kept == 1
    assert report.is_consistent()


def test_single_edge_reconstruction(tmp_path):
    corpus, report = ingest_dump(write_dump(tmp_path / "d.json", TWO_PAPERS))
    assert corpus.in_citations["1"] == ("2",)
    assert report.references_resolved == 1


def test_unresolved_reference_is_counted_not_stored(tmp_path):
    recs = [{"id": 1, "year": 2000, "authors": [{"id": "A"}], "references": [99]}]
    corpus, report = ingest_dump(write_dump(tmp_path / "d.json", recs))
    assert report.references_total == 1
    assert report.references_resolved == 0
    assert corpus.papers["1"].reference_ids == ()
    assert corpus.in_citations == {}


def test_array_wrapped_dump(tmp_path):
    a, _ = ingest_dump(write_dump(tmp_path / "a.json", TWO_PAPERS, wrap=True))
    b, _ = ingest_dump(write_dump(tmp_path / "b.json", TWO_PAPERS))
    assert a == b


def test_gzip_dump(tmp_path):
    path = tmp_path / "d.json.gz"
    with gzip.open(path, "wt") as fh:
        fh.write("\n".join(json.dumps(r) for r in TWO_PAPERS))
    corpus, _ = ingest_dump(path)
    assert corpus.in_citations["1"] == ("2",)


def test_dump_drops_and_errors(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(
        "\n".join(
            [
                json.dumps({"id": 1, "year": 2000, "authors": [{"id": "A"}, {"id": "A"}]}),
                json.dumps({"id": 2, "authors": [{"id": "A"}]}),  # no year
                json.dumps({"id": 3, "year": 0, "authors": [{"id": "A"}]}),  # out of range
                json.dumps({"id": 4, "year": 2001, "authors": [{"name": "anon"}]}),  # no ids
                json.dumps({"year": 2001, "authors": [{"id": "A"}]}),  # no paper id
                "{not json",
                json.dumps({"id": 1, "year": 2003, "authors": [{"id": "B"}]}),  # duplicate
                json.dumps({"id": 5, "year": 2002, "authors": ["B"], "references": [5, 1, 1], "venue": "x"}),
            ]
        )
    )
    corpus, report = ingest_dump(path)
    assert sorted(corpus.papers) == ["1", "5"]
    assert corpus.papers["1"].author_ids == ("A",)
    assert corpus.papers["5"].reference_ids == ("1",)
    assert report.papers_dropped_no_year == 2
    assert report.papers_dropped_no_authors == 1
    assert report.papers_dropped_duplicate == 1
    assert report.parse_errors == 2
    assert report.self_references_dropped == 1
    assert report.references_total == 1
    assert report.records_seen == 6
    assert report.is_consistent()


def test_dump_limit(tmp_path):
    corpus, _ = ingest_dump(write_dump(tmp_path / "d.json", TWO_PAPERS), limits=1)
    assert list(corpus.papers) == ["1"]


def test_unreadable_dump_is_fatal(tmp_path):
    with pytest.raises(OSError):
        ingest_dump(tmp_path / "missing.json")


def test_empty_table(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("paper_id,year,author_ids,reference_ids\n")
    corpus, report = ingest_event_table(path)
    assert len(corpus) == 0
    assert all(v == 0 for v in vars(report).values())


def test_table_matches_dump(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TWO_PAPERS_TABLE)
    from_table, _ = ingest_event_table(path)
    from_dump, _ = ingest_dump(write_dump(tmp_path / "d.json", TWO_PAPERS))
    assert from_table == from_dump


def test_table_keeps_time_travel_rows():
    table = "paper_id,year,author_ids,reference_ids\n1,2007,A,\n2,2005,B,1\n"
    corpus, _ = ingest_event_table(io.StringIO(table))
    assert corpus.in_citations["1"] == ("2",)


def test_table_bad_rows():
    table = "paper_id,year,author_ids,reference_ids\n1,2000,A,\n2,2001\n,2001,B,\n3,2002,B;C;B,1;1\n"
    corpus, report = ingest_event_table(io.StringIO(table))
    assert sorted(corpus.papers) == ["1", "3"]
    assert corpus.papers["3"].author_ids == ("B", "C")
    assert report.parse_errors == 2
    assert report.references_resolved == 1


def test_table_missing_column():
    with pytest.raises(ValueError, match="author_ids"):
        ingest_event_table(io.StringIO("paper_id,year,reference_ids\n"))


def test_tsv_table(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text(TWO_PAPERS_TABLE.replace(",", "\t"))
    corpus, _ = ingest_event_table(path)
    assert corpus.in_citations["1"] == ("2",)


def test_corpus_is_immutable(tmp_path):
    corpus, _ = ingest_dump(write_dump(tmp_path / "d.json", TWO_PAPERS))
    with pytest.raises(AttributeError):
        corpus.papers = {}
    with pytest.raises(TypeError):
        corpus.papers["9"] = None


def test_by_author_sorted_by_year_then_id():
    recs = [
        PaperRecord("9", 2001, ("A",)),
        PaperRecord("10", 2000, ("A",)),
        PaperRecord("3", 2001, ("A",)),
    ]
    corpus, _ = corpus_from_records(recs)
    assert corpus.by_author["A"] == ("10", "3", "9")


def test_id_sort_key_orders_numbers_numerically():
    assert sorted(["10", "9", "b", "a"], key=id_sort_key) == ["9", "10", "a", "b"]


# -- stats -------------------------------------------------------------------


def test_stats_empty():
    corpus, _ = corpus_from_records([])
    s = corpus_stats(corpus)
    assert (s.n_papers, s.n_authors, s.n_citations) == (0, 0, 0)
    assert s.year_histogram == {}


def test_stats_year_histogram():
    recs = [PaperRecord("1", 2000, ("A",)), PaperRecord("2", 2000, ("B",)), PaperRecord("3", 2001, ("A",))]
    s = corpus_stats(corpus_from_records(recs)[0])
    assert s.year_histogram == {2000: 2, 2001: 1}


def ten_paper_fixture():
    # hand-built: authors A (1995 start), B (1999 start), C (2001 start)
    return [
        PaperRecord("1", 1995, ("A",)),
        PaperRecord("2", 1997, ("A", "B")),
        PaperRecord("3", 1999, ("B",), ("1",)),
        PaperRecord("4", 1999, ("B",), ("1", "2")),
        PaperRecord("5", 2001, ("C",), ("3",)),
        PaperRecord("6", 2001, ("A", "C"), ("1", "5")),
        PaperRecord("7", 2003, ("C",), ("99",)),
        PaperRecord("8", 2003, ("A",), ("6", "7")),
        PaperRecord("9", 2005, ("B", "C"), ("8",)),
        PaperRecord("10", 2005, ("A",), ("9", "2")),
    ]


def test_stats_ten_paper_fixture():
    corpus, report = corpus_from_records(ten_paper_fixture())
    s = corpus_stats(corpus)
    assert s.n_papers == 10
    assert s.n_authors == 3
    assert s.n_citations == 11  # 12 references, one to a missing paper
    assert report.references_total == 12
    assert report.references_resolved == 11
    assert s.year_histogram == {1995: 1, 1997: 1, 1999: 2, 2001: 2, 2003: 2, 2005: 2}
    assert sum(s.year_histogram.values()) == report.papers_kept
    # A starts 1995, B 1997 (paper 2), C 2001
    assert s.first_year_histogram == {1995: 1, 1997: 1, 2001: 1}


# -- round trips and properties ------------------------------------------------


def test_table_round_trip(tmp_path):
    corpus, _ = corpus_from_records(ten_paper_fixture())
    path = tmp_path / "t.csv"
    write_event_table(corpus, path)
    again, _ = ingest_event_table(path)
    assert again == corpus


def test_cache_round_trip_and_bytes(tmp_path):
    corpus, report = corpus_from_records(ten_paper_fixture())
    save_cache(corpus, report, tmp_path / "a.cache")
    save_cache(corpus, report, tmp_path / "b.cache")
    assert (tmp_path / "a.cache").read_bytes() == (tmp_path / "b.cache").read_bytes()
    loaded, loaded_report = load_cache(tmp_path / "a.cache")
    assert loaded == corpus
    assert loaded_report == report


def test_cache_version_mismatch_refuses(tmp_path):
    path = tmp_path / "c.cache"
    with gzip.open(path, "wt") as fh:
        json.dump({"format": "citeflow-corpus", "version": 999, "papers": [], "report": {}}, fh)
    with pytest.raises(CacheError, match="version"):
        load_cache(path)


def test_missing_cache_is_actionable(tmp_path):
    with pytest.raises(CacheError, match="citeflow ingest"):
        load_cache(tmp_path / "nope")


record_lists = st.lists(
    st.tuples(
        st.integers(1990, 2010),
        st.lists(st.sampled_from("ABCDE"), min_size=1, max_size=3),
        st.lists(st.integers(0, 25), max_size=5),
    ),
    max_size=20,
)


def _records(raw):
    return [
        PaperRecord(str(i), year, tuple(dict.fromkeys(authors)), tuple(dict.fromkeys(str(r) for r in refs if r != i)))
        for i, (year, authors, refs) in enumerate(raw)
    ]


@settings(max_examples=60, deadline=None)
@given(record_lists, st.randoms(use_true_random=False))
def test_ingestion_order_independent(raw, rnd):
    recs = _records(raw)
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert corpus_from_records(recs)[0] == corpus_from_records(shuffled)[0]


@settings(max_examples=60, deadline=None)
@given(record_lists)
def test_reference_resolution_symmetric(raw):
    recs = _records(raw)
    corpus, report = corpus_from_records(recs)
    kept = set(corpus.papers)
    original = {r.paper_id: set(r.reference_ids) for r in recs}
    for x in kept:
        for pid in kept:
            cites = x in original[pid]
            assert (pid in corpus.citations_of(x)) == cites
    assert report.references_resolved == sum(len(v) for v in corpus.in_citations.values())


@settings(max_examples=30, deadline=None)
@given(record_lists)
def test_round_trip_property(raw):
    corpus, _ = corpus_from_records(_records(raw))
    buf = io.StringIO()
    write_event_table(corpus, buf)
    buf.seek(0)
    assert ingest_event_table(buf)[0] == corpus


def test_shuffled_dump_gives_same_corpus(tmp_path):
    recs = [
        {"id": r.paper_id, "year": r.year, "authors": [{"id": a} for a in r.author_ids], "references": list(r.reference_ids)}
        for r in ten_paper_fixture()
    ]
    a, _ = ingest_dump(write_dump(tmp_path / "a.json", recs))
    random.Random(3).shuffle(recs)
    b, _ = ingest_dump(write_dump(tmp_path / "b.json", recs))
    assert a == b
