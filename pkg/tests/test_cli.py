import csv
import io
import json
import subprocess
import sys

import pytest

from citeflow.cli import main, parse_grid
from citeflow.corpus import ingest_event_table


def run(*argv):
    return main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    table = d / "synth.csv"
    cache = d / "corpus.gz"
    assert run("synth", "--authors", 60, "--rho-ext", 0.6, "--rho-self", 0.1, "--self-prob", 0.5,
               "--seed", 5, "--start-spread", 3, "-o", table) == 0
    assert run("ingest", "--input", table, "--format", "table", "--cache", cache) == 0
    return d, table, cache


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.1,0.9") == [0.1, 0.9]
    assert len(parse_grid("0:1:0.01")) == 101


def test_bad_grid_is_usage_error(workspace, capsys):
    _, _, cache = workspace
    with pytest.raises(SystemExit) as exc:
        run("curve", "--cache", cache, "--grid", "0:2:0.5")
    assert exc.value.code == 2


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run("estimate", "--bogus")
    assert exc.value.code == 2


def test_missing_cache_is_actionable(tmp_path, capsys):
    assert run("estimate", "--cache", tmp_path / "absent.gz") == 1
    err = capsys.readouterr().err
    assert "citeflow ingest" in err and err.startswith("citeflow: error:")


def test_no_corpus_given(capsys):
    assert run("estimate") == 1
    assert "citeflow ingest" in capsys.readouterr().err


def test_unknown_author(workspace, capsys):
    _, _, cache = workspace
    assert run("events", "--cache", cache, "--author", "nobody") == 1
    assert "nobody" in capsys.readouterr().err


def test_ingest_report_on_stderr(tmp_path, workspace, capsys):
    _, table, _ = workspace
    assert run("ingest", "--input", table, "--format", "table", "--cache", tmp_path / "c.gz") == 0
    info = json.loads(capsys.readouterr().err)
    assert info["parse_errors"] == 0 and info["papers_kept"] == info["records_seen"]


def test_estimate_outputs_and_manifest(workspace, tmp_path):
    _, _, cache = workspace
    out = tmp_path / "est.csv"
    assert run("estimate", "--cache", cache, "--filter", "external", "self", "-o", out) == 0
    got = rows(out)
    assert [r["filter"] for r in got] == ["external", "self"]
    assert all(r["author_id"] == "*" for r in got)
    assert list(got[0]) == ["author_id", "filter", "rho_hat", "loglik", "events_used", "converged"]
    manifest = json.loads((tmp_path / "est.csv.manifest.json").read_text())
    assert manifest["command"] == "estimate" and manifest["flags"]["filter"] == ["external", "self"]
    assert str(cache) in manifest["inputs"] and str(out) in manifest["outputs"]
    assert manifest["outputs"][str(out)].startswith("sha256:")


def test_per_author_scope(workspace, tmp_path):
    _, _, cache = workspace
    out = tmp_path / "per.csv"
    assert run("estimate", "--cache", cache, "--scope", "author", "--min-citations", 20, "-o", out) == 0
    got = rows(out)
    assert got and all(r["author_id"].startswith("a") for r in got)
    assert all(0.0 <= float(r["rho_hat"]) <= 1.0 for r in got)


def test_threshold_error(workspace, capsys):
    _, _, cache = workspace
    assert run("estimate", "--cache", cache, "--min-papers", 10_000) == 1
    assert "min-papers" in capsys.readouterr().err


def test_events_and_curve(workspace, tmp_path):
    _, _, cache = workspace
    ev = tmp_path / "ev.csv"
    assert run("events", "--cache", cache, "--author", "a00001", "-o", ev) == 0
    assert list(rows(ev)[0]) == ["year", "target_index", "kind", "citing_paper_id"]
    cv = tmp_path / "curve.csv"
    assert run("curve", "--cache", cache, "--author", "a00001", "--grid", "0:1:0.5", "-o", cv) == 0
    assert [r["rho"] for r in rows(cv)] == ["0.0", "0.5", "1.0"]


def test_simulate_with_histogram(workspace, tmp_path):
    _, _, cache = workspace
    out, hist = tmp_path / "sim.csv", tmp_path / "hist.csv"
    assert run("simulate", "--cache", cache, "--replicates", 2, "--seed", 4, "-o", out, "--histogram", hist) == 0
    got = rows(out)
    assert {r["replicate"] for r in got} == {"0", "1"}
    assert sum(int(r["count"]) for r in rows(hist)) == len(got)
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert set(manifest["outputs"]) == {str(out), str(hist)}


@pytest.mark.parametrize("kind", ["rho-hist", "rho-citability", "self-fraction", "cohort"])
def test_report_kinds(workspace, tmp_path, kind):
    _, _, cache = workspace
    out = tmp_path / f"{kind}.csv"
    assert run("report", "--cache", cache, "--kind", kind, "--min-citations", 0, "-o", out) == 0
    got = rows(out)
    assert got
    if kind == "rho-hist":
        assert len(got) == 20 and sum(int(r["count"]) for r in got) > 0
    if kind == "cohort":
        assert [int(r["start_year"]) for r in got] == sorted(int(r["start_year"]) for r in got)


def test_byte_identical_reruns(tmp_path):
    outputs = []
    for i in range(2):
        d = tmp_path / str(i)
        d.mkdir()
        run("synth", "--authors", 20, "--rho-ext", 0.4, "--self-prob", 0.4, "--seed", 9, "-o", d / "t.csv")
        run("ingest", "--input", d / "t.csv", "--format", "table", "--cache", d / "c.gz")
        run("estimate", "--cache", d / "c.gz", "--scope", "author", "--min-citations", 0,
            "--threads", 1 + i, "-o", d / "e.csv")
        run("simulate", "--cache", d / "c.gz", "--seed", 2, "-o", d / "s.csv")
        outputs.append({n: (d / n).read_bytes() for n in ("t.csv", "c.gz", "e.csv", "s.csv")})
        digests = json.loads((d / "e.csv.manifest.json").read_text())["outputs"]
        outputs[-1]["digest"] = list(digests.values())
    assert outputs[0] == outputs[1]


def test_synth_table_is_ingestible(workspace):
    _, table, _ = workspace
    corpus, report = ingest_event_table(table)
    assert report.parse_errors == 0 and len(corpus.by_author) > 60


def test_pipe_end_to_end_recovery():
    synth = subprocess.run(
        [sys.executable, "-m", "citeflow", "synth", "--authors", "200", "--rho-ext", "0.5", "--seed", "3"],
        check=True, capture_output=True,
    )
    est = subprocess.run(
        [sys.executable, "-m", "citeflow", "estimate", "--input", "-", "--filter", "all"],
        input=synth.stdout, check=True, capture_output=True,
    )
    (row,) = list(csv.DictReader(io.StringIO(est.stdout.decode())))
    assert abs(float(row["rho_hat"]) - 0.5) <= 0.02
