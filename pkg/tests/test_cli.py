import csv
import json
import subprocess
import sys

import pytest

from basinforge import cli


def run(args, tmp_path, *extra):
    return cli.main([*args, "--out", str(tmp_path / "out"), *extra])


def read_report(tmp_path):
    with open(tmp_path / "out" / "report.csv") as fh:
        return list(csv.DictReader(fh))


def test_small_halley_run(tmp_path):
    assert run(["--method", "2", "--poly", "unity:3", "--grid", "64"], tmp_path) == 0
    pair = tmp_path / "out" / "unity3" / "02-halley"
    assert sorted(p.name for p in pair.iterdir()) == ["basins.ppm", "histogram.csv", "iterations.ppm",
                                                     "record.json"]
    rec = json.loads((pair / "record.json").read_text())
    assert abs(rec["n_star"] - 6) <= 1
    for key in ("scheme", "polynomial", "a", "b", "h", "s_b", "s_bb", "counts", "wall_time_s", "king_beta"):
        assert key in rec
    rows = read_report(tmp_path)
    assert len(rows) == 1 and rows[0]["status"] == "ok"
    assert list(rows[0]) == cli.REPORT_COLUMNS


def test_newton_default_grid(tmp_path):
    assert run(["--method", "newton", "--poly", "unity:3", "--emit", "hist"], tmp_path) == 0
    rec = json.loads((tmp_path / "out" / "unity3" / "01-newton" / "record.json").read_text())
    assert abs(rec["n_star"] - 9) <= 1
    assert rec["grid"] == [1024, 1024] and rec["n_max"] == 500 and rec["accuracy"] == 1e-15


@pytest.mark.parametrize("bad", [["--method", "99"], ["--method", ""], ["--method", ","],
                                 ["--poly", "unity:0"], ["--grid", "ax3"], ["--emit", "pictures"],
                                 ["--poly", "1,0,1"], ["--box-nodes", "1"]])
def test_usage_errors(tmp_path, bad, capsys):
    assert run(bad, tmp_path) == 2
    assert "error" in capsys.readouterr().err


def test_overwrite_guard(tmp_path):
    args = ["--method", "1", "--poly", "unity:3", "--grid", "16"]
    assert run(args, tmp_path) == 0
    assert run(args, tmp_path) == 1
    assert run(args, tmp_path, "--overwrite") == 0


def test_manifest_precedence(tmp_path):
    man = tmp_path / "study.txt"
    man.write_text("# small study\nmethod = halley, king\npoly = unity:3\npoly = unity:4\n"
                   "grid = 32\nking_beta = 1.5\n")
    assert cli.main(["--manifest", str(man), "--grid", "16", "--out", str(tmp_path / "out")]) == 0
    rows = read_report(tmp_path)
    assert [(r["scheme"], r["polynomial"]) for r in rows] == [
        ("halley", "z^3-1"), ("king", "z^3-1"), ("halley", "z^4-1"), ("king", "z^4-1")]
    rec = json.loads((tmp_path / "out" / "unity4" / "06-king" / "record.json").read_text())
    assert rec["grid"] == [16, 16] and rec["king_beta"] == 1.5


def test_pair_failure_is_recorded(tmp_path):
    # 30 nodes cannot be tiled by 4-node boxes
    assert run(["--method", "1,2", "--poly", "unity:3", "--grid", "30"], tmp_path) == 1
    rows = read_report(tmp_path)
    assert len(rows) == 2 and all(r["status"] == "failed" for r in rows)
    assert "IndivisibleGrid" in rows[0]["error"]
    assert not any((tmp_path / "out" / "unity3" / "01-newton").iterdir())


def test_partial_artifacts_removed(tmp_path, monkeypatch):
    def boom(grid):
        raise RuntimeError("disk full")
    monkeypatch.setattr(cli, "render_iterations", boom)
    assert run(["--method", "1", "--poly", "unity:3", "--grid", "16"], tmp_path) == 1
    assert list((tmp_path / "out" / "unity3" / "01-newton").iterdir()) == []


def test_report_fractions_determinism_and_bars(tmp_path):
    args = ["--method", "all", "--poly", "unity:3", "--grid", "32", "--parallel-pairs", "3"]
    assert run(args, tmp_path) == 0
    first = read_report(tmp_path)
    assert [int(r["scheme_index"]) for r in first] == list(range(1, 17))
    for r in first:
        total = sum(float(r[k]) for k in ("converged_fraction", "diverged_fraction", "aborted_fraction",
                                          "nonconverged_fraction"))
        assert abs(total - 1) <= 1e-12
        assert float(r["efficiency_index"]) == pytest.approx(int(r["order"]) ** (1 / int(r["evals_per_step"])))
    assert run(args, tmp_path, "--overwrite") == 0
    second = read_report(tmp_path)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows]
    assert strip(first) == strip(second)
    for name in cli.BAR_CHARTS.values():
        with open(tmp_path / "out" / name) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["scheme_index", "scheme", "z^3-1"] and len(rows) == 17
    summary = (tmp_path / "out" / "summary.txt").read_text().splitlines()
    assert summary[0].split()[:3] == ["#", "scheme", "poly"] and len(summary) == 17


def test_coefficient_polynomial_with_catalog(tmp_path):
    roots = tmp_path / "quad.txt"
    roots.write_text("0+1i\n0-1i\n")
    assert run(["--method", "newton", "--poly", "1+0i,0+0i,1+0i", "--roots", str(roots), "--grid", "16"],
               tmp_path) == 0
    assert (tmp_path / "out" / "quad" / "01-newton" / "basins.ppm").exists()
    bad = tmp_path / "bad.txt"
    bad.write_text("1+0i\n")
    assert run(["--poly", "1+0i,0+0i,1+0i", "--roots", str(bad)], tmp_path) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "basinforge", "--method", "halley", "--poly", "unity:3",
                          "--grid", "8", "--out", str(tmp_path / "o"), "--emit", "report"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "halley" in out.stdout
