import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from sortrefine import cli
from sortrefine.cli import UsageError, main, parse_theta
from sortrefine.ingest import parse_ntriples, to_ntriples
from sortrefine.render import raster, to_pgm, to_svg

from _support import P, Q, d1, d2, dataset


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def d2_file(tmp_path):
    rows = {f"s{i}": ["p"] for i in range(1, 4)}
    rows["s1"] = ["p", "q"]
    path = tmp_path / "d2.nt"
    path.write_text(to_ntriples(dataset(rows)))
    return path


def test_parse_theta():
    assert parse_theta("9/10") == Fraction(9, 10)
    assert parse_theta("0.9") == Fraction(9, 10)
    assert parse_theta("0.333333") == Fraction(333333, 1000000)
    assert parse_theta("1") == 1
    for bad in ("0.1234567", "1.5", "3/2", "1/0", "abc", "-0.1"):
        with pytest.raises(UsageError):
            parse_theta(bad)


def test_profile(d2_file):
    code, out = run("profile", "--input", d2_file)
    assert code == 0
    assert "subjects=3\nproperties=2\nsignatures=2\n" in out
    assert "cov=2/3 (0.67)" in out
    assert "sim=3/4 (0.75)" in out


def test_profile_custom_rule(d2_file, tmp_path):
    rule = tmp_path / "mine.rule"
    rule.write_text("$c = $c -> val($c) = 1\n")
    code, out = run("profile", "--input", d2_file, "--rule-file", rule, "--builtin", f"dep:{P},{Q}")
    assert code == 0
    assert f"dep[{P},{Q}]=1/3 (0.33)" in out
    assert "mine=2/3 (0.67)" in out


def test_dep_table(tmp_path):
    path = tmp_path / "t.nt"
    path.write_text(to_ntriples(dataset({"a": ["p", "q"], "b": ["p"], "c": ["q"]})))
    code, out = run("dep-table", "--input", path, "--properties", P, Q)
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == f"{P}\t1/1 (1.00)\t1/2 (0.50)"
    assert lines[2] == f"{Q}\t1/2 (0.50)\t1/1 (1.00)"
    assert lines[-1] == f"1\t{P}\t{Q}\t1/3 (0.33)"
    assert run("dep-table", "--input", path, "--all-pairs")[1] == out
    assert run("dep-table", "--input", path, "--properties", "http://x/zzz")[0] == 64
    assert run("dep-table", "--input", path)[0] == 64


def test_refine_modes(d2_file, tmp_path):
    code, out = run("refine", "--input", d2_file, "--k", 2)
    assert code == 0
    assert "best: k=2 theta=1/1 sorts=2" in out
    assert "  10\t2\thttp://x/s2" in out

    report = tmp_path / "r.jsonl"
    code, out = run("refine", "--input", d2_file, "--mode", "lowest-k", "--theta", "9/10", "--out", report)
    assert code == 0
    assert json.loads(report.read_text().splitlines()[-1])["k"] == 2

    code, _ = run("refine", "--input", d2_file, "--mode", "decide", "--k", 1, "--theta", 1)
    assert code == 1
    code, _ = run("refine", "--input", d2_file, "--mode", "decide", "--k", 2, "--theta", 1, "--time-limit", 1e-9)
    assert code in (0, 2)


def test_refine_is_deterministic(d2_file, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("refine", "--input", d2_file, "--k", 2, "--out", a)[1] == run(
        "refine", "--input", d2_file, "--k", 2, "--out", b)[1]
    assert a.read_bytes() == b.read_bytes()
    assert "seconds" not in a.read_text()


def test_export_lp(d2_file, tmp_path):
    lp = tmp_path / "m.lp"
    code, out = run("export-lp", "--input", d2_file, "--k", 2, "--theta", 1, "--out", lp)
    assert code == 0
    assert "binaries=16 X=4 U=4 T=8" in out
    first = lp.read_bytes()
    run("export-lp", "--input", d2_file, "--k", 2, "--theta", 1, "--out", lp)
    assert lp.read_bytes() == first
    assert b"hash_1" in first
    run("export-lp", "--input", d2_file, "--k", 2, "--theta", 1, "--out", lp, "--no-symmetry")
    assert b"hash_" not in lp.read_bytes()
    run("export-lp", "--input", d2_file, "--k", 1, "--theta", 1, "--out", lp)
    assert b"hash_" not in lp.read_bytes()


def test_cache_round_trip(d2_file, tmp_path):
    cache = tmp_path / "d2.sig"
    assert run("cache", "save", "--input", d2_file, "--out", cache)[0] == 0
    assert run("profile", "--input", cache)[1] == run("profile", "--input", d2_file)[1]
    code, out = run("cache", "load", "--input", cache)
    assert code == 0 and out.endswith("10\t2\thttp://x/s2\n11\t1\thttp://x/s1\n")
    assert run("profile", "--input", cache, "--sort", "http://x/T")[0] == 64


def test_gadget_command(tmp_path):
    graph = tmp_path / "g.txt"
    graph.write_text("3\n1 2\n")
    out_nt = tmp_path / "g.nt"
    code, out = run("gadget", "--graph", graph, "--out", out_nt)
    assert code == 0
    d = parse_ntriples(out_nt.read_text())
    assert len(d.subjects) == 12
    assert (tmp_path / "g.rule").exists()
    code, out = run("profile", "--input", out_nt, "--rule-file", tmp_path / "g.rule")
    assert code == 0 and "signatures=12" in out

    graph.write_text("1\n")
    assert run("gadget", "--graph", graph, "--out", out_nt)[0] == 0
    assert len(parse_ntriples(out_nt.read_text()).subjects) == 4

    graph.write_text("3\n1 2\n2 9\n")
    code = main(["gadget", "--graph", str(graph), "--out", str(out_nt)], out=io.StringIO())
    assert code == 65


def test_gadget_error_mentions_line(tmp_path, capsys):
    graph = tmp_path / "g.txt"
    graph.write_text("3\n1 2\n2 x\n")
    assert main(["gadget", "--graph", str(graph), "--out", str(tmp_path / "o.nt")], out=io.StringIO()) == 65
    assert "line 3" in capsys.readouterr().err


def test_render(d2_file, tmp_path):
    img = tmp_path / "m.pgm"
    assert run("render", "--input", d2_file, "--out", img)[0] == 0
    assert img.read_text() == "P2\n2 3\n1\n0 1\n0 1\n0 0\n"
    svg = tmp_path / "m.svg"
    assert run("render", "--input", d2_file, "--out", svg)[0] == 0
    assert svg.read_text().count('fill="black"') == 4
    code, out = run("render", "--input", d2_file, "--out", img, "--per-sort", "--k", 2)
    assert code == 0
    assert sorted(p.name for p in tmp_path.glob("m-sort*.pgm")) == ["m-sort1.pgm", "m-sort2.pgm"]


def test_raster_scales():
    v = d1(3)
    assert raster(v) == [[1], [1], [1]]
    assert to_pgm(raster(v)) == "P2\n1 3\n1\n0\n0\n0\n"
    assert len(raster(d2(9), scale="log")) == (1 + 3) + 1  # bands of 8 and 1
    assert to_svg([[1, 0]]).count("<rect") == 2


def test_usage_and_io_errors(d2_file, tmp_path, capsys):
    assert run("refine", "--input", d2_file, "--theta", "2")[0] == 64
    assert run("refine", "--input", d2_file, "--mode", "decide", "--k", 2)[0] == 64
    assert run("profile", "--input", tmp_path / "missing.nt")[0] == 66
    assert run("profile", "--input", d2_file, "--builtin", "bogus")[0] == 64
    bad = tmp_path / "bad.nt"
    bad.write_text("<http://x/a> <http://x/p> .\n")
    assert run("profile", "--input", bad)[0] == 65
    with pytest.raises(SystemExit) as ei:
        main(["no-such-command"])
    assert ei.value.code == 64


def test_console_entry_point(d2_file):
    res = subprocess.run([sys.executable, "-m", "sortrefine.cli", "profile", "--input", str(d2_file)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "cov=2/3 (0.67)" in res.stdout
    assert cli.EXIT_UNKNOWN == 2
