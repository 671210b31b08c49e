import json

import numpy as np
import pytest

from rastvec.cli import main
from rastvec.ingest import write_mbr_csv
from rastvec.rtree import MBR, VectorDataset


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def gradient_setup(tmp_path):
    raster = tmp_path / "g.k2r"
    tree = tmp_path / "t.rt"
    csv = tmp_path / "objs.csv"
    write_mbr_csv(csv, VectorDataset([(1, MBR(0, 0, 3, 3)),
                                      (2, MBR(4, 4, 7, 7))]))
    assert run("build-raster", "--synth", "gradient", "--rows", 8, "--cols", 8,
               "--span", 14, "--n1", 3, "--k1", 2, "--k2", 2,
               "--out", raster) == 0
    assert run("build-rtree", "--csv", csv, "--rows", 8, "--cols", 8,
               "--capacity", 2, "--out", tree) == 0
    return raster, tree


def test_build_raster_uniform_size_report(tmp_path, capsys):
    out = tmp_path / "u.k2r"
    assert run("build-raster", "--synth", "uniform", "--rows", 256,
               "--cols", 256, "--span", 7, "--out", out) == 0
    report = capsys.readouterr().out
    assert "k2-raster bytes" in report
    assert out.stat().st_size < 500          # single-node tree
    k2_bytes = int(report.split("k2-raster bytes")[1].split()[0])
    ints_bytes = int(report.split("plain-ints bytes")[1].split()[0])
    assert k2_bytes / ints_bytes < 0.01


def test_build_raster_missing_input(tmp_path, capsys):
    assert run("build-raster", "--grid", tmp_path / "nope.asc",
               "--out", tmp_path / "x.k2r") != 0
    assert "error:" in capsys.readouterr().err


def test_build_rtree_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,5,5,2,2\n")
    assert run("build-rtree", "--csv", bad, "--rows", 8, "--cols", 8,
               "--out", tmp_path / "t.rt") != 0
    assert "inverted" in capsys.readouterr().err


def test_join_output_and_stats(gradient_setup, tmp_path, capsys):
    raster, tree = gradient_setup
    assert run("join", "--raster", raster, "--rtree", tree,
               "--lo", 0, "--hi", 1, "--stats") == 0
    captured = capsys.readouterr()
    lines = captured.out.strip().splitlines()
    # both objects share the single leaf, so both carry its in-range cells
    assert lines == ["P 1 3 0,0 0,1 1,0", "P 2 3 0,0 0,1 1,0"]
    stats = json.loads(captured.err.strip().splitlines()[-1])
    assert stats["engine"] == "k2"
    assert stats["node_visits"] > 0
    assert stats["probable"] == 2


def test_join_engines_agree_byte_for_byte(gradient_setup, tmp_path):
    raster, tree = gradient_setup
    outs = []
    for engine in ("k2", "plain-mbrs", "plain-cells"):
        out = tmp_path / f"{engine}.txt"
        assert run("join", "--raster", raster, "--rtree", tree,
                   "--lo", 3, "--hi", 9, "--engine", engine,
                   "--out", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_topk_output(gradient_setup, capsys):
    raster, tree = gradient_setup
    assert run("topk", "--raster", raster, "--rtree", tree, "-k", 1) == 0
    assert capsys.readouterr().out.strip() == "1 2 14"
    assert run("topk", "--raster", raster, "--rtree", tree, "-k", 2,
               "--lowest", "--engine", "plain-mbrs") == 0
    assert capsys.readouterr().out.strip().splitlines() == ["1 1 0", "2 2 8"]


def test_topk_engines_agree(gradient_setup, tmp_path):
    raster, tree = gradient_setup
    outs = []
    for engine in ("k2", "plain-mbrs", "plain-cells"):
        out = tmp_path / f"tk-{engine}.txt"
        assert run("topk", "--raster", raster, "--rtree", tree, "-k", 2,
                   "--engine", engine, "--out", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_extent_mismatch_rejected(gradient_setup, tmp_path, capsys):
    raster, _ = gradient_setup
    csv = tmp_path / "o2.csv"
    write_mbr_csv(csv, VectorDataset([(1, MBR(0, 0, 3, 3))]))
    other = tmp_path / "other.rt"
    assert run("build-rtree", "--csv", csv, "--rows", 16, "--cols", 16,
               "--out", other) == 0
    capsys.readouterr()
    assert run("join", "--raster", raster, "--rtree", other,
               "--lo", 0, "--hi", 5) != 0
    assert "extent mismatch" in capsys.readouterr().err


def test_build_rtree_world_coordinates(tmp_path, capsys):
    csv = tmp_path / "world.csv"
    # origin (100, 200), 10-unit cells: box x[100,125) y[165,195) -> rows 0-3,
    # cols 0-2
    csv.write_text("4,100.0,170.0,125.0,195.0\n")
    out = tmp_path / "w.rt"
    assert run("build-rtree", "--csv", csv, "--rows", 8, "--cols", 8,
               "--transform", "100,200,10", "--out", out) == 0
    from rastvec.rtree import RTree
    tree = RTree.load(out)
    assert tree.objects[4] == MBR(0, 0, 3, 2)


def test_nodata_sidecar(tmp_path, capsys):
    grid = tmp_path / "g.asc"
    grid.write_text("ncols 2\nnrows 2\nNODATA_value -9\n5 -9\n3 8\n")
    out = tmp_path / "n.k2r"
    assert run("build-raster", "--grid", grid, "--out", out) == 0
    mask = np.load(str(out) + ".mask.npy")
    assert mask.tolist() == [[False, True], [False, False]]


def test_bench_produces_report_and_is_deterministic(tmp_path, capsys):
    report1 = tmp_path / "r1.jsonl"
    report2 = tmp_path / "r2.jsonl"
    csv_path = tmp_path / "r1.csv"
    for report in (report1, report2):
        assert run("bench", "--scenario", "I", "--sizes", "32,64",
                   "--queries", 2, "--objects", 20, "--seed", 5,
                   "--out", report, "--csv", csv_path) == 0
    rows1 = [json.loads(l) for l in report1.read_text().splitlines()]
    rows2 = [json.loads(l) for l in report2.read_text().splitlines()]

    def strip_times(rows):
        return [{k: v for k, v in r.items() if k != "wall_time_s"}
                for r in rows]

    assert strip_times(rows1) == strip_times(rows2)
    engines = {r["engine"] for r in rows1}
    assert engines == {"k2", "plain-mbrs"}
    assert csv_path.exists()
    # scenario I: 2 sizes x (2 join queries + 2 topk directions) x engines
    joins = [r for r in rows1 if r["query"] == "join"]
    assert all(r["node_visits"] > 0 for r in joins if r["engine"] == "k2")
    # the k2 engine is benchmarked once per available kernel backend
    from rastvec.kernels import available_backends
    assert {r["backend"] for r in rows1 if r["engine"] == "k2"} \
        == set(available_backends())


def test_join_backend_flag(gradient_setup, tmp_path):
    raster, tree = gradient_setup
    outs = []
    for backend in ("python", "auto"):
        out = tmp_path / f"b-{backend}.txt"
        assert run("join", "--raster", raster, "--rtree", tree,
                   "--lo", 2, "--hi", 6, "--backend", backend,
                   "--out", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bench_scenario_ii_distinct_values_grow(tmp_path):
    report = tmp_path / "s2.jsonl"
    assert run("bench", "--scenario", "II", "--digits", "0,2", "--size", 64,
               "--queries", 1, "--objects", 10, "--out", report) == 0
    rows = [json.loads(l) for l in report.read_text().splitlines()]
    datasets = {r["dataset"] for r in rows}
    assert datasets == {"digits-0", "digits-2"}


def test_bench_backend_summary_compares_kernels(tmp_path, capsys):
    from rastvec.kernels import available_backends
    assert run("bench", "--scenario", "uniformity", "--fractions", "0,0.5",
               "--size", 64, "--queries", 2, "--objects", 15,
               "--out", tmp_path / "u.jsonl") == 0
    out = capsys.readouterr().out
    assert "k2 join mean:" in out
    if "native" in available_backends():
        assert "python/native" in out
