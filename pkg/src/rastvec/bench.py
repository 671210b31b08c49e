"""Benchmark harness: synthetic scenario families, counters, backend timing.

Scenario I grows the raster side at a fixed value span; Scenario II fixes the
extent and grows the number of distinct values through decimal-truncation
digits; the uniformity family overwrites a growing fraction of the raster
with a constant block to expose pruning. Every record is reproducible from
its seed. Wall times are reported, never asserted; the assertable quantities
are the node-visit and cell-inspection counters.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .baseline import PlainRaster, baseline_join_mbrs, baseline_topk_mbrs
from .ingest import quantize, synth_raster
from .join import join
from .k2raster import DEFAULT_CONFIG, K2Config, K2Raster, RasterMatrix
from .kernels import available_backends
from .rtree import MBR, RTree, VectorDataset, bulk_load
from .topk import top_k


@dataclass
class BenchRecord:
    scenario: str
    dataset: str
    size: int
    seed: int
    query: str            # "join" or "topk"
    params: dict
    engine: str           # "k2" or "plain-mbrs"
    backend: str          # kernel backend for k2, "-" for plain
    wall_time_s: float
    node_visits: int      # k2 engine counter (0 for plain)
    cells_inspected: int  # plain engine counter (0 for k2)
    result_size: int
    index_bytes: int

    def row(self) -> dict:
        d = asdict(self)
        d["params"] = json.dumps(self.params, sort_keys=True)
        return d


def random_objects(rng: np.random.Generator, n_rows: int, n_cols: int,
                   count: int, max_side_frac: float = 0.05) -> VectorDataset:
    """Random in-extent MBRs; side lengths up to a fraction of the extent."""
    objs = []
    max_h = max(1, int(n_rows * max_side_frac))
    max_w = max(1, int(n_cols * max_side_frac))
    for oid in range(1, count + 1):
        h = int(rng.integers(1, max_h + 1))
        w = int(rng.integers(1, max_w + 1))
        r0 = int(rng.integers(0, n_rows - h + 1))
        c0 = int(rng.integers(0, n_cols - w + 1))
        objs.append((oid, MBR(r0, c0, r0 + h - 1, c0 + w - 1)))
    return VectorDataset(objs)


def random_ranges(rng: np.random.Generator, vmin: int, vmax: int,
                  count: int) -> list[tuple[int, int]]:
    out = []
    for _ in range(count):
        a, b = sorted(int(x) for x in rng.integers(vmin, vmax + 1, 2))
        out.append((a, b))
    return out


def uniformity_matrix(size: int, fraction: float, seed: int,
                      span: int = 1023) -> RasterMatrix:
    """Plasma raster with `fraction` of its area overwritten by a constant."""
    m = synth_raster("plasma", seed, size, size, span)
    if fraction > 0:
        block = int(size * fraction ** 0.5)
        m.values[:block, :block] = span // 2
    return m


def _run_join_k2(raster: K2Raster, tree: RTree, lo: int, hi: int):
    raster.reset_node_count()
    t0 = time.perf_counter()
    res = join(tree, raster, lo, hi)
    dt = time.perf_counter() - t0
    return res, dt, raster.node_count_visited()


def _run_join_plain(plain: PlainRaster, tree: RTree, lo: int, hi: int):
    plain.reset_cell_count()
    t0 = time.perf_counter()
    res = baseline_join_mbrs(plain, tree, lo, hi)
    dt = time.perf_counter() - t0
    return res, dt, plain.cells_inspected


def _dataset_records(scenario: str, name: str, matrix: RasterMatrix,
                     seed: int, n_queries: int, n_objects: int,
                     engines: list[str], backends: list[str],
                     cfg: K2Config, topk_k: int = 10) -> list[BenchRecord]:
    rng = np.random.default_rng(seed)
    tree = bulk_load(random_objects(rng, matrix.n_rows, matrix.n_cols,
                                    n_objects),
                     capacity=100, n_rows=matrix.n_rows, n_cols=matrix.n_cols)
    base = K2Raster.build(matrix, cfg, backend=backends[0])
    rasters = {backends[0]: base}
    for b in backends[1:]:
        rasters[b] = base.with_backend(b)
    plain = PlainRaster(matrix.values)
    index_bytes = base.serialized_bytes()

    vmin, vmax = base.rmin, base.rmax
    ranges = random_ranges(rng, vmin, vmax, n_queries)
    records: list[BenchRecord] = []

    for qi, (lo, hi) in enumerate(ranges):
        params = {"lo": lo, "hi": hi, "q": qi}
        if "k2" in engines:
            for b in backends:
                res, dt, visits = _run_join_k2(rasters[b], tree, lo, hi)
                records.append(BenchRecord(
                    scenario, name, matrix.n_rows, seed, "join", params,
                    "k2", b, dt, visits, 0,
                    len(res.definitive) + len(res.probable), index_bytes))
        if "plain-mbrs" in engines:
            res, dt, cells = _run_join_plain(plain, tree, lo, hi)
            records.append(BenchRecord(
                scenario, name, matrix.n_rows, seed, "join", params,
                "plain-mbrs", "-", dt, 0, cells,
                len(res.definitive) + len(res.probable),
                plain.plain_bits_bytes()))

    for direction in ("highest", "lowest"):
        params = {"k": topk_k, "direction": direction}
        if "k2" in engines:
            for b in backends:
                r = rasters[b]
                r.reset_node_count()
                t0 = time.perf_counter()
                res = top_k(tree, r, topk_k, direction)
                dt = time.perf_counter() - t0
                records.append(BenchRecord(
                    scenario, name, matrix.n_rows, seed, "topk", params,
                    "k2", b, dt, r.node_count_visited(), 0,
                    len(res.entries), index_bytes))
        if "plain-mbrs" in engines:
            plain.reset_cell_count()
            t0 = time.perf_counter()
            res = baseline_topk_mbrs(plain, tree, topk_k, direction)
            dt = time.perf_counter() - t0
            records.append(BenchRecord(
                scenario, name, matrix.n_rows, seed, "topk", params,
                "plain-mbrs", "-", dt, 0, plain.cells_inspected,
                len(res.entries), plain.plain_bits_bytes()))
    return records


def run_scenario_i(sizes: list[int], seed: int = 20240601, n_queries: int = 10,
                   n_objects: int = 200, engines=("k2", "plain-mbrs"),
                   backends: Optional[list[str]] = None,
                   cfg: K2Config = DEFAULT_CONFIG,
                   span: int = 1023) -> list[BenchRecord]:
    """Raster-size family: plasma rasters of growing side."""
    backends = backends or available_backends()
    records = []
    for i, size in enumerate(sizes):
        matrix = synth_raster("plasma", seed + i, size, size, span)
        records += _dataset_records("I", f"plasma-{size}", matrix, seed + i,
                                    n_queries, n_objects, list(engines),
                                    list(backends), cfg)
    return records


def run_scenario_ii(digits: list[int], size: int = 512, seed: int = 20240602,
                    n_queries: int = 10, n_objects: int = 200,
                    engines=("k2", "plain-mbrs"),
                    backends: Optional[list[str]] = None,
                    cfg: K2Config = DEFAULT_CONFIG) -> list[BenchRecord]:
    """Value-distribution family: same extent, distinct values grow with the
    number of preserved decimal digits."""
    backends = backends or available_backends()
    rng = np.random.default_rng(seed)
    # smooth field in [0,1] plus sub-decimal noise so deeper digits matter
    smooth = _unit_plasma(seed, size) + rng.normal(0, 0.01, (size, size))
    records = []
    for d in digits:
        values = quantize(smooth * 500.0, d)
        matrix = RasterMatrix.from_array(values)
        records += _dataset_records("II", f"digits-{d}", matrix, seed + d,
                                    n_queries, n_objects, list(engines),
                                    list(backends), cfg)
    return records


def _unit_plasma(seed: int, size: int) -> np.ndarray:
    m = synth_raster("plasma", seed, size, size, 10**6)
    return np.asarray(m.values, dtype=np.float64) / 10**6


def run_uniformity(fractions: list[float], size: int = 512,
                   seed: int = 20240603, n_queries: int = 10,
                   n_objects: int = 200, engines=("k2", "plain-mbrs"),
                   backends: Optional[list[str]] = None,
                   cfg: K2Config = DEFAULT_CONFIG) -> list[BenchRecord]:
    """Controlled-uniformity family at a fixed size."""
    backends = backends or available_backends()
    records = []
    for frac in fractions:
        matrix = uniformity_matrix(size, frac, seed)
        records += _dataset_records("uniformity", f"uniform-{frac:g}",
                                    matrix, seed, n_queries, n_objects,
                                    list(engines), list(backends), cfg)
    return records


def pruning_summary(records: list[BenchRecord]) -> dict[str, dict]:
    """Per-dataset join totals of k2 node visits vs plain cell inspections."""
    out: dict[str, dict] = {}
    for rec in records:
        if rec.query != "join":
            continue
        d = out.setdefault(rec.dataset, {"k2_visits": 0, "plain_cells": 0,
                                         "per_query": []})
        if rec.engine == "k2" and rec.backend != "python":
            d["k2_visits"] += rec.node_visits
            d["per_query"].append(("k2", rec.params["q"], rec.node_visits))
        elif rec.engine == "plain-mbrs":
            d["plain_cells"] += rec.cells_inspected
            d["per_query"].append(("plain", rec.params["q"],
                                   rec.cells_inspected))
    for d in out.values():
        if d["plain_cells"]:
            d["ratio"] = d["k2_visits"] / d["plain_cells"]
    return out


def backend_summary(records: list[BenchRecord]) -> dict[str, dict]:
    """Mean k2 query time per kernel backend, per query type."""
    acc: dict = {}
    for rec in records:
        if rec.engine != "k2":
            continue
        d = acc.setdefault(rec.query, {}).setdefault(
            rec.backend, {"time": 0.0, "n": 0})
        d["time"] += rec.wall_time_s
        d["n"] += 1
    out: dict[str, dict] = {}
    for query, backends in acc.items():
        out[query] = {b: d["time"] / d["n"] for b, d in backends.items()}
        if "native" in out[query] and "python" in out[query] \
                and out[query]["native"] > 0:
            out[query]["python_over_native"] = (
                out[query]["python"] / out[query]["native"])
    return out


def write_report(records: list[BenchRecord], jsonl_path,
                 csv_path=None) -> None:
    with open(jsonl_path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec.row(), sort_keys=True) + "\n")
    if csv_path:
        with open(csv_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(records[0].row()))
            writer.writeheader()
            for rec in records:
                writer.writerow(rec.row())
