"""Command-line front end: build indexes, run queries, run benchmarks.

Results go to stdout (or --out); diagnostics and optional --stats JSON go to
stderr. Every command exits nonzero on contract violations.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench as bench_mod
from .baseline import (PlainRaster, baseline_join_cells, baseline_join_mbrs,
                       baseline_topk_cells, baseline_topk_mbrs)
from .ingest import (GridTransform, parse_ascii_grid, parse_mbr_csv,
                     synth_raster)
from .join import join
from .k2raster import K2Config, K2Raster
from .kernels import available_backends
from .rtree import RTree, bulk_load
from .topk import top_k


def _config_from_args(args) -> K2Config:
    return K2Config(n1=args.n1, k1=args.k1, k2=args.k2,
                    dacs_max_levels=args.dacs_levels)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n1", type=int, default=4)
    p.add_argument("--k1", type=int, default=4)
    p.add_argument("--k2", type=int, default=2)
    p.add_argument("--dacs-levels", type=int, default=3)


def cmd_build_raster(args) -> int:
    if args.grid:
        matrix = parse_ascii_grid(args.grid, digits=args.digits)
    elif args.synth:
        matrix = synth_raster(args.synth, args.seed, args.rows, args.cols,
                              args.span)
    else:
        raise ValueError("provide --grid or --synth")
    raster = K2Raster.build(matrix, _config_from_args(args))
    raster.save(args.out)
    if matrix.nodata_mask is not None:
        np.save(str(args.out) + ".mask.npy", matrix.nodata_mask)
        print(f"nodata mask written to {args.out}.mask.npy", file=sys.stderr)

    plain = PlainRaster(matrix.values)
    k2_bytes = raster.serialized_bytes()
    ints_bytes = plain.plain_ints_bytes()
    bits_bytes = plain.plain_bits_bytes()
    print(f"raster {matrix.n_rows}x{matrix.n_cols} "
          f"values [{raster.rmin}, {raster.rmax}] "
          f"distinct {plain.n_distinct()}")
    print(f"k2-raster bytes   {k2_bytes}")
    print(f"plain-ints bytes  {ints_bytes}  (ratio {k2_bytes / ints_bytes:.4f})")
    print(f"plain-bits bytes  {bits_bytes}  (ratio {k2_bytes / bits_bytes:.4f})")
    return 0


def cmd_build_rtree(args) -> int:
    transform = None
    if args.transform:
        ox, oy, cell = (float(x) for x in args.transform.split(","))
        transform = GridTransform(ox, oy, cell)
    dataset = parse_mbr_csv(args.csv, transform=transform,
                            extent=(args.rows, args.cols))
    if not dataset.objects:
        raise ValueError("no objects remain after clipping to the extent")
    tree = bulk_load(dataset, capacity=args.capacity,
                     n_rows=args.rows, n_cols=args.cols)
    tree.save(args.out)
    print(f"objects {len(dataset)}  leaves {len(tree.leaf_mbrs())}  "
          f"levels {tree.height}  nodes {tree.n_nodes}")
    return 0


def _load_pair(args) -> tuple[K2Raster, RTree]:
    raster = K2Raster.load(args.raster, backend=args.backend)
    tree = RTree.load(args.rtree)
    if (tree.n_rows, tree.n_cols) != (raster.n_rows, raster.n_cols):
        raise ValueError(
            f"extent mismatch: raster is {raster.n_rows}x{raster.n_cols}, "
            f"r-tree was built for {tree.n_rows}x{tree.n_cols}")
    return raster, tree


def _out_stream(args):
    return open(args.out, "w") if args.out else sys.stdout


def cmd_join(args) -> int:
    raster, tree = _load_pair(args)
    stats: dict = {"engine": args.engine, "backend": raster.backend}
    if args.engine == "k2":
        raster.reset_node_count()
        result = join(tree, raster, args.lo, args.hi)
        stats["node_visits"] = raster.node_count_visited()
    else:
        plain = PlainRaster(raster.to_matrix())
        fn = baseline_join_mbrs if args.engine == "plain-mbrs" else baseline_join_cells
        result = fn(plain, tree, args.lo, args.hi)
        stats["cells_inspected"] = plain.cells_inspected
    stats["definitive"] = len(result.definitive)
    stats["probable"] = len(result.probable)

    out = _out_stream(args)
    try:
        for tag, tuples in (("D", result.definitive), ("P", result.probable)):
            for oid, cells in tuples:
                coords = " ".join(f"{r},{c}" for r, c in cells)
                print(f"{tag} {oid} {cells.shape[0]} {coords}".rstrip(),
                      file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.stats:
        print(json.dumps(stats, sort_keys=True), file=sys.stderr)
    return 0


def cmd_topk(args) -> int:
    raster, tree = _load_pair(args)
    direction = "lowest" if args.lowest else "highest"
    stats: dict = {"engine": args.engine, "backend": raster.backend,
                   "direction": direction}
    if args.engine == "k2":
        raster.reset_node_count()
        result = top_k(tree, raster, args.k, direction, stats=stats)
        stats["node_visits"] = raster.node_count_visited()
    else:
        plain = PlainRaster(raster.to_matrix())
        fn = baseline_topk_mbrs if args.engine == "plain-mbrs" else baseline_topk_cells
        result = fn(plain, tree, args.k, direction)
        stats["cells_inspected"] = plain.cells_inspected
    stats["returned"] = len(result.entries)

    out = _out_stream(args)
    try:
        for rank, (oid, value) in enumerate(result.entries, start=1):
            print(f"{rank} {oid} {value}", file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.stats:
        print(json.dumps(stats, sort_keys=True), file=sys.stderr)
    return 0


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def cmd_bench(args) -> int:
    engines = [e for e in args.engines.split(",") if e]
    backends = [b for b in args.backends.split(",") if b] \
        if args.backends else available_backends()
    common = dict(seed=args.seed, n_queries=args.queries,
                  n_objects=args.objects, engines=engines, backends=backends)
    if args.scenario == "I":
        records = bench_mod.run_scenario_i(_csv_ints(args.sizes), **common)
    elif args.scenario == "II":
        records = bench_mod.run_scenario_ii(_csv_ints(args.digits),
                                            size=args.size, **common)
    else:
        fractions = [float(x) for x in args.fractions.split(",") if x]
        records = bench_mod.run_uniformity(fractions, size=args.size, **common)
    bench_mod.write_report(records, args.out, args.csv)
    summary = bench_mod.pruning_summary(records)
    for dataset, info in sorted(summary.items()):
        if "ratio" in info:
            print(f"{dataset}: k2 visits {info['k2_visits']} vs plain cells "
                  f"{info['plain_cells']} (ratio {info['ratio']:.4f})")
    for query, times in sorted(bench_mod.backend_summary(records).items()):
        parts = [f"{b}={t * 1000:.2f}ms" for b, t in sorted(times.items())
                 if b in ("native", "python")]
        line = f"k2 {query} mean: " + " ".join(parts)
        if "python_over_native" in times:
            line += f" (python/native = {times['python_over_native']:.1f}x)"
        print(line)
    print(f"{len(records)} records -> {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rastvec",
        description="Raster/vector spatial queries over compressed rasters")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-raster", help="build a compressed raster index")
    p.add_argument("--grid", help="ESRI-ASCII grid file")
    p.add_argument("--digits", type=int, default=0,
                   help="decimal digits kept when quantizing grid values")
    p.add_argument("--synth", choices=["uniform", "gradient", "plasma",
                                       "random"])
    p.add_argument("--rows", type=int, default=256)
    p.add_argument("--cols", type=int, default=256)
    p.add_argument("--span", type=int, default=1023)
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_raster)

    p = sub.add_parser("build-rtree", help="bulk-load an R-tree from MBR CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--capacity", type=int, default=100)
    p.add_argument("--transform",
                   help="origin_x,origin_y,cell_size for world-coordinate CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_rtree)

    for name in ("join", "topk"):
        p = sub.add_parser(name)
        p.add_argument("--raster", required=True)
        p.add_argument("--rtree", required=True)
        p.add_argument("--engine", default="k2",
                       choices=["k2", "plain-mbrs", "plain-cells"])
        p.add_argument("--backend", default="auto",
                       choices=["auto", "native", "python"])
        p.add_argument("--out")
        p.add_argument("--stats", action="store_true")
        if name == "join":
            p.add_argument("--lo", type=int, required=True)
            p.add_argument("--hi", type=int, required=True)
            p.set_defaults(fn=cmd_join)
        else:
            p.add_argument("-k", "--k", type=int, required=True)
            p.add_argument("--lowest", action="store_true")
            p.set_defaults(fn=cmd_topk)

    p = sub.add_parser("bench", help="run synthetic scenario benchmarks")
    p.add_argument("--scenario", required=True,
                   choices=["I", "II", "uniformity"])
    p.add_argument("--sizes", default="256,512,1024")
    p.add_argument("--digits", default="0,1,2,3")
    p.add_argument("--fractions", default="0,0.25,0.5,0.75")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--objects", type=int, default=200)
    p.add_argument("--engines", default="k2,plain-mbrs")
    p.add_argument("--backends", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
