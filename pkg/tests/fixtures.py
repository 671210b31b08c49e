"""Shared test fixtures: canned rasters, random instances, the worked 8x8
example with its hand-built R-tree."""

from __future__ import annotations

import numpy as np

from rastvec.ingest import synth_raster
from rastvec.k2raster import K2Config, K2Raster, RasterMatrix
from rastvec.rtree import MBR, RTree, RTreeNode, VectorDataset, bulk_load

K2_CFG = K2Config(n1=3, k1=2, k2=2)          # k=2 at every level for 8x8
SMALL_CFG = K2Config(n1=2, k1=2, k2=2)


def uniform7(side: int = 4) -> tuple[RasterMatrix, K2Raster]:
    m = RasterMatrix.from_array(np.full((side, side), 7))
    return m, K2Raster.build(m, K2_CFG)


def gradient8() -> tuple[RasterMatrix, K2Raster]:
    v = np.add.outer(np.arange(8), np.arange(8))
    m = RasterMatrix.from_array(v)
    return m, K2Raster.build(m, K2_CFG)


def random_matrix(rng: np.random.Generator, max_side: int = 64,
                  allow_negative: bool = True) -> RasterMatrix:
    """Random raster mixing the synth kinds, sizes and value spans."""
    n_rows = int(rng.integers(1, max_side + 1))
    n_cols = int(rng.integers(1, max_side + 1))
    kind = rng.choice(["uniform", "gradient", "plasma", "random"])
    span = int(rng.integers(0, 40))
    m = synth_raster(str(kind), int(rng.integers(0, 2**31)), n_rows, n_cols,
                     span)
    if allow_negative and rng.random() < 0.25:
        m = RasterMatrix.from_array(m.values - int(rng.integers(1, 30)))
    return m


def random_instance(rng: np.random.Generator, max_side: int = 64,
                    max_objects: int = 50):
    """(matrix, raster, tree, lo, hi) with in-extent random objects."""
    m = random_matrix(rng, max_side)
    raster = K2Raster.build(m, SMALL_CFG if rng.random() < 0.5 else K2_CFG)
    n_obj = int(rng.integers(1, max_objects + 1))
    objs = []
    for oid in range(1, n_obj + 1):
        r0 = int(rng.integers(0, m.n_rows))
        c0 = int(rng.integers(0, m.n_cols))
        r1 = int(rng.integers(r0, m.n_rows))
        c1 = int(rng.integers(c0, m.n_cols))
        objs.append((oid, MBR(r0, c0, r1, c1)))
    tree = bulk_load(VectorDataset(objs), capacity=int(rng.integers(2, 17)),
                     n_rows=m.n_rows, n_cols=m.n_cols)
    vmin, vmax = int(m.values.min()), int(m.values.max())
    lo, hi = sorted(int(x) for x in rng.integers(vmin - 2, vmax + 3, 2))
    return m, raster, tree, lo, hi


# ---------------------------------------------------------------------------
# Worked example: an 8x8 raster satisfying the published walkthrough
# constraints (root [1,5], one first-level quadrant [1,3], a uniform value-5
# quadrant) plus the matching three-branch R-tree. Object ids: a..f = 1..6.

WORKED_MATRIX = np.array([
    [2, 2, 3, 3, 1, 1, 2, 2],
    [2, 2, 3, 3, 1, 1, 2, 2],
    [2, 3, 3, 2, 2, 2, 3, 3],
    [2, 2, 2, 2, 2, 2, 3, 3],
    [1, 2, 3, 3, 2, 2, 4, 2],
    [4, 4, 3, 3, 2, 2, 3, 2],
    [4, 4, 2, 2, 1, 1, 5, 5],
    [2, 2, 2, 5, 1, 1, 5, 5],
], dtype=np.int64)

OBJ = {"a": 1, "b": 2, "c": 3, "d": 4, "e": 5, "f": 6}

LEAF_MBRS = {
    "m11": MBR(0, 4, 1, 5),
    "m12": MBR(2, 6, 3, 7),
    "m21": MBR(4, 2, 5, 3),
    "m22": MBR(5, 0, 6, 1),
    "m31": MBR(4, 5, 5, 6),
    "m32": MBR(6, 6, 7, 7),
}


def worked_example() -> tuple[K2Raster, RTree, dict[str, int]]:
    raster = K2Raster.build(RasterMatrix.from_array(WORKED_MATRIX), K2_CFG)

    leaves = {name: RTreeNode(mbr, [OBJ[obj]], True)
              for (name, mbr), obj in zip(LEAF_MBRS.items(), "abcdef")}
    m1 = RTreeNode(MBR.union([LEAF_MBRS["m11"], LEAF_MBRS["m12"]]),
                   [leaves["m11"], leaves["m12"]], False)
    m2 = RTreeNode(MBR.union([LEAF_MBRS["m21"], LEAF_MBRS["m22"]]),
                   [leaves["m21"], leaves["m22"]], False)
    m3 = RTreeNode(MBR.union([LEAF_MBRS["m31"], LEAF_MBRS["m32"]]),
                   [leaves["m31"], leaves["m32"]], False)
    root = RTreeNode(MBR.union([m1.mbr, m2.mbr, m3.mbr]), [m1, m2, m3], False)
    objects = {OBJ[obj]: LEAF_MBRS[name]
               for name, obj in zip(LEAF_MBRS, "abcdef")}
    tree = RTree(root, objects, capacity=4, n_rows=8, n_cols=8)

    node_names = {tree.root.node_id: "root", m1.node_id: "M1",
                  m2.node_id: "M2", m3.node_id: "M3"}
    for name, leaf in leaves.items():
        node_names[leaf.node_id] = name
    return raster, tree, node_names
