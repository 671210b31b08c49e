"""Range-constrained spatial join between an R-tree and a compressed raster.

The filter step walks both trees in sync from a stack of (R-tree node,
raster node) pairs. A cheap quadrant check first descends the raster to the
deepest quadrant containing the node's MBR and classifies it from min/max
alone; only when that is inconclusive on a leaf does the precise per-window
check run. Results split into definitive tuples (every overlapped cell in
range) and probable tuples (some cells in range), each carrying the in-range
cells of the object's leaf MBR clipped to the raster extent. Output order is
canonical: tuples sorted by object id, cells ascending (row, col).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from .k2raster import K2Raster, NodeCursor
from .rtree import MBR, RTree, RTreeNode


class QuadOverlap(IntEnum):
    NO_OVERLAP = 0
    POSSIBLE_OVERLAP = 1
    TOTAL_OVERLAP = 2


class MbrOverlap(IntEnum):
    NO_OVERLAP = 0
    PARTIAL_OVERLAP = 1
    TOTAL_OVERLAP = 2


@dataclass
class JoinResult:
    """Definitive and probable (object id, in-range cells) tuples."""

    definitive: list[tuple[int, np.ndarray]] = field(default_factory=list)
    probable: list[tuple[int, np.ndarray]] = field(default_factory=list)

    def canonical(self) -> "JoinResult":
        return JoinResult(sorted(self.definitive, key=lambda t: t[0]),
                          sorted(self.probable, key=lambda t: t[0]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, JoinResult):
            return NotImplemented
        for mine, theirs in ((self.definitive, other.definitive),
                             (self.probable, other.probable)):
            if len(mine) != len(theirs):
                return False
            for (oid_a, cells_a), (oid_b, cells_b) in zip(mine, theirs):
                if oid_a != oid_b or not np.array_equal(cells_a, cells_b):
                    return False
        return True


@dataclass
class JoinTraceEvent:
    """One processed stack pair, for walkthrough tests and --stats output."""

    node_id: int
    quad_kind: QuadOverlap
    pk_deep_quad: tuple[int, int, int]
    action: str
    mbr_kind: Optional[MbrOverlap] = None


def _clip(mbr: MBR, raster: K2Raster) -> Optional[tuple[int, int, int, int]]:
    r0, c0 = max(mbr.row_lo, 0), max(mbr.col_lo, 0)
    r1 = min(mbr.row_hi, raster.n_rows - 1)
    c1 = min(mbr.col_hi, raster.n_cols - 1)
    if r0 > r1 or c0 > c1:
        return None
    return r0, c0, r1, c1


def check_quadrant_j(raster: K2Raster, pk: NodeCursor, window, lo: int,
                     hi: int) -> tuple[QuadOverlap, NodeCursor]:
    """Descend to the deepest quadrant containing the window and classify it.

    Descends through the unique containing child while the node's [min, max]
    intersects the query range; stops early once containment inside the range
    makes TotalOverlap decidable.
    """
    r0, c0, r1, c1 = window
    while True:
        if pk.max < lo or pk.min > hi:
            return QuadOverlap.NO_OVERLAP, pk
        if lo <= pk.min and pk.max <= hi:
            return QuadOverlap.TOTAL_OVERLAP, pk
        child = raster.child_containing(pk, r0, c0, r1, c1)
        if child is None:
            return QuadOverlap.POSSIBLE_OVERLAP, pk
        pk = child


def check_mbr(raster: K2Raster, pk: NodeCursor, window, lo: int,
              hi: int) -> MbrOverlap:
    """Exact classification of the window cells against [lo, hi]."""
    return MbrOverlap(raster.classify_window(pk, window, lo, hi))


def extract_cells(raster: K2Raster, pk: NodeCursor, window, lo: int,
                  hi: int) -> np.ndarray:
    """In-range window cells, ascending (row, col), as an (N, 2) array."""
    return raster.extract_window(pk, window, lo, hi)


def _add_result(leaf: RTreeNode, cells: np.ndarray, out: list) -> None:
    for oid in sorted(leaf.refs):
        out.append((oid, cells))


def add_descendants_leaves_join(raster: K2Raster, pr: RTreeNode,
                                pk_deep: NodeCursor, lo: int, hi: int,
                                out: list) -> None:
    """Append every leaf under pr to the definitive list with its cells."""
    if pr.is_leaf:
        window = _clip(pr.mbr, raster)
        if window is not None:
            _add_result(pr, extract_cells(raster, pk_deep, window, lo, hi), out)
        return
    for child in pr.refs:
        add_descendants_leaves_join(raster, child, pk_deep, lo, hi, out)


def join(tree: RTree, raster: K2Raster, lo: int, hi: int,
         trace: Optional[list] = None) -> JoinResult:
    """Filter step of the raster/vector join for the value range [lo, hi]."""
    if lo > hi:
        raise ValueError(f"invalid value range [{lo}, {hi}]")

    definitive: list[tuple[int, np.ndarray]] = []
    probable: list[tuple[int, np.ndarray]] = []
    root_pk = raster.root_cursor()

    stack: list[tuple[RTreeNode, NodeCursor]] = []
    seeds = [tree.root] if tree.root.is_leaf else tree.root.refs
    for pr in reversed(seeds):
        stack.append((pr, root_pk))

    while stack:
        pr, pk = stack.pop()
        window = _clip(pr.mbr, raster)
        if window is None:
            continue
        quad_kind, pk_deep = check_quadrant_j(raster, pk, window, lo, hi)
        action = "prune"
        mbr_kind = None
        if quad_kind is QuadOverlap.TOTAL_OVERLAP:
            action = "definitive-quadrant"
            if pr.is_leaf:
                _add_result(pr, extract_cells(raster, pk_deep, window, lo, hi),
                            definitive)
            else:
                add_descendants_leaves_join(raster, pr, pk_deep, lo, hi,
                                            definitive)
        elif quad_kind is QuadOverlap.POSSIBLE_OVERLAP:
            if not pr.is_leaf:
                action = "push-children"
                for child in reversed(pr.refs):
                    stack.append((child, pk_deep))
            else:
                mbr_kind = check_mbr(raster, pk_deep, window, lo, hi)
                if mbr_kind is MbrOverlap.TOTAL_OVERLAP:
                    action = "definitive-mbr"
                    _add_result(pr, extract_cells(raster, pk_deep, window,
                                                  lo, hi), definitive)
                elif mbr_kind is MbrOverlap.PARTIAL_OVERLAP:
                    action = "probable-mbr"
                    _add_result(pr, extract_cells(raster, pk_deep, window,
                                                  lo, hi), probable)
                else:
                    action = "prune-mbr"
        if trace is not None:
            trace.append(JoinTraceEvent(pr.node_id, quad_kind, pk_deep.quad,
                                        action, mbr_kind))

    return JoinResult(definitive, probable).canonical()
