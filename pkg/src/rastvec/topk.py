"""Top-K highest/lowest-value object retrieval via synchronized traversal.

A priority queue mixes tentative entries (an R-tree node paired with the
deepest raster quadrant containing its MBR, keyed by that quadrant's max —
an upper bound) and confirmed entries (an object id with its true extreme
value). Popping always takes the best bound, so confirmed values can be
emitted the moment they reach the head. Uniform quadrants short-circuit:
every object beneath them overlaps cells of exactly the quadrant value.

The lowest variant runs the same code path with min values as (lower)
bounds and the queue order reversed; no negated raster is materialized.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .k2raster import K2Raster, NodeCursor
from .rtree import MBR, RTree, RTreeNode


@dataclass
class TopKEntry:
    """Priority-queue record: tentative node bound or confirmed object value."""

    vect: object                 # RTreeNode if tentative, object id otherwise
    pk: Optional[NodeCursor]
    value: int
    tent: bool


@dataclass
class TopKResult:
    entries: list[tuple[int, int]] = field(default_factory=list)  # (oid, value)

    def ids(self) -> list[int]:
        return [oid for oid, _ in self.entries]

    def values(self) -> list[int]:
        return [v for _, v in self.entries]


@dataclass
class TopKTraceEvent:
    op: str                      # "push" or "pop"
    vect: int                    # node id (tentative) or object id (confirmed)
    tent: bool
    value: int
    pk_quad: Optional[tuple[int, int, int]]
    action: str = ""


def _clip(mbr: MBR, raster: K2Raster) -> Optional[tuple[int, int, int, int]]:
    r0, c0 = max(mbr.row_lo, 0), max(mbr.col_lo, 0)
    r1 = min(mbr.row_hi, raster.n_rows - 1)
    c1 = min(mbr.col_hi, raster.n_cols - 1)
    if r0 > r1 or c0 > c1:
        return None
    return r0, c0, r1, c1


def check_quadrant_t(raster: K2Raster, pk: NodeCursor, window,
                     want_max: bool = True) -> tuple[int, NodeCursor]:
    """Deepest quadrant containing the window, and its bound value.

    The bound is the quadrant max (highest variant) or min (lowest variant):
    an optimistic bound on the true extreme under the window.
    """
    r0, c0, r1, c1 = window
    while True:
        child = raster.child_containing(pk, r0, c0, r1, c1)
        if child is None:
            return (pk.max if want_max else pk.min), pk
        pk = child


def check_geometry(raster: K2Raster, tree: RTree, leaf: RTreeNode,
                   pk: NodeCursor, want_max: bool = True,
                   stats: Optional[dict] = None) -> list[tuple[int, int]]:
    """True extreme value per object of the leaf, over that object's own MBR.

    Objects with no raster overlap are omitted (and counted in stats).
    """
    out = []
    for oid in sorted(leaf.refs):
        window = _clip(tree.object_mbr(oid), raster)
        if window is None:
            if stats is not None:
                stats["skipped_empty_objects"] = stats.get(
                    "skipped_empty_objects", 0) + 1
            continue
        out.append((oid, raster.window_extreme(pk, window, want_max)))
    return out


def _descendant_object_ids(tree: RTree, raster: K2Raster,
                           node: RTreeNode) -> list[int]:
    out = []

    def walk(n: RTreeNode):
        if n.is_leaf:
            for oid in n.refs:
                if _clip(tree.object_mbr(oid), raster) is not None:
                    out.append(oid)
        else:
            for child in n.refs:
                walk(child)

    walk(node)
    return sorted(out)


def top_k(tree: RTree, raster: K2Raster, k: int, direction: str = "highest",
          stats: Optional[dict] = None,
          trace: Optional[list] = None) -> TopKResult:
    """K objects overlapping the highest (or lowest) raster values."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if direction not in ("highest", "lowest"):
        raise ValueError(f"direction must be 'highest' or 'lowest', "
                         f"got {direction!r}")
    want_max = direction == "highest"
    sign = -1 if want_max else 1

    result: list[tuple[int, int]] = []
    heap: list = []  # (sign*value, tent flag, id, TopKEntry)

    def push(entry: TopKEntry):
        tie_id = entry.vect.node_id if entry.tent else entry.vect
        heapq.heappush(heap, (sign * entry.value, int(entry.tent), tie_id, entry))
        if stats is not None:
            stats["queue_pushes"] = stats.get("queue_pushes", 0) + 1
        if trace is not None:
            quad = entry.pk.quad if entry.pk is not None else None
            trace.append(TopKTraceEvent("push", tie_id, entry.tent,
                                        entry.value, quad))

    def push_node(pr: RTreeNode, pk: NodeCursor):
        window = _clip(pr.mbr, raster)
        if window is None:
            return
        bound, pk_deep = check_quadrant_t(raster, pk, window, want_max)
        push(TopKEntry(pr, pk_deep, bound, True))

    root_pk = raster.root_cursor()
    seeds = [tree.root] if tree.root.is_leaf else tree.root.refs
    for pr in seeds:
        push_node(pr, root_pk)

    while heap and len(result) < k:
        _, _, tie_id, entry = heapq.heappop(heap)
        event = None
        if trace is not None:
            quad = entry.pk.quad if entry.pk is not None else None
            event = TopKTraceEvent("pop", tie_id, entry.tent, entry.value, quad)
            trace.append(event)
        if not entry.tent:
            result.append((entry.vect, entry.value))
            if event:
                event.action = "emit-confirmed"
            continue
        pr: RTreeNode = entry.vect
        pk = entry.pk
        if pk.min == pk.max:
            # uniform quadrant: every object below overlaps cells of this value
            if event:
                event.action = "uniform-add-descendants"
            for oid in _descendant_object_ids(tree, raster, pr):
                result.append((oid, entry.value))
                if len(result) == k:
                    break
        elif pr.is_leaf:
            if event:
                event.action = "check-geometry"
            if stats is not None:
                stats["check_geometry_calls"] = stats.get(
                    "check_geometry_calls", 0) + 1
            for oid, value in check_geometry(raster, tree, pr, pk, want_max,
                                             stats):
                if value == entry.value:
                    result.append((oid, value))
                    if len(result) == k:
                        break
                else:
                    push(TopKEntry(oid, None, value, False))
        else:
            if event:
                event.action = "push-children"
            for child in pr.refs:
                push_node(child, pk)

    return TopKResult(result)
