"""MBR hierarchy over vector objects, bulk loaded with Sort-Tile-Recursive.

Objects are axis-aligned boxes in raster cell coordinates (inclusive
bounds); in the simplified model used throughout, an object *is* its MBR.
Leaves hold object ids, internal nodes hold children; every node's MBR is
the tight union of what it contains. Nodes carry a preorder id used for
deterministic tie-breaking in queries. The tree is immutable after loading.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable

_MAGIC = b"RTRE"
_VERSION = 1


@dataclass(frozen=True)
class MBR:
    """Inclusive cell-index bounds."""

    row_lo: int
    col_lo: int
    row_hi: int
    col_hi: int

    def __post_init__(self):
        if self.row_lo > self.row_hi or self.col_lo > self.col_hi:
            raise ValueError(f"inverted MBR bounds {self}")

    def contains_point(self, row: int, col: int) -> bool:
        return (self.row_lo <= row <= self.row_hi
                and self.col_lo <= col <= self.col_hi)

    def intersects(self, other: "MBR") -> bool:
        return (self.row_lo <= other.row_hi and other.row_lo <= self.row_hi
                and self.col_lo <= other.col_hi and other.col_lo <= self.col_hi)

    def center(self) -> tuple[float, float]:
        return ((self.row_lo + self.row_hi) / 2, (self.col_lo + self.col_hi) / 2)

    def area(self) -> int:
        return (self.row_hi - self.row_lo + 1) * (self.col_hi - self.col_lo + 1)

    @staticmethod
    def union(boxes: Iterable["MBR"]) -> "MBR":
        boxes = list(boxes)
        return MBR(min(b.row_lo for b in boxes), min(b.col_lo for b in boxes),
                   max(b.row_hi for b in boxes), max(b.col_hi for b in boxes))


@dataclass
class RTreeNode:
    mbr: MBR
    refs: list           # child RTreeNode list, or object-id list at leaves
    is_leaf: bool
    node_id: int = -1    # preorder index, assigned after packing


@dataclass
class VectorDataset:
    """Vector objects as (id, MBR) pairs; ids must be unique."""

    objects: list[tuple[int, MBR]]

    def __post_init__(self):
        ids = [oid for oid, _ in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")

    def __len__(self) -> int:
        return len(self.objects)

    def id_map(self) -> dict[int, MBR]:
        return dict(self.objects)


def _runs(items: list, run_len: int) -> list[list]:
    return [items[i:i + run_len] for i in range(0, len(items), run_len)]


def _tiles(items: list, capacity: int) -> list[list]:
    """Capacity-sized runs; the tail is rebalanced with its neighbour when it
    would fall under the minimum fill."""
    tiles = _runs(items, capacity)
    min_fill = -(-capacity * 2 // 5)
    if len(tiles) >= 2 and len(tiles[-1]) < min_fill:
        merged = tiles[-2] + tiles[-1]
        half = -(-len(merged) // 2)
        tiles[-2:] = [merged[:half], merged[half:]]
    return tiles


def _str_pack(entries: list[tuple[MBR, object]], capacity: int) -> list[list]:
    """One Sort-Tile-Recursive packing round; entries are (mbr, payload)."""
    n = len(entries)
    pages = -(-n // capacity)
    if pages == 1:
        return [entries]
    slabs = math.ceil(math.sqrt(pages))
    by_col = sorted(entries, key=lambda e: (e[0].center()[1], e[0].center()[0]))
    groups: list[list] = []
    for slab in _runs(by_col, slabs * capacity):
        by_row = sorted(slab, key=lambda e: (e[0].center()[0], e[0].center()[1]))
        groups.extend(_tiles(by_row, capacity))
    return groups


class RTree:
    """Packed R-tree plus the object-id -> MBR table behind its leaves."""

    def __init__(self, root: RTreeNode, objects: dict[int, MBR],
                 capacity: int, n_rows: int = 0, n_cols: int = 0):
        self.root = root
        self.objects = objects
        self.capacity = capacity
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.n_nodes = self._assign_ids(root, 0)

    def _assign_ids(self, node: RTreeNode, next_id: int) -> int:
        node.node_id = next_id
        next_id += 1
        if not node.is_leaf:
            for child in node.refs:
                next_id = self._assign_ids(child, next_id)
        return next_id

    def object_mbr(self, oid: int) -> MBR:
        return self.objects[oid]

    @property
    def height(self) -> int:
        h, node = 1, self.root
        while not node.is_leaf:
            node = node.refs[0]
            h += 1
        return h

    def leaf_mbrs(self) -> list[tuple[RTreeNode, list[int]]]:
        """All leaves in preorder with their object ids."""
        out = []

        def walk(node: RTreeNode):
            if node.is_leaf:
                out.append((node, list(node.refs)))
            else:
                for child in node.refs:
                    walk(child)

        walk(self.root)
        return out

    def point_query(self, row: int, col: int) -> list[int]:
        """Ids of objects whose own MBR contains the cell."""
        out = []

        def walk(node: RTreeNode):
            if not node.mbr.contains_point(row, col):
                return
            if node.is_leaf:
                for oid in node.refs:
                    if self.objects[oid].contains_point(row, col):
                        out.append(oid)
            else:
                for child in node.refs:
                    walk(child)

        walk(self.root)
        return sorted(out)

    def leaves_at_point(self, row: int, col: int) -> list[RTreeNode]:
        """Leaves whose MBR contains the cell."""
        out = []

        def walk(node: RTreeNode):
            if not node.mbr.contains_point(row, col):
                return
            if node.is_leaf:
                out.append(node)
            else:
                for child in node.refs:
                    walk(child)

        walk(self.root)
        return out

    def window_query(self, window: MBR) -> list[int]:
        """Ids of objects whose own MBR intersects the window."""
        out = []

        def walk(node: RTreeNode):
            if not node.mbr.intersects(window):
                return
            if node.is_leaf:
                for oid in node.refs:
                    if self.objects[oid].intersects(window):
                        out.append(oid)
            else:
                for child in node.refs:
                    walk(child)

        walk(self.root)
        return sorted(out)

    # -- serialization: header with extent, object table, then a preorder
    #    node dump with explicit child counts.

    def write(self, f: BinaryIO) -> None:
        f.write(_MAGIC)
        f.write(struct.pack("<HIIIQ", _VERSION, self.n_rows, self.n_cols,
                            self.capacity, len(self.objects)))
        for oid in sorted(self.objects):
            b = self.objects[oid]
            f.write(struct.pack("<qiiii", oid, b.row_lo, b.col_lo,
                                b.row_hi, b.col_hi))

        def dump(node: RTreeNode):
            f.write(struct.pack("<Biiii I", node.is_leaf, node.mbr.row_lo,
                                node.mbr.col_lo, node.mbr.row_hi,
                                node.mbr.col_hi, len(node.refs)))
            if node.is_leaf:
                for oid in node.refs:
                    f.write(struct.pack("<q", oid))
            else:
                for child in node.refs:
                    dump(child)

        dump(self.root)

    def save(self, path) -> None:
        with open(path, "wb") as f:
            self.write(f)

    @classmethod
    def read(cls, f: BinaryIO) -> "RTree":
        if f.read(4) != _MAGIC:
            raise ValueError("not an R-tree file")
        version, n_rows, n_cols, capacity, n_obj = struct.unpack(
            "<HIIIQ", f.read(22))
        if version != _VERSION:
            raise ValueError(f"unsupported R-tree format version {version}")
        objects = {}
        for _ in range(n_obj):
            oid, a, b_, c, d = struct.unpack("<qiiii", f.read(24))
            objects[oid] = MBR(a, b_, c, d)

        def load_node() -> RTreeNode:
            is_leaf, a, b_, c, d, count = struct.unpack("<Biiii I", f.read(21))
            mbr = MBR(a, b_, c, d)
            if is_leaf:
                ids = [struct.unpack("<q", f.read(8))[0] for _ in range(count)]
                return RTreeNode(mbr, ids, True)
            return RTreeNode(mbr, [load_node() for _ in range(count)], False)

        return cls(load_node(), objects, capacity, n_rows, n_cols)

    @classmethod
    def load(cls, path) -> "RTree":
        with open(path, "rb") as f:
            return cls.read(f)


def bulk_load(dataset: VectorDataset, capacity: int = 100,
              n_rows: int = 0, n_cols: int = 0) -> RTree:
    """STR-pack a dataset into an R-tree."""
    if capacity < 2:
        raise ValueError("capacity must be >= 2")
    if not dataset.objects:
        raise ValueError("cannot bulk-load an empty dataset")

    entries = [(mbr, oid) for oid, mbr in sorted(dataset.objects)]
    groups = _str_pack(entries, capacity)
    level: list[RTreeNode] = [
        RTreeNode(MBR.union(m for m, _ in g), sorted(p for _, p in g), True)
        for g in groups
    ]
    while len(level) > 1:
        entries = [(node.mbr, node) for node in level]
        groups = _str_pack(entries, capacity)
        level = [
            RTreeNode(MBR.union(m for m, _ in g), [p for _, p in g], False)
            for g in groups
        ]
    return RTree(level[0], dataset.id_map(), capacity, n_rows, n_cols)


def leaf_mbrs(tree: RTree) -> list[tuple[RTreeNode, list[int]]]:
    return tree.leaf_mbrs()


def point_query(tree: RTree, row: int, col: int) -> list[int]:
    return tree.point_query(row, col)
