"""Compressed self-indexed integer rasters.

A raster is summarized by a conceptual k-ary min/max tree: the matrix is
recursively split into k×k quadrants, each annotated with the min and max of
its cells, and subdivision stops where min equals max. The tree is stored as
a level-order has-children bitmap plus per-level DACs sequences holding the
differences against the parent values (parent_max - max, min - parent_min,
both non-negative). Leaf levels store only the max. Navigation decodes nodes
on demand through rank and DACs access, so queries never materialize the
matrix.

Padding to the square side is virtual: quadrants fully outside the original
extent are emitted as childless placeholder nodes and are never visited by
queries, which are clipped to the extent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional

import numpy as np

from ._context import flatten_structure
from .bitvec import RankBitmap
from .dacs import DacsSequence
from .kernels import get_backend

_MAGIC = b"K2RA"
_VERSION = 1
_ABSENT = 1 << 62


@dataclass
class RasterMatrix:
    """Row-major integer grid; origin top-left, row index grows downward."""

    n_rows: int
    n_cols: int
    values: np.ndarray
    nodata_mask: Optional[np.ndarray] = None

    @classmethod
    def from_array(cls, arr) -> "RasterMatrix":
        a = np.asarray(arr)
        if not np.issubdtype(a.dtype, np.integer):
            raise TypeError(f"raster values must be integers, got dtype {a.dtype}")
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("raster must be a non-empty 2-D grid")
        return cls(a.shape[0], a.shape[1], a.astype(np.int64))


@dataclass(frozen=True)
class K2Config:
    """Hybrid branching schedule: k1 for the first n1 levels, then k2."""

    n1: int = 4
    k1: int = 4
    k2: int = 2
    dacs_max_levels: int = 3

    def __post_init__(self):
        if self.k1 < 2 or self.k2 < 2:
            raise ValueError("branching factors must be >= 2")
        if self.n1 < 0:
            raise ValueError("n1 must be >= 0")
        if self.dacs_max_levels < 1:
            raise ValueError("dacs_max_levels must be >= 1")


DEFAULT_CONFIG = K2Config()


def plan_levels(n_rows: int, n_cols: int, cfg: K2Config) -> tuple[int, list[int]]:
    """Padded square side and per-level split factors.

    The side is the smallest k1^a * k2^b >= max extent over a <= n1 (larger a
    preferred on ties), so small rasters use fewer k1 levels instead of
    over-padding.
    """
    target = max(n_rows, n_cols)
    best_side = None
    best = (0, 0)
    for a in range(cfg.n1, -1, -1):
        s = cfg.k1 ** a
        b = 0
        while s < target:
            s *= cfg.k2
            b += 1
        if best_side is None or s < best_side:
            best_side = s
            best = (a, b)
    a, b = best
    return best_side, [cfg.k1] * a + [cfg.k2] * b


def pad_to_square(m: RasterMatrix, cfg: K2Config = DEFAULT_CONFIG) -> int:
    """Side of the virtual padded square enclosing the raster."""
    return plan_levels(m.n_rows, m.n_cols, cfg)[0]


@dataclass(frozen=True)
class NodeCursor:
    """Navigable handle to one tree node, with absolute min/max values."""

    level: int
    index: int
    row0: int
    col0: int
    side: int
    min: int
    max: int
    has_children: bool

    @property
    def quad(self) -> tuple[int, int, int]:
        return (self.row0, self.col0, self.side)

    def contains(self, r0: int, c0: int, r1: int, c1: int) -> bool:
        return (self.row0 <= r0 and self.col0 <= c0
                and r1 < self.row0 + self.side and c1 < self.col0 + self.side)


def _build_structure(internal: np.ndarray, side: int, level_ks: list[int],
                     dacs_max_levels: int):
    """Level-order emission of topology bits and differential value arrays."""
    n_rows, n_cols = internal.shape
    h = len(level_ks)

    grids: list[tuple[np.ndarray, np.ndarray]] = [None] * (h + 1)
    pad_min = np.full((side, side), _ABSENT, dtype=np.int64)
    pad_max = np.full((side, side), -_ABSENT, dtype=np.int64)
    pad_min[:n_rows, :n_cols] = internal
    pad_max[:n_rows, :n_cols] = internal
    grids[h] = (pad_min, pad_max)
    for lv in range(h - 1, -1, -1):
        k = level_ks[lv]
        gmin, gmax = grids[lv + 1]
        g = gmin.shape[0] // k
        grids[lv] = (
            gmin.reshape(g, k, g, k).min(axis=(1, 3)),
            gmax.reshape(g, k, g, k).max(axis=(1, 3)),
        )

    rmin = int(grids[0][0][0, 0])
    rmax = int(grids[0][1][0, 0])

    t_parts: list[np.ndarray] = []
    lmax_diffs: list[np.ndarray] = []
    lmin_diffs: list[np.ndarray] = []

    if h > 0 and rmin != rmax:
        abr = np.zeros(1, dtype=np.int64)
        abc = np.zeros(1, dtype=np.int64)
        apmin = np.array([rmin], dtype=np.int64)
        apmax = np.array([rmax], dtype=np.int64)
    else:
        abr = abc = apmin = apmax = np.zeros(0, dtype=np.int64)

    for c in range(1, h + 1):
        k = level_ks[c - 1]
        if abr.size:
            off_r = np.repeat(np.arange(k, dtype=np.int64), k)
            off_c = np.tile(np.arange(k, dtype=np.int64), k)
            cbr = (abr[:, None] * k + off_r[None, :]).ravel()
            cbc = (abc[:, None] * k + off_c[None, :]).ravel()
            cpmin = np.repeat(apmin, k * k)
            cpmax = np.repeat(apmax, k * k)
            cmin = grids[c][0][cbr, cbc]
            cmax = grids[c][1][cbr, cbc]
        else:
            cbr = cbc = cpmin = cpmax = cmin = cmax = np.zeros(0, dtype=np.int64)

        absent = cmax < 0
        lmax_diffs.append(np.where(absent, 0, cpmax - cmax))
        if c < h:
            bits = (~absent) & (cmin != cmax)
            t_parts.append(bits.astype(np.uint8))
            lmin_diffs.append((cmin - cpmin)[bits])
            abr, abc = cbr[bits], cbc[bits]
            apmin, apmax = cmin[bits], cmax[bits]

    topo = RankBitmap(np.concatenate(t_parts) if t_parts else np.zeros(0, dtype=np.uint8))
    lmax = [DacsSequence.encode(d, dacs_max_levels) for d in lmax_diffs]
    lmin = [DacsSequence.encode(d, dacs_max_levels) for d in lmin_diffs]
    return rmin, rmax, topo, lmax, lmin


class K2Raster:
    """Built raster index. Immutable; concurrent readers are safe."""

    def __init__(self, side, n_rows, n_cols, offset, rmin, rmax, level_ks,
                 topo, lmax, lmin, backend="auto"):
        self.side = side
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.offset = offset            # absolute value = internal + offset
        self._rmin = rmin               # internal space
        self._rmax = rmax
        self.level_ks = list(level_ks)
        self.topo = topo
        self.lmax = lmax
        self.lmin = lmin
        self._flat = flatten_structure(side, n_rows, n_cols, rmin, rmax,
                                       self.level_ks, topo, lmax, lmin)
        self._kern = get_backend(backend)
        self._ctx = self._kern.make_context(self._flat)

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, m: RasterMatrix, cfg: K2Config = DEFAULT_CONFIG,
              backend: str = "auto") -> "K2Raster":
        if not np.issubdtype(np.asarray(m.values).dtype, np.integer):
            raise TypeError("raster values must be integers")
        values = np.asarray(m.values, dtype=np.int64)
        if values.shape != (m.n_rows, m.n_cols):
            raise ValueError("matrix shape does not match declared extent")
        side, level_ks = plan_levels(m.n_rows, m.n_cols, cfg)
        global_min = int(values.min())
        offset = min(global_min, 0)
        internal = values - offset
        rmin, rmax, topo, lmax, lmin = _build_structure(
            internal, side, level_ks, cfg.dacs_max_levels)
        return cls(side, m.n_rows, m.n_cols, offset, rmin, rmax, level_ks,
                   topo, lmax, lmin, backend=backend)

    def with_backend(self, backend: str) -> "K2Raster":
        """Sibling raster sharing all structures, navigated by `backend`."""
        return K2Raster(self.side, self.n_rows, self.n_cols, self.offset,
                        self._rmin, self._rmax, self.level_ks,
                        self.topo, self.lmax, self.lmin, backend=backend)

    @property
    def backend(self) -> str:
        return self._kern.NAME

    @property
    def rmin(self) -> int:
        """Absolute minimum value of the raster."""
        return self._rmin + self.offset

    @property
    def rmax(self) -> int:
        return self._rmax + self.offset

    @property
    def n_levels(self) -> int:
        return len(self.level_ks)

    # -- instrumentation ---------------------------------------------------

    def node_count_visited(self) -> int:
        """Monotone count of node expansions since the last reset."""
        return self._kern.visits(self._ctx)

    def reset_node_count(self) -> None:
        self._kern.reset_visits(self._ctx)

    # -- navigation --------------------------------------------------------

    def root_cursor(self) -> NodeCursor:
        has = self.n_levels > 0 and self._rmin != self._rmax
        return NodeCursor(0, 0, 0, 0, self.side, self.rmin, self.rmax, has)

    def child_cursors(self, cursor: NodeCursor) -> list[NodeCursor]:
        """All k^2 children of a subdivided node, row-major."""
        if not cursor.has_children:
            raise ValueError("node is uniform (or a cell); it has no children")
        k = self.level_ks[cursor.level]
        cs = cursor.side // k
        pmin = cursor.min - self.offset
        pmax = cursor.max - self.offset
        kids = self._kern.node_children(self._ctx, cursor.level, cursor.index,
                                        pmin, pmax)
        out = []
        for j, (cmin, cmax, has, cidx) in enumerate(kids):
            out.append(NodeCursor(
                cursor.level + 1, cidx,
                cursor.row0 + (j // k) * cs, cursor.col0 + (j % k) * cs, cs,
                cmin + self.offset, cmax + self.offset, has))
        return out

    def child_containing(self, cursor: NodeCursor,
                         r0: int, c0: int, r1: int, c1: int) -> Optional[NodeCursor]:
        """The unique child whose quadrant contains the box, if any."""
        if not cursor.has_children:
            return None
        k = self.level_ks[cursor.level]
        cs = cursor.side // k
        jr0, jr1 = (r0 - cursor.row0) // cs, (r1 - cursor.row0) // cs
        jc0, jc1 = (c0 - cursor.col0) // cs, (c1 - cursor.col0) // cs
        if jr0 != jr1 or jc0 != jc1:
            return None
        j = jr0 * k + jc0
        cmin, cmax, has, cidx = self._kern.node_child(
            self._ctx, cursor.level, cursor.index, j,
            cursor.min - self.offset, cursor.max - self.offset)
        return NodeCursor(cursor.level + 1, cidx,
                          cursor.row0 + jr0 * cs, cursor.col0 + jc0 * cs, cs,
                          cmin + self.offset, cmax + self.offset, has)

    def _start_args(self, cursor: NodeCursor):
        return (cursor.level, cursor.index, cursor.row0, cursor.col0,
                cursor.side, cursor.min - self.offset, cursor.max - self.offset)

    # -- queries -----------------------------------------------------------

    def get_cell(self, row: int, col: int) -> int:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise IndexError(f"cell ({row}, {col}) outside extent "
                             f"{self.n_rows}x{self.n_cols}")
        return self._kern.get_cell(self._ctx, row, col) + self.offset

    def _clip_window(self, window) -> tuple[int, int, int, int]:
        r0, c0, r1, c1 = window
        if r0 > r1 or c0 > c1:
            raise ValueError(f"empty window {window}")
        r0, c0 = max(r0, 0), max(c0, 0)
        r1, c1 = min(r1, self.n_rows - 1), min(c1, self.n_cols - 1)
        if r0 > r1 or c0 > c1:
            raise ValueError(f"window {window} does not intersect the extent")
        return r0, c0, r1, c1

    def cells_in_range(self, window, lo: int, hi: int) -> np.ndarray:
        """(N, 2) array of window cells with lo <= value <= hi, ascending."""
        if lo > hi:
            raise ValueError(f"invalid value range [{lo}, {hi}]")
        r0, c0, r1, c1 = self._clip_window(window)
        rows, cols = self._kern.cells_in_range(
            self._ctx, *self._start_args(self.root_cursor()),
            r0, c0, r1, c1, lo - self.offset, hi - self.offset)
        return np.stack([rows, cols], axis=1)

    def extract_window(self, cursor: NodeCursor, window, lo: int, hi: int) -> np.ndarray:
        """cells_in_range restricted to a pre-clipped window, started at cursor."""
        r0, c0, r1, c1 = window
        rows, cols = self._kern.cells_in_range(
            self._ctx, *self._start_args(cursor),
            r0, c0, r1, c1, lo - self.offset, hi - self.offset)
        return np.stack([rows, cols], axis=1)

    def classify_window(self, cursor: NodeCursor, window, lo: int, hi: int) -> int:
        """0 none / 1 some / 2 all of the window cells lie in [lo, hi]."""
        r0, c0, r1, c1 = window
        return self._kern.classify_window(
            self._ctx, *self._start_args(cursor),
            r0, c0, r1, c1, lo - self.offset, hi - self.offset)

    def window_extreme(self, cursor: NodeCursor, window, want_max: bool) -> int:
        r0, c0, r1, c1 = window
        v = self._kern.window_extreme(
            self._ctx, *self._start_args(cursor), r0, c0, r1, c1, bool(want_max))
        return v + self.offset

    def to_matrix(self) -> np.ndarray:
        """Full decompression back to the original matrix."""
        return self._kern.decompress(self._ctx) + self.offset

    # -- serialization -----------------------------------------------------
    # Layout: magic "K2RA", version u16, value offset i64, n_rows/n_cols/side
    # u32, level count u8, per-level k u8, rMin/rMax i64 (shifted space),
    # topology bitmap, per-level Lmax, per-level Lmin. Little-endian.

    def write(self, f: BinaryIO) -> None:
        f.write(_MAGIC)
        f.write(struct.pack("<HqIIIB", _VERSION, self.offset,
                            self.n_rows, self.n_cols, self.side,
                            len(self.level_ks)))
        f.write(bytes(self.level_ks))
        f.write(struct.pack("<qq", self._rmin, self._rmax))
        self.topo.write(f)
        for seq in self.lmax:
            seq.write(f)
        for seq in self.lmin:
            seq.write(f)

    def save(self, path) -> None:
        with open(path, "wb") as f:
            self.write(f)

    @classmethod
    def read(cls, f: BinaryIO, backend: str = "auto") -> "K2Raster":
        magic = f.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a raster index file (magic {magic!r})")
        version, offset, n_rows, n_cols, side, h = struct.unpack(
            "<HqIIIB", f.read(23))
        if version != _VERSION:
            raise ValueError(f"unsupported format version {version}")
        level_ks = list(f.read(h))
        rmin, rmax = struct.unpack("<qq", f.read(16))
        topo = RankBitmap.read(f)
        lmax = [DacsSequence.read(f) for _ in range(h)]
        lmin = [DacsSequence.read(f) for _ in range(max(0, h - 1))]
        return cls(side, n_rows, n_cols, offset, rmin, rmax, level_ks,
                   topo, lmax, lmin, backend=backend)

    @classmethod
    def load(cls, path, backend: str = "auto") -> "K2Raster":
        with open(path, "rb") as f:
            return cls.read(f, backend=backend)

    def serialized_bytes(self) -> int:
        total = 4 + 23 + len(self.level_ks) + 16
        total += self.topo.serialized_bytes()
        total += sum(s.serialized_bytes() for s in self.lmax)
        total += sum(s.serialized_bytes() for s in self.lmin)
        return total


def build(m: RasterMatrix, cfg: K2Config = DEFAULT_CONFIG,
          backend: str = "auto") -> K2Raster:
    """Build the compressed index for a raster matrix."""
    return K2Raster.build(m, cfg, backend=backend)


def get_cell(r: K2Raster, row: int, col: int) -> int:
    return r.get_cell(row, col)


def cells_in_range(r: K2Raster, window, lo: int, hi: int) -> np.ndarray:
    return r.cells_in_range(window, lo, hi)


def child_cursors(r: K2Raster, cursor: NodeCursor) -> list[NodeCursor]:
    return r.child_cursors(cursor)
