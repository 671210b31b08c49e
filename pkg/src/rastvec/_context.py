"""Flat array layout of a built raster index, shared by both kernel backends.

The tree topology bitmap and every per-level DACs sequence are concatenated
into a handful of contiguous arrays with offset tables, so the traversal
kernels (compiled or pure Python) can navigate without touching Python
objects per node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitvec import RankBitmap
from .dacs import DacsSequence


@dataclass
class FlatRaster:
    h: int                      # number of split levels; tree levels run 0..h
    side: int                   # padded square side
    n_rows: int
    n_cols: int
    rmin: int                   # root values in internal (shifted) space
    rmax: int

    lvl_k: np.ndarray           # split factor per level (0 at level h)
    lvl_side: np.ndarray        # quadrant side per level
    lvl_t_off: np.ndarray       # offset of a level's first bit inside T
    lvl_ones_before: np.ndarray # rank1(T, lvl_t_off - 1)
    lvl_count: np.ndarray       # nodes per level

    t_words: np.ndarray
    t_super: np.ndarray
    t_len: int

    # one row per (sequence, dacs level); rows of a sequence are contiguous
    row_width: np.ndarray
    row_count: np.ndarray
    row_chunk_word: np.ndarray
    row_has_cont: np.ndarray
    row_cont_word: np.ndarray
    row_cont_super: np.ndarray
    lmax_row0: np.ndarray       # first row of Lmax per tree level (-1 if none)
    lmin_row0: np.ndarray

    chunk_words: np.ndarray
    cont_words: np.ndarray
    cont_super: np.ndarray


def flatten_structure(
    side: int,
    n_rows: int,
    n_cols: int,
    rmin: int,
    rmax: int,
    level_ks: list[int],
    topo: RankBitmap,
    lmax: list[DacsSequence],
    lmin: list[DacsSequence],
) -> FlatRaster:
    """Assemble the flat navigation tables from the built structures.

    lmax holds one sequence per tree level 1..h, lmin one per level 1..h-1
    (entries only for nodes that subdivide).
    """
    h = len(level_ks)
    lvl_k = np.zeros(h + 1, dtype=np.int64)
    lvl_side = np.zeros(h + 1, dtype=np.int64)
    lvl_count = np.zeros(h + 1, dtype=np.int64)
    lvl_t_off = np.zeros(h + 1, dtype=np.int64)
    lvl_ones_before = np.zeros(h + 1, dtype=np.int64)

    s = side
    for lv in range(h + 1):
        lvl_side[lv] = s
        if lv < h:
            lvl_k[lv] = level_ks[lv]
            s //= level_ks[lv]
    lvl_count[0] = 1
    for lv in range(1, h + 1):
        lvl_count[lv] = len(lmax[lv - 1])

    off = 0
    for lv in range(1, h + 1):
        if lv <= h - 1:
            lvl_t_off[lv] = off
            lvl_ones_before[lv] = topo.rank1(off - 1) if off > 0 else 0
            off += int(lvl_count[lv])
        else:
            lvl_t_off[lv] = len(topo)
            lvl_ones_before[lv] = topo.count_ones()
    if off != len(topo):
        raise ValueError(f"topology bitmap length {len(topo)} != expected {off}")

    rows_width: list[int] = []
    rows_count: list[int] = []
    rows_chunk_word: list[int] = []
    rows_has_cont: list[int] = []
    rows_cont_word: list[int] = []
    rows_cont_super: list[int] = []
    chunk_parts: list[np.ndarray] = []
    cont_parts: list[np.ndarray] = []
    super_parts: list[np.ndarray] = []
    chunk_off = cont_off = super_off = 0

    def add_sequence(seq: DacsSequence) -> int:
        nonlocal chunk_off, cont_off, super_off
        first = len(rows_width)
        for lvl in seq.levels:
            rows_width.append(lvl.width)
            rows_count.append(lvl.count)
            rows_chunk_word.append(chunk_off)
            chunk_parts.append(lvl.words)
            chunk_off += lvl.words.size
            if lvl.cont is not None:
                rows_has_cont.append(1)
                rows_cont_word.append(cont_off)
                rows_cont_super.append(super_off)
                cont_parts.append(lvl.cont.words)
                super_parts.append(lvl.cont.super)
                cont_off += lvl.cont.words.size
                super_off += lvl.cont.super.size
            else:
                rows_has_cont.append(0)
                rows_cont_word.append(0)
                rows_cont_super.append(0)
        return first

    lmax_row0 = np.full(h + 1, -1, dtype=np.int64)
    lmin_row0 = np.full(h + 1, -1, dtype=np.int64)
    for lv in range(1, h + 1):
        lmax_row0[lv] = add_sequence(lmax[lv - 1])
    for lv in range(1, h):
        lmin_row0[lv] = add_sequence(lmin[lv - 1])

    def cat(parts, dtype):
        return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)

    return FlatRaster(
        h=h, side=side, n_rows=n_rows, n_cols=n_cols, rmin=rmin, rmax=rmax,
        lvl_k=lvl_k, lvl_side=lvl_side, lvl_t_off=lvl_t_off,
        lvl_ones_before=lvl_ones_before, lvl_count=lvl_count,
        t_words=np.ascontiguousarray(topo.words, dtype=np.uint64),
        t_super=np.ascontiguousarray(topo.super, dtype=np.uint32),
        t_len=len(topo),
        row_width=np.asarray(rows_width, dtype=np.int64),
        row_count=np.asarray(rows_count, dtype=np.int64),
        row_chunk_word=np.asarray(rows_chunk_word, dtype=np.int64),
        row_has_cont=np.asarray(rows_has_cont, dtype=np.uint8),
        row_cont_word=np.asarray(rows_cont_word, dtype=np.int64),
        row_cont_super=np.asarray(rows_cont_super, dtype=np.int64),
        lmax_row0=lmax_row0, lmin_row0=lmin_row0,
        chunk_words=cat(chunk_parts, np.uint64),
        cont_words=cat(cont_parts, np.uint64),
        cont_super=cat(super_parts, np.uint32),
    )
