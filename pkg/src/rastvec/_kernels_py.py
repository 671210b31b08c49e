"""Pure-Python traversal kernels (fallback backend).

Mirrors the compiled backend in `_kernels_cy.pyx` operation for operation:
same signatures, same outputs, same visit accounting. Word arrays are kept as
Python int lists because scalar indexing into numpy arrays is slower than
list indexing in the interpreter.
"""

from __future__ import annotations

import numpy as np

from ._context import FlatRaster

NAME = "python"

_SUPER_SHIFT = 10            # 1024-bit superblocks
_WORDS_PER_SUPER = 16


class _Ctx:
    __slots__ = (
        "h", "side", "n_rows", "n_cols", "rmin", "rmax",
        "lvl_k", "lvl_side", "lvl_t_off", "lvl_ones_before", "lvl_count",
        "t_words", "t_super", "t_len",
        "row_width", "row_count", "row_chunk_word", "row_has_cont",
        "row_cont_word", "row_cont_super",
        "lmax_row0", "lmin_row0",
        "chunk_words", "cont_words", "cont_super",
        "visits",
    )

    def __init__(self, flat: FlatRaster):
        self.h = flat.h
        self.side = flat.side
        self.n_rows = flat.n_rows
        self.n_cols = flat.n_cols
        self.rmin = flat.rmin
        self.rmax = flat.rmax
        self.lvl_k = flat.lvl_k.tolist()
        self.lvl_side = flat.lvl_side.tolist()
        self.lvl_t_off = flat.lvl_t_off.tolist()
        self.lvl_ones_before = flat.lvl_ones_before.tolist()
        self.lvl_count = flat.lvl_count.tolist()
        self.t_words = flat.t_words.tolist()
        self.t_super = flat.t_super.tolist()
        self.t_len = flat.t_len
        self.row_width = flat.row_width.tolist()
        self.row_count = flat.row_count.tolist()
        self.row_chunk_word = flat.row_chunk_word.tolist()
        self.row_has_cont = flat.row_has_cont.tolist()
        self.row_cont_word = flat.row_cont_word.tolist()
        self.row_cont_super = flat.row_cont_super.tolist()
        self.lmax_row0 = flat.lmax_row0.tolist()
        self.lmin_row0 = flat.lmin_row0.tolist()
        self.chunk_words = flat.chunk_words.tolist()
        self.cont_words = flat.cont_words.tolist()
        self.cont_super = flat.cont_super.tolist()
        self.visits = 0


def make_context(flat: FlatRaster) -> _Ctx:
    return _Ctx(flat)


def visits(ctx: _Ctx) -> int:
    return ctx.visits


def reset_visits(ctx: _Ctx) -> None:
    ctx.visits = 0


def _rank1(words, super_, word_off, super_off, i):
    sb = i >> _SUPER_SHIFT
    cnt = super_[super_off + sb]
    w = i >> 6
    for j in range(word_off + (sb << 4), word_off + w):
        cnt += words[j].bit_count()
    tail = words[word_off + w] & ((1 << ((i & 63) + 1)) - 1)
    return cnt + tail.bit_count()


def _t_bit(ctx, pos):
    return (ctx.t_words[pos >> 6] >> (pos & 63)) & 1


def _t_rank1(ctx, pos):
    return _rank1(ctx.t_words, ctx.t_super, 0, 0, pos)


def _dacs_access(ctx, row0, i):
    g = row0
    shift = 0
    value = 0
    while True:
        wdt = ctx.row_width[g]
        bitpos = i * wdt
        w = ctx.row_chunk_word[g] + (bitpos >> 6)
        off = bitpos & 63
        chunk = ctx.chunk_words[w] >> off
        if off + wdt > 64:
            chunk |= ctx.chunk_words[w + 1] << (64 - off)
        value |= (chunk & ((1 << wdt) - 1)) << shift
        if not ctx.row_has_cont[g]:
            return value
        cw = ctx.row_cont_word[g]
        if not (ctx.cont_words[cw + (i >> 6)] >> (i & 63)) & 1:
            return value
        i = _rank1(ctx.cont_words, ctx.cont_super, cw, ctx.row_cont_super[g], i) - 1
        shift += wdt
        g += 1


def _child_base(ctx, level, idx):
    k = ctx.lvl_k[level]
    if level == 0:
        return 0
    if idx == 0:
        return 0
    ones = _t_rank1(ctx, ctx.lvl_t_off[level] + idx - 1) - ctx.lvl_ones_before[level]
    return ones * k * k


def _child_values(ctx, clevel, cidx, pmin, pmax):
    """(cmin, cmax, has_children) of a child node; counts one visit."""
    ctx.visits += 1
    cmax = pmax - _dacs_access(ctx, ctx.lmax_row0[clevel], cidx)
    if clevel == ctx.h:
        return cmax, cmax, False
    tb = ctx.lvl_t_off[clevel] + cidx
    if _t_bit(ctx, tb):
        r = _t_rank1(ctx, tb) - ctx.lvl_ones_before[clevel]
        cmin = pmin + _dacs_access(ctx, ctx.lmin_row0[clevel], r - 1)
        return cmin, cmax, True
    return cmax, cmax, False


def node_child(ctx, level, idx, j, pmin, pmax):
    """Values of the j-th child (row-major) of node (level, idx)."""
    base = _child_base(ctx, level, idx)
    cidx = base + j
    cmin, cmax, has = _child_values(ctx, level + 1, cidx, pmin, pmax)
    return cmin, cmax, has, cidx


def node_children(ctx, level, idx, pmin, pmax):
    """All k^2 children of node (level, idx) in row-major order."""
    base = _child_base(ctx, level, idx)
    k = ctx.lvl_k[level]
    out = []
    for j in range(k * k):
        cidx = base + j
        cmin, cmax, has = _child_values(ctx, level + 1, cidx, pmin, pmax)
        out.append((cmin, cmax, has, cidx))
    return out


def get_cell(ctx, row, col):
    ctx.visits += 1
    level, idx = 0, 0
    vmin, vmax = ctx.rmin, ctx.rmax
    size = ctx.side
    r, c = row, col
    has = ctx.h > 0 and vmin != vmax
    while has:
        k = ctx.lvl_k[level]
        cs = size // k
        j = (r // cs) * k + (c // cs)
        r %= cs
        c %= cs
        cidx = _child_base(ctx, level, idx) + j
        level += 1
        vmin, vmax, has = _child_values(ctx, level, cidx, vmin, vmax)
        idx = cidx
        size = cs
    return vmax


def cells_in_range(ctx, level, idx, qr, qc, size, vmin, vmax,
                   r0, c0, r1, c1, lo, hi):
    """Window cells with values in [lo, hi], ascending (row, col).

    The start node must contain the window; the window must be non-empty and
    inside the original extent.
    """
    out_r: list = []
    out_c: list = []

    def emit(rr0, cc0, rr1, cc1):
        rows = np.arange(rr0, rr1 + 1, dtype=np.int32)
        cols = np.arange(cc0, cc1 + 1, dtype=np.int32)
        out_r.append(np.repeat(rows, cols.size))
        out_c.append(np.tile(cols, rows.size))

    def rec(level, idx, qr, qc, size, vmin, vmax):
        if vmax < lo or vmin > hi:
            return
        if lo <= vmin and vmax <= hi:
            emit(max(qr, r0), max(qc, c0), min(qr + size - 1, r1), min(qc + size - 1, c1))
            return
        k = ctx.lvl_k[level]
        cs = size // k
        base = _child_base(ctx, level, idx)
        for j in range(k * k):
            cqr = qr + (j // k) * cs
            cqc = qc + (j % k) * cs
            if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
                continue
            cmin, cmax, _ = _child_values(ctx, level + 1, base + j, vmin, vmax)
            rec(level + 1, base + j, cqr, cqc, cs, cmin, cmax)

    ctx.visits += 1
    rec(level, idx, qr, qc, size, vmin, vmax)
    if not out_r:
        return np.zeros(0, dtype=np.int32), np.zeros(0, dtype=np.int32)
    rows = np.concatenate(out_r)
    cols = np.concatenate(out_c)
    order = np.lexsort((cols, rows))
    return rows[order], cols[order]


NO_OVERLAP, PARTIAL_OVERLAP, TOTAL_OVERLAP = 0, 1, 2


def classify_window(ctx, level, idx, qr, qc, size, vmin, vmax,
                    r0, c0, r1, c1, lo, hi):
    """0 if no window cell is in range, 2 if all are, 1 otherwise."""
    state = [False, False]  # seen_in, seen_out

    def rec(level, idx, qr, qc, size, vmin, vmax):
        if vmax < lo or vmin > hi:
            state[1] = True
            return state[0]
        if lo <= vmin and vmax <= hi:
            state[0] = True
            return state[1]
        k = ctx.lvl_k[level]
        cs = size // k
        base = _child_base(ctx, level, idx)
        for j in range(k * k):
            cqr = qr + (j // k) * cs
            cqc = qc + (j % k) * cs
            if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
                continue
            cmin, cmax, _ = _child_values(ctx, level + 1, base + j, vmin, vmax)
            if rec(level + 1, base + j, cqr, cqc, cs, cmin, cmax):
                return True
        return False

    ctx.visits += 1
    rec(level, idx, qr, qc, size, vmin, vmax)
    if state[0] and state[1]:
        return PARTIAL_OVERLAP
    return TOTAL_OVERLAP if state[0] else NO_OVERLAP


def window_extreme(ctx, level, idx, qr, qc, size, vmin, vmax,
                   r0, c0, r1, c1, want_max):
    """Max (or min) value over the window; window must be non-empty."""
    best = [-(1 << 62) if want_max else (1 << 62)]

    def rec(level, idx, qr, qc, size, vmin, vmax):
        fully_inside = (qr >= r0 and qc >= c0
                        and qr + size - 1 <= r1 and qc + size - 1 <= c1)
        if fully_inside or vmin == vmax:
            # the node's extreme cell lies in the window (uniform nodes
            # contribute their single value over any overlap)
            v = vmax if want_max else vmin
            if (v > best[0]) if want_max else (v < best[0]):
                best[0] = v
            return
        if want_max:
            if vmax <= best[0]:
                return
        else:
            if vmin >= best[0]:
                return
        k = ctx.lvl_k[level]
        cs = size // k
        base = _child_base(ctx, level, idx)
        for j in range(k * k):
            cqr = qr + (j // k) * cs
            cqc = qc + (j % k) * cs
            if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
                continue
            cmin, cmax, _ = _child_values(ctx, level + 1, base + j, vmin, vmax)
            rec(level + 1, base + j, cqr, cqc, cs, cmin, cmax)

    ctx.visits += 1
    rec(level, idx, qr, qc, size, vmin, vmax)
    return best[0]


def decompress(ctx):
    """Full matrix reconstruction (internal value space)."""
    out = np.zeros((ctx.n_rows, ctx.n_cols), dtype=np.int64)
    er, ec = ctx.n_rows - 1, ctx.n_cols - 1

    def rec(level, idx, qr, qc, size, vmin, vmax, has):
        if not has:
            out[qr: min(qr + size, er + 1), qc: min(qc + size, ec + 1)] = vmax
            return
        k = ctx.lvl_k[level]
        cs = size // k
        base = _child_base(ctx, level, idx)
        for j in range(k * k):
            cqr = qr + (j // k) * cs
            cqc = qc + (j % k) * cs
            if cqr > er or cqc > ec:
                continue
            cmin, cmax, chas = _child_values(ctx, level + 1, base + j, vmin, vmax)
            rec(level + 1, base + j, cqr, cqc, cs, cmin, cmax, chas)

    ctx.visits += 1
    rec(0, 0, 0, 0, ctx.side, ctx.rmin, ctx.rmax, ctx.h > 0 and ctx.rmin != ctx.rmax)
    return out
