# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled traversal kernels (native backend).

Twin of `_kernels_py`: identical signatures, outputs and visit accounting.
The rank/DACs decoding and the window recursions run entirely at C level.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t, uint64_t

NAME = "native"

NO_OVERLAP, PARTIAL_OVERLAP, TOTAL_OVERLAP = 0, 1, 2

cdef extern from *:
    """
    static inline int rastvec_popcll(unsigned long long x)
    { return __builtin_popcountll(x); }
    """
    int rastvec_popcll(unsigned long long x) nogil


cdef class Ctx:
    cdef readonly int h
    cdef readonly int64_t side, n_rows, n_cols, rmin, rmax, t_len
    cdef int64_t[::1] lvl_k, lvl_side, lvl_t_off, lvl_ones_before, lvl_count
    cdef uint64_t[::1] t_words, chunk_words, cont_words
    cdef uint32_t[::1] t_super, cont_super
    cdef int64_t[::1] row_width, row_count, row_chunk_word
    cdef int64_t[::1] row_cont_word, row_cont_super
    cdef uint8_t[::1] row_has_cont
    cdef int64_t[::1] lmax_row0, lmin_row0
    cdef public long long visits


def make_context(flat):
    cdef Ctx ctx = Ctx()
    ctx.h = flat.h
    ctx.side = flat.side
    ctx.n_rows = flat.n_rows
    ctx.n_cols = flat.n_cols
    ctx.rmin = flat.rmin
    ctx.rmax = flat.rmax
    ctx.t_len = flat.t_len
    ctx.lvl_k = np.ascontiguousarray(flat.lvl_k, dtype=np.int64)
    ctx.lvl_side = np.ascontiguousarray(flat.lvl_side, dtype=np.int64)
    ctx.lvl_t_off = np.ascontiguousarray(flat.lvl_t_off, dtype=np.int64)
    ctx.lvl_ones_before = np.ascontiguousarray(flat.lvl_ones_before, dtype=np.int64)
    ctx.lvl_count = np.ascontiguousarray(flat.lvl_count, dtype=np.int64)
    ctx.t_words = np.ascontiguousarray(flat.t_words, dtype=np.uint64)
    ctx.t_super = np.ascontiguousarray(flat.t_super, dtype=np.uint32)
    ctx.chunk_words = np.ascontiguousarray(flat.chunk_words, dtype=np.uint64)
    ctx.cont_words = np.ascontiguousarray(flat.cont_words, dtype=np.uint64)
    ctx.cont_super = np.ascontiguousarray(flat.cont_super, dtype=np.uint32)
    ctx.row_width = np.ascontiguousarray(flat.row_width, dtype=np.int64)
    ctx.row_count = np.ascontiguousarray(flat.row_count, dtype=np.int64)
    ctx.row_chunk_word = np.ascontiguousarray(flat.row_chunk_word, dtype=np.int64)
    ctx.row_cont_word = np.ascontiguousarray(flat.row_cont_word, dtype=np.int64)
    ctx.row_cont_super = np.ascontiguousarray(flat.row_cont_super, dtype=np.int64)
    ctx.row_has_cont = np.ascontiguousarray(flat.row_has_cont, dtype=np.uint8)
    ctx.lmax_row0 = np.ascontiguousarray(flat.lmax_row0, dtype=np.int64)
    ctx.lmin_row0 = np.ascontiguousarray(flat.lmin_row0, dtype=np.int64)
    ctx.visits = 0
    return ctx


def visits(Ctx ctx):
    return ctx.visits


def reset_visits(Ctx ctx):
    ctx.visits = 0


cdef inline long long _rank1(uint64_t[::1] words, uint32_t[::1] sup,
                             long long word_off, long long super_off,
                             long long i):
    cdef long long sb = i >> 10
    cdef long long cnt = sup[super_off + sb]
    cdef long long w = i >> 6
    cdef long long j
    for j in range(word_off + (sb << 4), word_off + w):
        cnt += rastvec_popcll(words[j])
    cdef uint64_t mask = (<uint64_t>0xFFFFFFFFFFFFFFFF) >> (63 - (i & 63))
    cnt += rastvec_popcll(words[word_off + w] & mask)
    return cnt


cdef inline int _t_bit(Ctx ctx, long long pos):
    return <int>((ctx.t_words[pos >> 6] >> (pos & 63)) & 1)


cdef inline long long _t_rank1(Ctx ctx, long long pos):
    return _rank1(ctx.t_words, ctx.t_super, 0, 0, pos)


cdef long long _dacs_access(Ctx ctx, long long row0, long long i):
    cdef long long g = row0
    cdef long long shift = 0
    cdef long long value = 0
    cdef long long wdt, bitpos, w, off, cw
    cdef uint64_t chunk
    while True:
        wdt = ctx.row_width[g]
        bitpos = i * wdt
        w = ctx.row_chunk_word[g] + (bitpos >> 6)
        off = bitpos & 63
        chunk = ctx.chunk_words[w] >> off
        if off + wdt > 64:
            chunk |= ctx.chunk_words[w + 1] << (64 - off)
        value |= <long long>(chunk & (((<uint64_t>1) << wdt) - 1)) << shift
        if not ctx.row_has_cont[g]:
            return value
        cw = ctx.row_cont_word[g]
        if not (ctx.cont_words[cw + (i >> 6)] >> (i & 63)) & 1:
            return value
        i = _rank1(ctx.cont_words, ctx.cont_super, cw,
                   ctx.row_cont_super[g], i) - 1
        shift += wdt
        g += 1


cdef inline long long _child_base(Ctx ctx, int level, long long idx):
    cdef long long k = ctx.lvl_k[level]
    cdef long long ones
    if level == 0 or idx == 0:
        return 0
    ones = _t_rank1(ctx, ctx.lvl_t_off[level] + idx - 1) \
        - ctx.lvl_ones_before[level]
    return ones * k * k


cdef inline void _child_values(Ctx ctx, int clevel, long long cidx,
                               long long pmin, long long pmax,
                               long long* cmin, long long* cmax, int* has):
    ctx.visits += 1
    cmax[0] = pmax - _dacs_access(ctx, ctx.lmax_row0[clevel], cidx)
    cdef long long tb, r
    if clevel == ctx.h:
        cmin[0] = cmax[0]
        has[0] = 0
        return
    tb = ctx.lvl_t_off[clevel] + cidx
    if _t_bit(ctx, tb):
        r = _t_rank1(ctx, tb) - ctx.lvl_ones_before[clevel]
        cmin[0] = pmin + _dacs_access(ctx, ctx.lmin_row0[clevel], r - 1)
        has[0] = 1
    else:
        cmin[0] = cmax[0]
        has[0] = 0


def node_child(Ctx ctx, int level, long long idx, long long j,
               long long pmin, long long pmax):
    cdef long long cidx = _child_base(ctx, level, idx) + j
    cdef long long cmin, cmax
    cdef int has
    _child_values(ctx, level + 1, cidx, pmin, pmax, &cmin, &cmax, &has)
    return cmin, cmax, bool(has), cidx


def node_children(Ctx ctx, int level, long long idx,
                  long long pmin, long long pmax):
    cdef long long base = _child_base(ctx, level, idx)
    cdef long long k = ctx.lvl_k[level]
    cdef long long j, cmin, cmax
    cdef int has
    out = []
    for j in range(k * k):
        _child_values(ctx, level + 1, base + j, pmin, pmax, &cmin, &cmax, &has)
        out.append((cmin, cmax, bool(has), base + j))
    return out


def get_cell(Ctx ctx, long long row, long long col):
    ctx.visits += 1
    cdef int level = 0
    cdef long long idx = 0
    cdef long long vmin = ctx.rmin, vmax = ctx.rmax
    cdef long long size = ctx.side
    cdef long long r = row, c = col
    cdef long long k, cs, j, cidx
    cdef int has = 1 if (ctx.h > 0 and vmin != vmax) else 0
    while has:
        k = ctx.lvl_k[level]
        cs = size // k
        j = (r // cs) * k + (c // cs)
        r %= cs
        c %= cs
        cidx = _child_base(ctx, level, idx) + j
        level += 1
        _child_values(ctx, level, cidx, vmin, vmax, &vmin, &vmax, &has)
        idx = cidx
        size = cs
    return vmax


cdef long long _cells_rec(Ctx ctx, int level, long long idx,
                          long long qr, long long qc, long long size,
                          long long vmin, long long vmax,
                          long long r0, long long c0, long long r1, long long c1,
                          long long lo, long long hi,
                          int32_t[::1] out_r, int32_t[::1] out_c, long long n):
    cdef long long rr0, rr1, cc0, cc1, r, c
    cdef long long k, cs, base, j, cqr, cqc, cmin, cmax
    cdef int has
    if vmax < lo or vmin > hi:
        return n
    if lo <= vmin and vmax <= hi:
        rr0 = qr if qr > r0 else r0
        cc0 = qc if qc > c0 else c0
        rr1 = qr + size - 1
        if rr1 > r1: rr1 = r1
        cc1 = qc + size - 1
        if cc1 > c1: cc1 = c1
        for r in range(rr0, rr1 + 1):
            for c in range(cc0, cc1 + 1):
                out_r[n] = <int32_t>r
                out_c[n] = <int32_t>c
                n += 1
        return n
    k = ctx.lvl_k[level]
    cs = size // k
    base = _child_base(ctx, level, idx)
    for j in range(k * k):
        cqr = qr + (j // k) * cs
        cqc = qc + (j % k) * cs
        if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
            continue
        _child_values(ctx, level + 1, base + j, vmin, vmax, &cmin, &cmax, &has)
        n = _cells_rec(ctx, level + 1, base + j, cqr, cqc, cs, cmin, cmax,
                       r0, c0, r1, c1, lo, hi, out_r, out_c, n)
    return n


def cells_in_range(Ctx ctx, int level, long long idx,
                   long long qr, long long qc, long long size,
                   long long vmin, long long vmax,
                   long long r0, long long c0, long long r1, long long c1,
                   long long lo, long long hi):
    cdef long long cap = (r1 - r0 + 1) * (c1 - c0 + 1)
    rows = np.empty(cap, dtype=np.int32)
    cols = np.empty(cap, dtype=np.int32)
    cdef int32_t[::1] rows_mv = rows
    cdef int32_t[::1] cols_mv = cols
    ctx.visits += 1
    cdef long long n = _cells_rec(ctx, level, idx, qr, qc, size, vmin, vmax,
                                  r0, c0, r1, c1, lo, hi, rows_mv, cols_mv, 0)
    rows = rows[:n]
    cols = cols[:n]
    order = np.lexsort((cols, rows))
    return rows[order], cols[order]


cdef int _classify_rec(Ctx ctx, int level, long long idx,
                       long long qr, long long qc, long long size,
                       long long vmin, long long vmax,
                       long long r0, long long c0, long long r1, long long c1,
                       long long lo, long long hi, int state):
    cdef long long k, cs, base, j, cqr, cqc, cmin, cmax
    cdef int has
    if vmax < lo or vmin > hi:
        return state | 2
    if lo <= vmin and vmax <= hi:
        return state | 1
    k = ctx.lvl_k[level]
    cs = size // k
    base = _child_base(ctx, level, idx)
    for j in range(k * k):
        cqr = qr + (j // k) * cs
        cqc = qc + (j % k) * cs
        if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
            continue
        _child_values(ctx, level + 1, base + j, vmin, vmax, &cmin, &cmax, &has)
        state = _classify_rec(ctx, level + 1, base + j, cqr, cqc, cs,
                              cmin, cmax, r0, c0, r1, c1, lo, hi, state)
        if state == 3:
            return 3
    return state


def classify_window(Ctx ctx, int level, long long idx,
                    long long qr, long long qc, long long size,
                    long long vmin, long long vmax,
                    long long r0, long long c0, long long r1, long long c1,
                    long long lo, long long hi):
    ctx.visits += 1
    cdef int state = _classify_rec(ctx, level, idx, qr, qc, size, vmin, vmax,
                                   r0, c0, r1, c1, lo, hi, 0)
    if state == 3:
        return PARTIAL_OVERLAP
    return TOTAL_OVERLAP if state == 1 else NO_OVERLAP


cdef long long _extreme_rec(Ctx ctx, int level, long long idx,
                            long long qr, long long qc, long long size,
                            long long vmin, long long vmax,
                            long long r0, long long c0, long long r1,
                            long long c1, int want_max, long long best):
    cdef long long k, cs, base, j, cqr, cqc, cmin, cmax, v
    cdef int has
    cdef bint fully_inside = (qr >= r0 and qc >= c0
                              and qr + size - 1 <= r1 and qc + size - 1 <= c1)
    if fully_inside or vmin == vmax:
        v = vmax if want_max else vmin
        if (v > best) if want_max else (v < best):
            best = v
        return best
    if want_max:
        if vmax <= best:
            return best
    else:
        if vmin >= best:
            return best
    k = ctx.lvl_k[level]
    cs = size // k
    base = _child_base(ctx, level, idx)
    for j in range(k * k):
        cqr = qr + (j // k) * cs
        cqc = qc + (j % k) * cs
        if cqr > r1 or cqr + cs - 1 < r0 or cqc > c1 or cqc + cs - 1 < c0:
            continue
        _child_values(ctx, level + 1, base + j, vmin, vmax, &cmin, &cmax, &has)
        best = _extreme_rec(ctx, level + 1, base + j, cqr, cqc, cs, cmin, cmax,
                            r0, c0, r1, c1, want_max, best)
    return best


def window_extreme(Ctx ctx, int level, long long idx,
                   long long qr, long long qc, long long size,
                   long long vmin, long long vmax,
                   long long r0, long long c0, long long r1, long long c1,
                   bint want_max):
    cdef long long best = -(<long long>1 << 62) if want_max else (<long long>1 << 62)
    ctx.visits += 1
    return _extreme_rec(ctx, level, idx, qr, qc, size, vmin, vmax,
                        r0, c0, r1, c1, 1 if want_max else 0, best)


cdef void _decompress_rec(Ctx ctx, int level, long long idx,
                          long long qr, long long qc, long long size,
                          long long vmin, long long vmax, int has,
                          int64_t[:, ::1] out):
    cdef long long er = ctx.n_rows - 1, ec = ctx.n_cols - 1
    cdef long long rr1, cc1, r, c
    cdef long long k, cs, base, j, cqr, cqc, cmin, cmax
    cdef int chas
    if not has:
        rr1 = qr + size
        if rr1 > er + 1: rr1 = er + 1
        cc1 = qc + size
        if cc1 > ec + 1: cc1 = ec + 1
        for r in range(qr, rr1):
            for c in range(qc, cc1):
                out[r, c] = vmax
        return
    k = ctx.lvl_k[level]
    cs = size // k
    base = _child_base(ctx, level, idx)
    for j in range(k * k):
        cqr = qr + (j // k) * cs
        cqc = qc + (j % k) * cs
        if cqr > er or cqc > ec:
            continue
        _child_values(ctx, level + 1, base + j, vmin, vmax, &cmin, &cmax, &chas)
        _decompress_rec(ctx, level + 1, base + j, cqr, cqc, cs,
                        cmin, cmax, chas, out)


def decompress(Ctx ctx):
    out = np.zeros((ctx.n_rows, ctx.n_cols), dtype=np.int64)
    cdef int64_t[:, ::1] out_mv = out
    ctx.visits += 1
    _decompress_rec(ctx, 0, 0, 0, 0, ctx.side, ctx.rmin, ctx.rmax,
                    1 if (ctx.h > 0 and ctx.rmin != ctx.rmax) else 0, out_mv)
    return out
