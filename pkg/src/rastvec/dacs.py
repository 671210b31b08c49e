"""Directly addressable codes for non-negative integer sequences.

Each value is split into fixed-width chunks, one per level; a continuation
bitmap per non-final level marks values that spill into the next level, and
rank over that bitmap locates the follow-up chunk. Access therefore costs
O(levels). Chunk widths are chosen by a small dynamic program that minimizes
total bits (payload + continuation bits) subject to a level cap.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional, Sequence

import numpy as np

from .bitvec import RankBitmap

DEFAULT_MAX_LEVELS = 3


def _bit_lengths(values: np.ndarray) -> np.ndarray:
    """Per-element bit length, with length(0) = 1. Exact for all int64."""
    v = values.astype(np.int64, copy=False)
    est = np.frexp(v.astype(np.float64))[1].astype(np.int64)
    est = np.clip(est, 1, 63)
    # float rounding can be off by one near 2^53 and above; fix exactly
    est = np.where((v >> est) > 0, est + 1, est)
    too_high = (est > 1) & ((v >> (est - 1)) == 0)
    est = np.where(too_high, est - 1, est)
    return est


def optimize_widths(lengths: np.ndarray, max_levels: int) -> list[int]:
    """Chunk widths minimizing total encoded bits with at most max_levels levels.

    Non-final levels cost (width + 1) bits per participating value (payload
    plus continuation bit); the final level has no continuation bitmap.
    """
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    if lengths.size == 0:
        return [1]
    maxlen = int(lengths.max())
    hist = np.bincount(lengths, minlength=maxlen + 1)
    # cnt_longer[w] = number of values needing more than w bits
    cnt_longer = np.zeros(maxlen + 1, dtype=np.int64)
    cnt_longer[:maxlen] = hist[::-1].cumsum()[::-1][1:]

    inf = float("inf")
    # dp[w] = min cost of non-final levels covering the first w bits
    dp = [inf] * (maxlen + 1)
    dp[0] = 0.0
    choice: dict[tuple[int, int], int] = {}
    best_cost, best_state = maxlen * int(cnt_longer[0]), (0, 0)
    for lvl in range(1, max_levels):
        ndp = [inf] * (maxlen + 1)
        for w in range(maxlen):
            if dp[w] is inf or cnt_longer[w] == 0:
                continue
            for b in range(1, maxlen - w + 1):
                cost = dp[w] + (b + 1) * int(cnt_longer[w])
                if cost < ndp[w + b]:
                    ndp[w + b] = cost
                    choice[(lvl, w + b)] = b
        dp = ndp
        for w in range(1, maxlen):
            if dp[w] < inf:
                total = dp[w] + (maxlen - w) * int(cnt_longer[w])
                if total < best_cost:
                    best_cost, best_state = total, (lvl, w)

    lvl, w = best_state
    widths = [maxlen - w]
    while lvl > 0:
        b = choice[(lvl, w)]
        widths.append(b)
        w -= b
        lvl -= 1
    widths.reverse()
    return widths


def _pack_chunks(chunks: np.ndarray, width: int) -> np.ndarray:
    """Pack width-bit integers LSB-first into uint64 words."""
    if chunks.size == 0:
        return np.zeros(0, dtype=np.uint64)
    bits = ((chunks[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(np.uint8)
    packed = np.packbits(bits.ravel(), bitorder="little")
    pad = (-packed.size) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8").copy()


def _unpack_chunks(words: np.ndarray, width: int, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    bits = np.unpackbits(words.view(np.uint8), bitorder="little", count=count * width)
    mat = bits.reshape(count, width).astype(np.int64)
    return (mat << np.arange(width, dtype=np.int64)).sum(axis=1)


@dataclass
class DacsLevel:
    width: int
    count: int
    words: np.ndarray
    cont: Optional[RankBitmap]  # None on the final level


class DacsSequence:
    """Immutable compressed integer sequence with positional access."""

    def __init__(self, levels: list[DacsLevel], length: int):
        self.levels = levels
        self.length = length

    @classmethod
    def encode(cls, values: Sequence[int], max_levels: int = DEFAULT_MAX_LEVELS) -> "DacsSequence":
        arr = np.asarray(values, dtype=np.int64).ravel()
        if arr.size and int(arr.min()) < 0:
            raise ValueError("DACs encodes non-negative integers only")
        lengths = _bit_lengths(arr) if arr.size else np.zeros(0, dtype=np.int64)
        widths = optimize_widths(lengths, max_levels)

        levels: list[DacsLevel] = []
        base = 0
        for li, b in enumerate(widths):
            mask = lengths > base if li else np.ones(arr.size, dtype=bool)
            vals = arr[mask]
            chunks = (vals >> base) & ((1 << b) - 1)
            last = li == len(widths) - 1
            cont = None
            if not last:
                cont = RankBitmap((lengths[mask] > base + b).astype(np.uint8))
            levels.append(DacsLevel(b, int(vals.size), _pack_chunks(chunks, b), cont))
            base += b
        return cls(levels, int(arr.size))

    def __len__(self) -> int:
        return self.length

    def access(self, i: int) -> int:
        """Reconstruct the i-th original value."""
        if not 0 <= i < self.length:
            raise IndexError(f"index {i} out of range [0, {self.length})")
        value = 0
        shift = 0
        idx = i
        for lvl in self.levels:
            bitpos = idx * lvl.width
            w, off = bitpos >> 6, bitpos & 63
            chunk = int(lvl.words[w]) >> off
            if off + lvl.width > 64:
                chunk |= int(lvl.words[w + 1]) << (64 - off)
            value |= (chunk & ((1 << lvl.width) - 1)) << shift
            if lvl.cont is None or lvl.cont[idx] == 0:
                break
            idx = lvl.cont.rank1(idx) - 1
            shift += lvl.width
        return value

    def decode_all(self) -> np.ndarray:
        """Vectorized inverse of encode (used by bulk paths and tests)."""
        if self.length == 0:
            return np.zeros(0, dtype=np.int64)
        out = np.zeros(self.length, dtype=np.int64)
        positions = np.arange(self.length)
        shift = 0
        for lvl in self.levels:
            chunks = _unpack_chunks(lvl.words, lvl.width, lvl.count)
            out[positions] |= chunks << shift
            if lvl.cont is None:
                break
            contbits = lvl.cont.to_bits().astype(bool)
            positions = positions[contbits]
            shift += lvl.width
        return out

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def payload_bits(self) -> int:
        total = 0
        for lvl in self.levels:
            total += lvl.width * lvl.count
            if lvl.cont is not None:
                total += len(lvl.cont)
        return total

    def serialized_bytes(self) -> int:
        total = 1 + 8
        for lvl in self.levels:
            total += 1 + 8 + lvl.words.size * 8
            if lvl.cont is not None:
                total += lvl.cont.serialized_bytes()
        return total

    # -- serialization: u8 level count, u64 length, then per level
    #    u8 width, u64 chunk count, payload words, continuation bitmap.

    def write(self, f: BinaryIO) -> None:
        f.write(struct.pack("<BQ", len(self.levels), self.length))
        for li, lvl in enumerate(self.levels):
            f.write(struct.pack("<BQ", lvl.width, lvl.count))
            f.write(lvl.words.astype("<u8").tobytes())
            if li != len(self.levels) - 1:
                lvl.cont.write(f)

    @classmethod
    def read(cls, f: BinaryIO) -> "DacsSequence":
        n_levels, length = struct.unpack("<BQ", f.read(9))
        levels = []
        for li in range(n_levels):
            width, count = struct.unpack("<BQ", f.read(9))
            n_words = -(-count * width // 64)
            raw = f.read(8 * n_words)
            words = np.frombuffer(raw, dtype="<u8").astype(np.uint64)
            cont = RankBitmap.read(f) if li != n_levels - 1 else None
            levels.append(DacsLevel(width, count, words, cont))
        return cls(levels, length)


def dacs_encode(values, max_levels: int = DEFAULT_MAX_LEVELS) -> DacsSequence:
    return DacsSequence.encode(values, max_levels)


def dacs_access(seq: DacsSequence, i: int) -> int:
    return seq.access(i)
