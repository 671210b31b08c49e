"""Static bit sequence with O(1)-ish rank support.

The bitmap is packed into little-endian uint64 words. A sampled directory of
cumulative popcounts (one uint32 per 1024 bits, ~3.1% of the payload) turns
rank into one lookup plus at most 16 word popcounts. rank1(i) counts 1-bits
through position i inclusive, the convention needed for level-order child
addressing.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

SUPERBLOCK_BITS = 1024
WORDS_PER_SUPER = SUPERBLOCK_BITS // 64


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array into LSB-first uint64 words."""
    if bits.size == 0:
        return np.zeros(0, dtype=np.uint64)
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    pad = (-packed.size) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8")


def build_superblocks(words: np.ndarray, length: int) -> np.ndarray:
    """Cumulative popcount at every 1024-bit boundary (exclusive)."""
    n_super = max(1, -(-length // SUPERBLOCK_BITS)) if length else 0
    if not n_super:
        return np.zeros(0, dtype=np.uint32)
    counts = np.bitwise_count(words).astype(np.uint64)
    per_super = np.add.reduceat(counts, np.arange(0, words.size, WORDS_PER_SUPER))
    out = np.zeros(n_super, dtype=np.uint32)
    out[1:] = np.cumsum(per_super[: n_super - 1])
    return out


class RankBitmap:
    """Immutable bitmap answering rank1 queries; safe for concurrent reads."""

    def __init__(self, bits) -> None:
        arr = np.asarray(bits, dtype=np.uint8).ravel()
        if arr.size and (arr.max() > 1):
            raise ValueError("bitmap input must contain only 0/1")
        self.length = int(arr.size)
        self.words = _pack_bits(arr)
        self.super = build_superblocks(self.words, self.length)
        self._ones = int(np.bitwise_count(self.words).sum()) if self.words.size else 0

    @classmethod
    def from_words(cls, words: np.ndarray, length: int) -> "RankBitmap":
        bm = cls.__new__(cls)
        bm.length = int(length)
        bm.words = np.ascontiguousarray(words, dtype=np.uint64)
        bm.super = build_superblocks(bm.words, bm.length)
        bm._ones = int(np.bitwise_count(bm.words).sum()) if bm.words.size else 0
        return bm

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"bit index {i} out of range [0, {self.length})")
        return (int(self.words[i >> 6]) >> (i & 63)) & 1

    def rank1(self, i: int) -> int:
        """Number of 1-bits among positions 0..i inclusive."""
        if not 0 <= i < self.length:
            raise IndexError(f"rank index {i} out of range [0, {self.length})")
        sb = i // SUPERBLOCK_BITS
        cnt = int(self.super[sb])
        w = i >> 6
        for j in range(sb * WORDS_PER_SUPER, w):
            cnt += int(self.words[j]).bit_count()
        tail = int(self.words[w]) & ((1 << ((i & 63) + 1)) - 1)
        return cnt + tail.bit_count()

    def count_ones(self) -> int:
        return self._ones

    @property
    def payload_bytes(self) -> int:
        return self.words.size * 8

    @property
    def directory_bytes(self) -> int:
        return self.super.size * 4

    def to_bits(self) -> np.ndarray:
        if self.length == 0:
            return np.zeros(0, dtype=np.uint8)
        raw = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return raw[: self.length]

    # -- serialization: u64 bit length, then raw little-endian words.
    # The rank directory is rebuilt on load.

    def write(self, f: BinaryIO) -> None:
        f.write(struct.pack("<Q", self.length))
        f.write(self.words.astype("<u8").tobytes())

    @classmethod
    def read(cls, f: BinaryIO) -> "RankBitmap":
        (length,) = struct.unpack("<Q", f.read(8))
        n_words = -(-length // 64)
        raw = f.read(8 * n_words)
        if len(raw) != 8 * n_words:
            raise ValueError("truncated bitmap payload")
        words = np.frombuffer(raw, dtype="<u8").astype(np.uint64)
        return cls.from_words(words, length)

    def serialized_bytes(self) -> int:
        return 8 + self.words.size * 8


def build_bitmap(bits) -> RankBitmap:
    """Build an immutable rank-supporting bitmap over the given bits."""
    return RankBitmap(bits)


def rank1(b: RankBitmap, i: int) -> int:
    return b.rank1(i)
