import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rastvec.bitvec import RankBitmap, build_bitmap

from reference import rank_oracle


def test_empty_bitmap():
    bm = build_bitmap([])
    assert len(bm) == 0
    with pytest.raises(IndexError):
        bm.rank1(0)


def test_small_direct_counts():
    bm = build_bitmap([1, 0, 1, 1])
    assert bm.rank1(3) == 3
    assert bm.rank1(0) == 1
    assert bm.rank1(1) == 1

    assert build_bitmap([0, 0, 0, 0]).rank1(3) == 0
    assert build_bitmap([1, 1, 1]).rank1(2) == 3


def test_rank_matches_prefix_sums_on_random_vector():
    rng = np.random.default_rng(42)
    bits = rng.integers(0, 2, 10_000).astype(np.uint8)
    bm = build_bitmap(bits)
    oracle = rank_oracle(bits)
    for i in range(len(bits)):
        assert bm.rank1(i) == oracle[i]


def test_rank_difference_recovers_bits():
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, 3000).astype(np.uint8)
    bm = build_bitmap(bits)
    prev = 0
    for i in range(len(bits)):
        r = bm.rank1(i)
        assert r - prev == bits[i]
        assert bm[i] == bits[i]
        prev = r


def test_rank_rejects_out_of_range():
    bm = build_bitmap([1, 0, 1])
    for i in (-1, 3, 100):
        with pytest.raises(IndexError):
            bm.rank1(i)


def test_input_validation():
    with pytest.raises(ValueError):
        build_bitmap([0, 2, 1])


def test_serialization_round_trip():
    rng = np.random.default_rng(11)
    for length in (0, 1, 63, 64, 65, 1024, 1025, 5000):
        bits = rng.integers(0, 2, length).astype(np.uint8)
        bm = build_bitmap(bits)
        buf = io.BytesIO()
        bm.write(buf)
        buf.seek(0)
        back = RankBitmap.read(buf)
        assert len(back) == length
        assert np.array_equal(back.to_bits(), bits)
        oracle = rank_oracle(bits)
        for i in range(length):
            assert back.rank1(i) == oracle[i]


def test_truncated_stream_rejected():
    bm = build_bitmap(np.ones(100, dtype=np.uint8))
    buf = io.BytesIO()
    bm.write(buf)
    raw = buf.getvalue()[:-4]
    with pytest.raises(ValueError):
        RankBitmap.read(io.BytesIO(raw))


def test_directory_overhead_within_budget():
    bits = np.random.default_rng(5).integers(0, 2, 500_000).astype(np.uint8)
    bm = build_bitmap(bits)
    assert bm.directory_bytes <= 0.06 * bm.payload_bytes


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=400))
def test_rank_property(bits):
    bm = build_bitmap(bits)
    total = 0
    for i, b in enumerate(bits):
        total += b
        assert bm.rank1(i) == total
    assert bm.count_ones() == total
