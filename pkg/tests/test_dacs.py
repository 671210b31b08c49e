import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rastvec.dacs import DacsSequence, dacs_access, dacs_encode, optimize_widths


def test_all_zero():
    seq = dacs_encode([0, 0, 0])
    assert [seq.access(i) for i in range(3)] == [0, 0, 0]


def test_singleton():
    assert dacs_encode([5]).access(0) == 5


def test_large_single_value():
    assert dacs_encode([2**20]).access(0) == 1 << 20


def test_identity_sequence():
    seq = dacs_encode(list(range(100)))
    assert seq.access(42) == 42
    assert np.array_equal(seq.decode_all(), np.arange(100))


def test_repeated_value():
    seq = dacs_encode([7, 7, 7])
    assert seq.access(1) == 7


def test_rejects_negative():
    with pytest.raises(ValueError):
        dacs_encode([3, -1, 2])


def test_rejects_out_of_range_access():
    seq = dacs_encode([1, 2, 3])
    for i in (-1, 3, 10):
        with pytest.raises(IndexError):
            dacs_access(seq, i)


def test_empty_sequence():
    seq = dacs_encode([])
    assert len(seq) == 0
    with pytest.raises(IndexError):
        seq.access(0)
    buf = io.BytesIO()
    seq.write(buf)
    buf.seek(0)
    assert len(DacsSequence.read(buf)) == 0


def test_geometric_round_trip():
    rng = np.random.default_rng(9)
    values = rng.geometric(0.02, 10_000).astype(np.int64) - 1
    seq = dacs_encode(values)
    assert np.array_equal(seq.decode_all(), values)
    for i in rng.integers(0, len(values), 500):
        assert seq.access(int(i)) == values[i]


def test_geometric_beats_fixed_width():
    rng = np.random.default_rng(10)
    values = rng.geometric(0.05, 10_000).astype(np.int64) - 1
    seq = dacs_encode(values)
    width = max(1, int(values.max()).bit_length())
    fixed_bits = width * len(values)
    # payload must not exceed the flat fixed-width encoding (plus a little
    # slack for the rank directories of the continuation bitmaps)
    assert seq.payload_bits() <= fixed_bits
    assert seq.serialized_bytes() <= fixed_bits // 8 + 0.07 * fixed_bits // 8 + 64


def test_level_cap_respected():
    rng = np.random.default_rng(12)
    values = rng.geometric(0.001, 5000).astype(np.int64)
    for cap in (1, 2, 3, 5):
        seq = dacs_encode(values, max_levels=cap)
        assert seq.n_levels <= cap
        assert np.array_equal(seq.decode_all(), values)


def test_single_level_is_fixed_width():
    seq = dacs_encode([1, 2, 3, 255], max_levels=1)
    assert seq.n_levels == 1
    assert seq.levels[0].width == 8
    assert seq.levels[0].cont is None


def test_optimizer_minimizes_against_brute_force():
    # exhaustive check of the width optimizer on small length caps
    rng = np.random.default_rng(13)
    for _ in range(30):
        lengths = rng.integers(1, 9, 60)
        maxlen = int(lengths.max())
        cnt_longer = [(lengths > w).sum() for w in range(maxlen + 1)]

        def cost(widths):
            total, base = 0, 0
            for li, b in enumerate(widths):
                n = cnt_longer[base]
                total += (b + 1) * n if li < len(widths) - 1 else b * n
                base += b
            return total

        def enumerate_splits(remaining, levels):
            if levels == 1:
                yield [remaining]
                return
            for b in range(1, remaining + 1):
                if b == remaining:
                    yield [b]
                    continue
                for rest in enumerate_splits(remaining - b, levels - 1):
                    yield [b] + rest

        best = min(cost(w) for w in enumerate_splits(maxlen, 3))
        got = optimize_widths(lengths, 3)
        assert cost(got) == best


def test_serialization_round_trip():
    rng = np.random.default_rng(14)
    values = np.concatenate([
        rng.integers(0, 4, 500),
        rng.integers(0, 2**20, 50),
        [0, 1, 2**40],
    ]).astype(np.int64)
    seq = dacs_encode(values)
    buf = io.BytesIO()
    seq.write(buf)
    assert len(buf.getvalue()) == seq.serialized_bytes()
    buf.seek(0)
    back = DacsSequence.read(buf)
    assert np.array_equal(back.decode_all(), values)
    assert back.access(502) == values[502]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2**48), min_size=0, max_size=200),
       st.integers(1, 4))
def test_round_trip_property(values, max_levels):
    seq = dacs_encode(values, max_levels)
    assert seq.n_levels <= max_levels
    for i, v in enumerate(values):
        assert seq.access(i) == v
