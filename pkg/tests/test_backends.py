"""Parity between the compiled kernels and the pure-Python fallback."""

import numpy as np
import pytest

from rastvec.baseline import PlainRaster, baseline_join_mbrs
from rastvec.join import join
from rastvec.kernels import available_backends, get_backend
from rastvec.topk import top_k

from fixtures import random_instance

needs_native = pytest.mark.skipif("native" not in available_backends(),
                                  reason="compiled kernels unavailable")


def test_backend_selection():
    assert get_backend("python").NAME == "python"
    assert get_backend("auto").NAME in ("native", "python")
    with pytest.raises(ValueError):
        get_backend("fortran")


@needs_native
def test_native_backend_loads():
    assert get_backend("native").NAME == "native"


@needs_native
def test_point_and_window_parity():
    rng = np.random.default_rng(71)
    for _ in range(40):
        m, raster, tree, lo, hi = random_instance(rng, max_side=32,
                                                  max_objects=15)
        nat = raster.with_backend("native")
        py = raster.with_backend("python")
        assert np.array_equal(nat.to_matrix(), py.to_matrix())
        full = (0, 0, m.n_rows - 1, m.n_cols - 1)
        assert np.array_equal(nat.cells_in_range(full, lo, hi),
                              py.cells_in_range(full, lo, hi))
        for _ in range(5):
            r = int(rng.integers(0, m.n_rows))
            c = int(rng.integers(0, m.n_cols))
            assert nat.get_cell(r, c) == py.get_cell(r, c)


@needs_native
def test_visit_counter_parity():
    rng = np.random.default_rng(72)
    for _ in range(25):
        m, raster, tree, lo, hi = random_instance(rng, max_side=24,
                                                  max_objects=10)
        nat = raster.with_backend("native")
        py = raster.with_backend("python")
        ja = join(tree, nat, lo, hi)
        jb = join(tree, py, lo, hi)
        assert ja == jb
        assert nat.node_count_visited() == py.node_count_visited()


@needs_native
def test_query_results_identical_across_backends():
    rng = np.random.default_rng(73)
    for _ in range(25):
        m, raster, tree, lo, hi = random_instance(rng, max_side=24,
                                                  max_objects=12)
        nat = raster.with_backend("native")
        py = raster.with_backend("python")
        plain = PlainRaster(m.values)
        expected = baseline_join_mbrs(plain, tree, lo, hi)
        assert join(tree, nat, lo, hi) == expected
        assert join(tree, py, lo, hi) == expected
        for direction in ("highest", "lowest"):
            assert top_k(tree, nat, 5, direction).entries \
                == top_k(tree, py, 5, direction).entries
