"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python twin is
the fallback. `RASTVEC_BACKEND=python|native` forces a choice process-wide,
and individual structures can be rebuilt against either backend for
comparison benchmarks.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None

_FORCED = os.environ.get("RASTVEC_BACKEND", "").strip().lower()


def available_backends() -> list[str]:
    names = []
    if _kernels_cy is not None:
        names.append("native")
    names.append("python")
    return names


def get_backend(name: str = "auto"):
    """Return the kernel module for `name` ('auto', 'native' or 'python')."""
    if name == "auto":
        name = _FORCED or ("native" if _kernels_cy is not None else "python")
    if name == "native":
        if _kernels_cy is None:
            raise RuntimeError("compiled kernels are not available")
        return _kernels_cy
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}")


def default_backend_name() -> str:
    return get_backend("auto").NAME
