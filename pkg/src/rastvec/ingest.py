"""Dataset ingestion and synthesis.

Grid rasters arrive as ESRI-ASCII-style text (header then whitespace
separated row-major values); float values are quantized by decimal-digit
truncation, floor(v * 10^d), which preserves ordering. Nodata cells are
remapped to the dataset minimum and reported through a mask so callers can
persist a sidecar. Vector MBRs arrive as CSV, either directly in cell
coordinates or in world coordinates mapped through an affine grid transform.
Synthetic rasters cover the uniformity spectrum the compressor cares about,
from constant through midpoint-displacement noise to white noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .k2raster import RasterMatrix
from .rtree import MBR, VectorDataset


class GridParseError(ValueError):
    pass


class MbrCsvError(ValueError):
    pass


_HEADER_KEYS = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize",
                "nodata_value"}


def quantize(values: np.ndarray, digits: int) -> np.ndarray:
    """floor(v * 10^digits): order-preserving decimal truncation."""
    return np.floor(values * float(10 ** digits)).astype(np.int64)


def parse_ascii_grid(path, digits: int = 0) -> RasterMatrix:
    """Parse an ESRI-ASCII-style grid, quantizing values to integers."""
    with open(path) as f:
        lines = f.readlines()

    header: dict[str, float] = {}
    body_start = 0
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) == 2 and parts[0].lower() in _HEADER_KEYS:
            try:
                header[parts[0].lower()] = float(parts[1])
            except ValueError:
                raise GridParseError(
                    f"line {i + 1}: bad header value {parts[1]!r}") from None
            body_start = i + 1
        else:
            break

    if "ncols" not in header or "nrows" not in header:
        raise GridParseError("header must declare ncols and nrows")
    n_cols, n_rows = int(header["ncols"]), int(header["nrows"])
    if n_cols < 1 or n_rows < 1:
        raise GridParseError("ncols and nrows must be positive")
    nodata = header.get("nodata_value")

    values = np.empty((n_rows, n_cols), dtype=np.float64)
    row = 0
    for i in range(body_start, len(lines)):
        tokens = lines[i].split()
        if not tokens:
            continue
        if row >= n_rows:
            raise GridParseError(
                f"line {i + 1}: more data rows than nrows={n_rows}")
        if len(tokens) != n_cols:
            raise GridParseError(
                f"line {i + 1} (data row {row + 1}): expected {n_cols} "
                f"values, found {len(tokens)}")
        for col, tok in enumerate(tokens):
            try:
                values[row, col] = float(tok)
            except ValueError:
                raise GridParseError(
                    f"line {i + 1}, column {col + 1}: "
                    f"non-numeric token {tok!r}") from None
        row += 1
    if row != n_rows:
        raise GridParseError(
            f"expected {n_rows} data rows, found {row}")

    mask = None
    if nodata is not None:
        mask = values == nodata
        if mask.all():
            raise GridParseError("grid contains only nodata cells")
        if mask.any():
            values = values.copy()
            values[mask] = values[~mask].min()
    quantized = quantize(values, digits)
    m = RasterMatrix.from_array(quantized)
    m.nodata_mask = mask if mask is not None and mask.any() else None
    return m


def write_ascii_grid(path, matrix: RasterMatrix, cellsize: float = 1.0) -> None:
    with open(path, "w") as f:
        f.write(f"ncols {matrix.n_cols}\n")
        f.write(f"nrows {matrix.n_rows}\n")
        f.write("xllcorner 0\n")
        f.write("yllcorner 0\n")
        f.write(f"cellsize {cellsize}\n")
        for row in matrix.values:
            f.write(" ".join(str(int(v)) for v in row) + "\n")


def _plasma(rng: np.random.Generator, n_rows: int, n_cols: int) -> np.ndarray:
    """Midpoint-displacement (diamond-square) noise, cropped to the extent."""
    size = 1
    while size + 1 < max(n_rows, n_cols):
        size *= 2
    n = size + 1
    grid = np.zeros((n, n))
    grid[0, 0], grid[0, -1], grid[-1, 0], grid[-1, -1] = rng.normal(0, 1, 4)
    step = size
    scale = 1.0
    while step > 1:
        half = step // 2
        # diamond: centers from block corners
        r = np.arange(half, n, step)
        c = np.arange(half, n, step)
        rr, cc = np.meshgrid(r, c, indexing="ij")
        grid[rr, cc] = (grid[rr - half, cc - half] + grid[rr - half, cc + half]
                        + grid[rr + half, cc - half] + grid[rr + half, cc + half]) / 4 \
            + rng.normal(0, scale, rr.shape)
        # square: edge midpoints from their axis neighbours
        for rows, cols in (
            (np.arange(half, n, step), np.arange(0, n, step)),
            (np.arange(0, n, step), np.arange(half, n, step)),
        ):
            rr, cc = np.meshgrid(rows, cols, indexing="ij")
            acc = np.zeros(rr.shape)
            cnt = np.zeros(rr.shape)
            for dr, dc in ((-half, 0), (half, 0), (0, -half), (0, half)):
                ok = ((rr + dr >= 0) & (rr + dr < n)
                      & (cc + dc >= 0) & (cc + dc < n))
                acc[ok] += grid[rr[ok] + dr, cc[ok] + dc]
                cnt[ok] += 1
            grid[rr, cc] = acc / cnt + rng.normal(0, scale, rr.shape)
        step = half
        # decay tuned for terrain-like smoothness: integer quantization then
        # leaves uniform patches the compressor can collapse
        scale *= 0.45
    return grid[:n_rows, :n_cols]


def synth_raster(kind: str, seed: int, n_rows: int, n_cols: int,
                 value_span: int) -> RasterMatrix:
    """Deterministic synthetic raster with values in [0, value_span]."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("raster dimensions must be >= 1")
    if value_span < 0:
        raise ValueError("value_span must be >= 0")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        values = np.full((n_rows, n_cols), value_span, dtype=np.int64)
    elif kind == "gradient":
        span_rc = max(1, (n_rows - 1) + (n_cols - 1))
        r = np.arange(n_rows)[:, None]
        c = np.arange(n_cols)[None, :]
        values = (r + c) * value_span // span_rc
    elif kind == "plasma":
        noise = _plasma(rng, n_rows, n_cols)
        lo, hi = noise.min(), noise.max()
        unit = (noise - lo) / (hi - lo) if hi > lo else np.zeros_like(noise)
        values = np.minimum(np.floor(unit * (value_span + 1)),
                            value_span).astype(np.int64)
    elif kind == "random":
        values = rng.integers(0, value_span + 1, size=(n_rows, n_cols),
                              dtype=np.int64)
    else:
        raise ValueError(f"unknown synthetic raster kind {kind!r}")
    return RasterMatrix(n_rows, n_cols, values.astype(np.int64))


@dataclass(frozen=True)
class GridTransform:
    """Affine world-to-cell mapping for a north-up grid."""

    origin_x: float
    origin_y: float
    cell_size: float

    def to_cell(self, x: float, y: float) -> tuple[int, int]:
        col = math.floor((x - self.origin_x) / self.cell_size)
        row = math.floor((self.origin_y - y) / self.cell_size)
        return row, col

    def mbr_from_world(self, x_lo, y_lo, x_hi, y_hi) -> MBR:
        row_lo, col_lo = self.to_cell(x_lo, y_hi)
        row_hi, col_hi = self.to_cell(x_hi, y_lo)
        return MBR(row_lo, col_lo, row_hi, col_hi)


def parse_mbr_csv(path, transform: Optional[GridTransform] = None,
                  extent: Optional[tuple[int, int]] = None) -> VectorDataset:
    """Parse `id,row_lo,col_lo,row_hi,col_hi` lines (world coords with a
    transform). MBRs are clipped to the extent; objects fully outside are
    dropped."""
    objects: list[tuple[int, MBR]] = []
    seen: set[int] = set()
    with open(path) as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 5:
                raise MbrCsvError(f"row {ln}: expected 5 fields, got {len(parts)}")
            try:
                oid = int(parts[0])
            except ValueError:
                raise MbrCsvError(f"row {ln}: bad object id {parts[0]!r}") from None
            if oid in seen:
                raise MbrCsvError(f"row {ln}: duplicate object id {oid}")
            seen.add(oid)
            try:
                if transform is not None:
                    coords = [float(p) for p in parts[1:]]
                    mbr = transform.mbr_from_world(*coords)
                else:
                    a, b, c, d = (int(p) for p in parts[1:])
                    if a > c or b > d:
                        raise MbrCsvError(
                            f"row {ln}: inverted bounds ({a},{b})-({c},{d})")
                    mbr = MBR(a, b, c, d)
            except MbrCsvError:
                raise
            except ValueError as exc:
                raise MbrCsvError(f"row {ln}: {exc}") from None
            if extent is not None:
                n_rows, n_cols = extent
                r0, c0 = max(mbr.row_lo, 0), max(mbr.col_lo, 0)
                r1, c1 = min(mbr.row_hi, n_rows - 1), min(mbr.col_hi, n_cols - 1)
                if r0 > r1 or c0 > c1:
                    continue
                mbr = MBR(r0, c0, r1, c1)
            objects.append((oid, mbr))
    return VectorDataset(objects)


def write_mbr_csv(path, dataset: VectorDataset) -> None:
    with open(path, "w") as f:
        for oid, b in dataset.objects:
            f.write(f"{oid},{b.row_lo},{b.col_lo},{b.row_hi},{b.col_hi}\n")
