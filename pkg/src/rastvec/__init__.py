"""rastvec: raster/vector spatial queries over compressed self-indexed rasters.

Integer rasters are stored as compressed min/max quadtrees (topology bitmap
plus differential DACs sequences) and vector MBR sets as bulk-loaded R-trees.
The two query algorithms — a value-range spatial join and top-K
highest/lowest-value object retrieval — walk both structures in sync,
pruning with the min/max annotations.
"""

from .bitvec import RankBitmap, build_bitmap
from .dacs import DacsSequence, dacs_access, dacs_encode
from .k2raster import (
    DEFAULT_CONFIG,
    K2Config,
    K2Raster,
    NodeCursor,
    RasterMatrix,
    build,
    pad_to_square,
    plan_levels,
)
from .kernels import available_backends, default_backend_name
from .rtree import MBR, RTree, RTreeNode, VectorDataset, bulk_load
from .join import JoinResult, MbrOverlap, QuadOverlap, join
from .topk import TopKResult, top_k
from .baseline import (
    PlainRaster,
    baseline_join_cells,
    baseline_join_mbrs,
    baseline_topk_cells,
    baseline_topk_mbrs,
)

__version__ = "0.1.0"

__all__ = [
    "RankBitmap", "build_bitmap",
    "DacsSequence", "dacs_encode", "dacs_access",
    "RasterMatrix", "K2Config", "K2Raster", "NodeCursor",
    "build", "pad_to_square", "plan_levels", "DEFAULT_CONFIG",
    "MBR", "RTreeNode", "RTree", "VectorDataset", "bulk_load",
    "QuadOverlap", "MbrOverlap", "JoinResult", "join",
    "TopKResult", "top_k",
    "PlainRaster", "baseline_join_mbrs", "baseline_join_cells",
    "baseline_topk_mbrs", "baseline_topk_cells",
    "available_backends", "default_backend_name",
]
