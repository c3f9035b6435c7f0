"""Exact nearest-neighbour search over 2-d and 3-d points using Query Tables
derived from incremental Delaunay triangulation."""

from .applications import DpcDelta, dpc_delta, fps_sample
from .baselines import (KdTree, UniformGrid, grid_build, grid_nearest, kd_build,
                        kd_nearest, linear_nearest, linear_nearest_batch)
from .delaunay import InsertionOutcome, Triangulation, new_triangulation
from .estimators import (DensityPeakDelta, FarthestPointSampler, GridNeighbors,
                         KdTreeNeighbors, LinearNeighbors, QueryTableNeighbors)
from .exceptions import (DimensionError, DuplicatePointError, IndexFormatError,
                         OracleMismatchError, PointFileError)
from .geometry import (Aabb, Sign, generate_queries, generate_surface_cloud, in_sphere,
                       orient, squared_distance)
from .io import load_points
from .ordering import (InsertionOrder, OrderStrategy, SegmentTree, fps_order,
                       identity_order, seg_argmax, seg_build, seg_update, spatial_sort)
from .qtable import (NnsIndex, QueryStats, QueryTable, build, list_stats, load_index,
                     nearest, nearest_batch, nearest_prefix, save_index)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
