"""scikit-learn style wrappers around the indices and applications."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import baselines
from .applications import dpc_delta, fps_sample
from .ordering import fps_order, identity_order, OrderStrategy, spatial_sort
from .qtable import build, list_stats, nearest_batch

__all__ = [
    "QueryTableNeighbors",
    "KdTreeNeighbors",
    "GridNeighbors",
    "LinearNeighbors",
    "FarthestPointSampler",
    "DensityPeakDelta",
    "make_order",
]


def make_order(points, strategy, seed=0, start_index=0):
    """Insertion order for ``points`` under the named strategy."""
    strategy = OrderStrategy.parse(strategy)
    if strategy is OrderStrategy.IDENTITY:
        return identity_order(points.shape[0])
    if strategy is OrderStrategy.SPATIAL:
        return spatial_sort(points, seed=seed)
    return fps_order(points, start_index=start_index, seed=seed)


def _check_points(X):
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] not in (2, 3):
        raise ValueError(f"expected 2-d or 3-d points, got {X.shape[1]} features")
    return np.ascontiguousarray(X)


class _NeighborsBase(BaseEstimator):
    """Shared ``kneighbors`` plumbing. Only one neighbour is supported."""

    def _check_query(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} "
                f"was fitted with {self.n_features_in_}")
        return np.ascontiguousarray(X)

    def kneighbors(self, X, n_neighbors=1, return_distance=True):
        """Nearest fitted point for each row of ``X``.

        Returns ``(distances, indices)`` of shape ``(m, 1)``, or just the
        indices when ``return_distance`` is false.
        """
        if n_neighbors != 1:
            raise ValueError("only n_neighbors=1 is supported")
        X = self._check_query(X)
        idx = self._query(X)
        ind = idx.reshape(-1, 1)
        if not return_distance:
            return ind
        diff = self._fit_X[idx] - X
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff)).reshape(-1, 1)
        return dist, ind

    def predict(self, X):
        """Index of the nearest fitted point for each row of ``X``."""
        return self._query(self._check_query(X))


class QueryTableNeighbors(_NeighborsBase):
    """Exact nearest neighbours through a Delaunay-derived Query Table.

    Parameters
    ----------
    strategy : {"identity", "spatial", "fps"}
        Insertion order used to build the table.
    seed : int
        Seeds the spatial shuffle and the point-location walk.
    start_index : int
        Seed point of the farthest-point order.

    Attributes
    ----------
    index_ : NnsIndex
    order_ : InsertionOrder
    last_stats_ : dict of ndarray
        Per-query work counters from the most recent query call.
    """

    def __init__(self, strategy="fps", seed=0, start_index=0):
        self.strategy = strategy
        self.seed = seed
        self.start_index = start_index

    def fit(self, X, y=None):
        X = _check_points(X)
        self.order_ = make_order(X, self.strategy, self.seed, self.start_index)
        self.index_ = build(X, self.order_, seed=self.seed)
        self._fit_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def _query(self, X, k=None):
        idx, stats = nearest_batch(self.index_, X, k)
        self.last_stats_ = stats
        return idx

    def kneighbors_prefix(self, X, k):
        """Nearest point among the first ``k`` inserted, for each row of ``X``."""
        return self._query(self._check_query(X), k)

    def list_stats(self):
        check_is_fitted(self, "index_")
        return list_stats(self.index_)


class KdTreeNeighbors(_NeighborsBase):
    """Nearest neighbours through a median-split KD-tree."""

    def __init__(self, leaf_size=10):
        self.leaf_size = leaf_size

    def fit(self, X, y=None):
        X = _check_points(X)
        self.tree_ = baselines.KdTree(X, self.leaf_size)
        self._fit_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def _query(self, X):
        idx, self.last_comparisons_ = self.tree_.query_batch(X)
        return idx


class GridNeighbors(_NeighborsBase):
    """Nearest neighbours through a uniform grid."""

    def __init__(self, factor=3.0):
        self.factor = factor

    def fit(self, X, y=None):
        X = _check_points(X)
        self.grid_ = baselines.UniformGrid(X, factor=self.factor)
        self._fit_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def _query(self, X):
        idx, self.last_comparisons_ = self.grid_.query_batch(X)
        return idx


class LinearNeighbors(_NeighborsBase):
    """Brute-force nearest neighbours; the reference answer."""

    def fit(self, X, y=None):
        X = _check_points(X)
        self._fit_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def _query(self, X):
        return baselines.linear_nearest_batch(self._fit_X, X)


class FarthestPointSampler(TransformerMixin, BaseEstimator):
    """Select ``n_samples`` points by farthest-point sampling.

    ``transform`` returns the selected rows of the fitted data.
    """

    def __init__(self, n_samples=1, start_index=0):
        self.n_samples = n_samples
        self.start_index = start_index

    def fit(self, X, y=None):
        X = _check_points(X)
        self.indices_ = fps_sample(X, self.n_samples, self.start_index)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "indices_")
        X = check_array(X, dtype=np.float64)
        return X[self.indices_]


class DensityPeakDelta(BaseEstimator):
    """Delta distances of density-peak clustering for given densities.

    ``fit(X, rho)`` stores ``delta_``, ``nearest_higher_`` and
    ``distance_evaluations_``.
    """

    def fit(self, X, rho):
        X = _check_points(X)
        res = dpc_delta(X, rho)
        self.delta_ = res.delta
        self.nearest_higher_ = res.nearest_higher
        self.distance_evaluations_ = res.distance_evaluations
        self.n_features_in_ = X.shape[1]
        return self
