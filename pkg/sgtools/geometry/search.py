import logging

import numpy as np
from scipy.spatial import cKDTree

from sgtools.errors import KTooLarge

logger = logging.getLogger(__name__)

# Below this size the exhaustive distance matrix is cheaper than a tree
EXHAUSTIVE_LIMIT = 64


def _points_of(cloud_or_points):
    points = getattr(cloud_or_points, 'points', cloud_or_points)
    return np.asarray(points, dtype=np.float64).reshape(-1, 3)


def knn_edges(cloud, k):
    """Returns a (N*k, 2) int array of directed edges i -> j.

    Every point gets exactly k edges to its k nearest other points. Ties in
    distance go to the smaller index, so the result is exact and does not
    depend on the tree layout.
    """
    points = _points_of(cloud)
    n = len(points)
    if k < 0 or k >= n:
        raise KTooLarge(
            "k={} needs at least {} points, cloud has {}".format(k, k + 1, n))
    if k == 0:
        return np.zeros((0, 2), dtype=np.int64)

    if n < EXHAUSTIVE_LIMIT:
        neighbors = _exhaustive_knn(points, k)
    else:
        neighbors = _tree_knn(points, k)

    sources = np.repeat(np.arange(n), k)
    return np.stack([sources, neighbors.reshape(-1)], axis=1)


def _exhaustive_knn(points, k):
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    n = len(points)
    neighbors = np.empty((n, k), dtype=np.int64)
    indices = np.arange(n)
    for i in range(n):
        row = dist[i].copy()
        row[i] = np.inf
        order = np.lexsort((indices, row))
        neighbors[i] = order[:k]
    return neighbors


def _tree_knn(points, k):
    tree = cKDTree(points)
    n = len(points)
    dist, _ = tree.query(points, k=k + 1)
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        # Everything at or inside the k-th distance, so no tied point is lost
        radius = dist[i, k]
        candidates = np.asarray(
            tree.query_ball_point(points[i], r=radius * (1.0 + 1e-12) + 1e-15),
            dtype=np.int64
        )
        candidates = candidates[candidates != i]
        cand_dist = np.sqrt(((points[candidates] - points[i]) ** 2).sum(axis=1))
        order = np.lexsort((candidates, cand_dist))
        neighbors[i] = candidates[order[:k]]
    return neighbors


def nearest_neighbors(query, reference):
    """Distance and index of the nearest reference point for each query."""
    query = _points_of(query)
    reference = _points_of(reference)
    tree = cKDTree(reference)
    dist, index = tree.query(query, k=1)
    return dist, index


def radius_neighbors(points, radius):
    """Index lists of all points within radius of each point (self included)."""
    points = _points_of(points)
    tree = cKDTree(points)
    return tree.query_ball_point(points, r=radius)
