import logging

import numpy as np

from sgtools.encoder.descriptors import point_descriptors as describe_points
from sgtools.errors import ConfigError
from sgtools.registration.data import SuperpointSet

logger = logging.getLogger(__name__)

SHAPE_WIDTH = 3


def _shape_features(points):
    """Linearity, planarity and sphericity of a member set (zeros if < 3)."""
    if len(points) < 3:
        return np.zeros(SHAPE_WIDTH)
    values = np.linalg.eigvalsh(np.cov(points.T, bias=True))[::-1]
    if values[0] <= 0:
        return np.zeros(SHAPE_WIDTH)
    l1, l2, l3 = np.clip(values, 0.0, None)
    return np.array([(l1 - l2) / l1, (l2 - l3) / l1, l3 / l1])


def build_superpoints(cloud, voxel, point_descriptors=None,
                      descriptor_radius=0.3, point_indices=None):
    """Clusters a cloud on a voxel grid.

    Descriptors are the mean member point descriptor followed by member
    shape features; ``point_indices`` maps members back to a parent cloud.
    """
    if voxel <= 0:
        raise ConfigError("voxel must be positive, got {}".format(voxel))
    points = cloud.points
    if point_descriptors is None:
        point_descriptors = cloud.descriptors if cloud.descriptors is not None \
            else describe_points(cloud, descriptor_radius)
    point_descriptors = np.asarray(point_descriptors, dtype=np.float64)
    if not len(points):
        width = SHAPE_WIDTH + (point_descriptors.shape[1]
                               if point_descriptors.ndim == 2 else 0)
        return SuperpointSet(np.zeros((0, 3)), [], np.zeros((0, width)),
                             np.zeros(0, dtype=np.int64), points,
                             point_descriptors, point_indices)

    keys = np.floor(points / voxel).astype(np.int64)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    order = np.argsort(labels, kind='stable')
    counts = np.bincount(labels)
    members = np.split(order, np.cumsum(counts)[:-1])

    centers = np.array([points[m].mean(axis=0) for m in members])
    descriptors = np.array([
        np.concatenate([point_descriptors[m].mean(axis=0),
                        _shape_features(points[m])]) for m in members])
    object_ids = np.array([np.bincount(cloud.object_ids[m]).argmax()
                           for m in members], dtype=np.int64)
    logger.debug("{} points -> {} superpoints at voxel {}".format(
        len(points), len(members), voxel))
    return SuperpointSet(centers, members, descriptors, object_ids, points,
                         point_descriptors, point_indices)
