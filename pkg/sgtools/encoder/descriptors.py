"""Hand-crafted per-point geometric descriptors.

Each descriptor is built from the point's radius neighborhood: covariance
eigenvalue ratios, agreement of local normals, density and mean spread, and
optionally the height above the cloud centroid. Everything except the height
is invariant to rigid motion of the cloud. Rows are zero-padded to ``d_p``.
"""
import logging

import numpy as np

from sgtools.geometry.search import radius_neighbors

logger = logging.getLogger(__name__)

MIN_NEIGHBORS = 3

LINEARITY = 0
PLANARITY = 1
SPHERICITY = 2
OMNIVARIANCE = 3
ANISOTROPY = 4
EIGENENTROPY = 5
CURVATURE = 6
NORMAL_AGREEMENT = 7
NORMAL_SPREAD = 8
LOG_DENSITY = 9
MEAN_DISTANCE = 10
HEIGHT = 11
N_FEATURES = 12


def _local_frames(points, neighborhoods):
    """Sorted covariance eigenvalues and the normal of every neighborhood."""
    n = len(points)
    eigenvalues = np.zeros((n, 3))
    normals = np.zeros((n, 3))
    valid = np.zeros(n, dtype=bool)
    for i, members in enumerate(neighborhoods):
        if len(members) - 1 < MIN_NEIGHBORS:
            continue
        local = points[members]
        covariance = np.cov(local.T, bias=True)
        values, vectors = np.linalg.eigh(covariance)
        if values[2] <= 0:
            continue
        eigenvalues[i] = np.clip(values[::-1], 0.0, None)
        normals[i] = vectors[:, 0]
        valid[i] = True
    return eigenvalues, normals, valid


def point_descriptors(cloud, radius=0.3, rotation_invariant=True, d_p=32):
    """Returns the (N, d_p) descriptor matrix of a cloud.

    Points with fewer than MIN_NEIGHBORS other points inside ``radius`` get
    the zero descriptor.
    """
    points = np.asarray(getattr(cloud, 'points', cloud), dtype=np.float64)
    n = len(points)
    descriptors = np.zeros((n, d_p))
    if n == 0:
        return descriptors

    neighborhoods = [np.asarray(members, dtype=np.int64)
                     for members in radius_neighbors(points, radius)]
    eigenvalues, normals, valid = _local_frames(points, neighborhoods)
    centroid_height = points[:, 2].mean()

    for i in np.flatnonzero(valid):
        l1, l2, l3 = eigenvalues[i]
        total = l1 + l2 + l3
        members = neighborhoods[i]
        others = members[members != i]

        shares = np.clip(eigenvalues[i] / total, 1e-12, None)
        descriptors[i, LINEARITY] = (l1 - l2) / l1
        descriptors[i, PLANARITY] = (l2 - l3) / l1
        descriptors[i, SPHERICITY] = l3 / l1
        descriptors[i, OMNIVARIANCE] = np.cbrt(l1 * l2 * l3) / l1
        descriptors[i, ANISOTROPY] = (l1 - l3) / l1
        descriptors[i, EIGENENTROPY] = -np.sum(shares * np.log(shares))
        descriptors[i, CURVATURE] = l3 / total

        # Normals have no consistent sign, so only |cos| is meaningful
        neighbor_normals = others[valid[others]]
        if len(neighbor_normals):
            agreement = np.abs(normals[neighbor_normals] @ normals[i])
            descriptors[i, NORMAL_AGREEMENT] = agreement.mean()
            descriptors[i, NORMAL_SPREAD] = agreement.std()
        descriptors[i, LOG_DENSITY] = np.log1p(len(others))
        distances = np.linalg.norm(points[others] - points[i], axis=1)
        descriptors[i, MEAN_DISTANCE] = distances.mean() / radius
        if not rotation_invariant:
            descriptors[i, HEIGHT] = points[i, 2] - centroid_height

    logger.debug("{} of {} points have a descriptor (radius {})".format(
        int(valid.sum()), n, radius))
    return descriptors
