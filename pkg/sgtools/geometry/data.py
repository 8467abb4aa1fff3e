import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

logger = logging.getLogger(__name__)

ORTHONORMAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion x -> R x + t. Distances are in meters."""
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation,
                                 dtype=np.float64).reshape(3)
        gram_error = np.abs(rotation.T @ rotation - np.eye(3)).max()
        if gram_error > ORTHONORMAL_TOLERANCE:
            raise ValueError(
                "rotation is not orthonormal (max |R^T R - I| = {})".format(
                    gram_error)
            )
        if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOLERANCE:
            raise ValueError("rotation has determinant {} instead of +1".format(
                np.linalg.det(rotation)))
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=np.float64).reshape(4, 4)
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def random(cls, rng, max_rotation_deg=180.0, max_translation=3.0):
        """Draws a transform with rotation angle <= max_rotation_deg.

        A 180 degree bound samples the rotation uniformly over SO(3);
        translation is uniform per axis in [-max_translation, max_translation].
        """
        if max_rotation_deg >= 180.0:
            rotation = Rotation.random(random_state=rng).as_matrix()
        elif max_rotation_deg <= 0.0:
            rotation = np.eye(3)
        else:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = np.deg2rad(rng.uniform(0.0, max_rotation_deg))
            rotation = Rotation.from_rotvec(axis * angle).as_matrix()
        translation = rng.uniform(-max_translation, max_translation, size=3)
        return cls(_orthonormalize(rotation), translation)

    def apply(self, points):
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return points @ self.rotation.T + self.translation

    def compose(self, other):
        """Returns self o other, i.e. other is applied first."""
        return RigidTransform(
            _orthonormalize(self.rotation @ other.rotation),
            self.rotation @ other.translation + self.translation
        )

    def inverse(self):
        return RigidTransform(self.rotation.T,
                              -(self.rotation.T @ self.translation))

    def as_matrix(self):
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    def to_list(self):
        """Row-major 4x4 as a flat list of floats."""
        return [float(value) for value in self.as_matrix().reshape(-1)]

    @classmethod
    def from_list(cls, values):
        if len(values) != 16:
            raise ValueError(
                "transform needs 16 values, got {}".format(len(values)))
        return cls.from_matrix(np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class PointCloud:
    """Points with the point-to-object map (object_ids are node indices)."""
    points: np.ndarray
    object_ids: np.ndarray
    descriptors: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        object_ids = np.asarray(self.object_ids, dtype=np.int64).reshape(-1)
        if len(object_ids) != len(points):
            raise ValueError(
                "object_ids has {} entries for {} points".format(
                    len(object_ids), len(points))
            )
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'object_ids', object_ids)
        if self.descriptors is not None:
            descriptors = np.asarray(self.descriptors, dtype=np.float64)
            if descriptors.shape[0] != len(points):
                raise ValueError(
                    "descriptors have {} rows for {} points".format(
                        descriptors.shape[0], len(points))
                )
            object.__setattr__(self, 'descriptors', descriptors)

    def __len__(self):
        return len(self.points)

    def select(self, mask):
        """Returns the sub-cloud of points where mask is set."""
        mask = np.asarray(mask)
        return PointCloud(
            self.points[mask],
            self.object_ids[mask],
            None if self.descriptors is None else self.descriptors[mask]
        )

    def with_descriptors(self, descriptors):
        return PointCloud(self.points, self.object_ids, descriptors)


def apply_transform(transform, cloud):
    return PointCloud(transform.apply(cloud.points),
                      cloud.object_ids,
                      cloud.descriptors)


def _orthonormalize(rotation):
    # Projects onto SO(3) to stop drift from accumulating through compositions
    u, _, vt = np.linalg.svd(rotation)
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt
