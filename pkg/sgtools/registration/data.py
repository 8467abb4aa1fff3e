import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from sgtools.config import ConfigSection
from sgtools.errors import ConfigError

logger = logging.getLogger(__name__)

SUPERPOINT = 'superpoint'
POINT = 'point'


class Strategy(Enum):
    A2A = 'a2a'
    OPO = 'opo'
    OPO_SCORE = 'opo-s'
    OPO_TOPK = 'opo-k'
    O2O = 'o2o'


class Estimator(Enum):
    SVD = 'svd'
    LGR = 'lgr'
    RANSAC = 'ransac'


@dataclass(frozen=True)
class RegistrationConfig(ConfigSection):
    section_name = 'registration'

    voxel: float = 0.25
    gamma: float = 0.2
    top_m: int = 128
    mutual: bool = True
    ratio: float = 0.8
    descriptor_radius: float = 0.3
    strategy: str = 'o2o'
    opo_score_threshold: float = 0.5
    opo_top_k: int = 5
    estimator: str = 'svd'
    inlier_radius: float = 0.05
    ransac_iters: int = 1000
    refine_iters: int = 5
    seed: int = 0
    # mosaicking: an edge needs this inlier ratio and count to join the graph
    min_inlier_ratio: float = 0.2
    min_inliers: int = 10

    def validate(self):
        if self.voxel <= 0:
            raise ConfigError("voxel must be positive, got {}".format(
                self.voxel))
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0, got {}".format(self.gamma))
        if self.top_m < 1:
            raise ConfigError("top_m must be at least 1")
        if not 0 < self.ratio <= 1:
            raise ConfigError("ratio must lie in (0, 1]")
        if self.inlier_radius <= 0 or self.descriptor_radius <= 0:
            raise ConfigError("radii must be positive")
        try:
            Strategy(self.strategy)
        except ValueError:
            raise ConfigError("unknown strategy '{}', expected one of {}"
                              .format(self.strategy,
                                      ', '.join(s.value for s in Strategy)))
        if self.opo_top_k < 1:
            raise ConfigError("opo_top_k must be at least 1")
        try:
            Estimator(self.estimator)
        except ValueError:
            raise ConfigError("unknown estimator '{}', expected one of {}"
                              .format(self.estimator,
                                      ', '.join(e.value for e in Estimator)))

    @property
    def strategy_enum(self):
        return Strategy(self.strategy)

    @property
    def estimator_enum(self):
        return Estimator(self.estimator)


@dataclass
class SuperpointSet:
    """Voxel clusters of a cloud; ``members`` index into ``points``."""
    centers: np.ndarray
    members: List[np.ndarray]
    descriptors: np.ndarray
    object_ids: np.ndarray
    points: np.ndarray
    point_descriptors: np.ndarray
    point_indices: np.ndarray = None

    def __post_init__(self):
        if self.point_indices is None:
            self.point_indices = np.arange(len(self.points))

    def __len__(self):
        return len(self.centers)


@dataclass
class CorrespondenceSet:
    """Scored (ref point, src point) pairs.

    Indices refer to the full input clouds; ``groups`` tells which
    superpoint pair produced each correspondence.
    """
    ref_indices: np.ndarray
    src_indices: np.ndarray
    scores: np.ndarray
    src_points: np.ndarray
    ref_points: np.ndarray
    groups: np.ndarray = None
    level: str = POINT

    def __post_init__(self):
        self.ref_indices = np.asarray(self.ref_indices, dtype=np.int64)
        self.src_indices = np.asarray(self.src_indices, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.src_points = np.asarray(self.src_points,
                                     dtype=np.float64).reshape(-1, 3)
        self.ref_points = np.asarray(self.ref_points,
                                     dtype=np.float64).reshape(-1, 3)
        if self.groups is None:
            self.groups = np.zeros(len(self.scores), dtype=np.int64)
        self.groups = np.asarray(self.groups, dtype=np.int64)
        count = len(self.scores)
        if not (len(self.ref_indices) == len(self.src_indices) == count ==
                len(self.src_points) == len(self.ref_points) ==
                len(self.groups)):
            raise ValueError("correspondence fields differ in length")
        if count and (not np.all(np.isfinite(self.scores)) or
                      self.scores.min() < 0):
            raise ValueError("correspondence scores must be finite and >= 0")

    def __len__(self):
        return len(self.scores)

    @classmethod
    def empty(cls, level=POINT):
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros((0, 3)),
                   np.zeros((0, 3)), np.zeros(0), level)

    @classmethod
    def concatenate(cls, parts, level=POINT):
        """Pools several sets, keeping their groups apart."""
        if not parts:
            return cls.empty(level)
        offset, groups = 0, []
        for part in parts:
            groups.append(part.groups + offset)
            offset += int(part.groups.max()) + 1 if len(part) else 0
        return cls(np.concatenate([p.ref_indices for p in parts]),
                   np.concatenate([p.src_indices for p in parts]),
                   np.concatenate([p.scores for p in parts]),
                   np.concatenate([p.src_points for p in parts]),
                   np.concatenate([p.ref_points for p in parts]),
                   np.concatenate(groups), level)


@dataclass
class RegistrationResult:
    transform: object
    correspondences: CorrespondenceSet
    strategy: Strategy
    inliers: np.ndarray = field(default=None)
