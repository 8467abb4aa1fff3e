import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from sgtools.config import ConfigSection
from sgtools.encoder.data import check_tensors, fan_in_uniform
from sgtools.errors import ConfigError

logger = logging.getLogger(__name__)

INSTANCE_NORM_EPS = 1e-5
# Features of the two sides of the similarity head's bipartite graph
AFA_INPUT_WIDTH = 2
AFFINITY_INIT_SCALE = 0.1


@dataclass(frozen=True)
class MatcherConfig(ConfigSection):
    section_name = 'matcher'

    sinkhorn_iters: int = 100
    sinkhorn_temperature: float = 0.1
    # Inference keeps iterating past sinkhorn_iters until the row residual
    # drops below this, for at most max_iter_factor * sinkhorn_iters rounds
    sinkhorn_tolerance: float = 1e-9
    max_iter_factor: int = 10
    train_sinkhorn_iters: int = 20
    afa_hidden: int = 8

    def validate(self):
        if self.sinkhorn_iters < 1 or self.train_sinkhorn_iters < 1:
            raise ConfigError("Sinkhorn needs at least one iteration")
        if self.sinkhorn_temperature <= 0:
            raise ConfigError("sinkhorn_temperature must be positive, got {}"
                              .format(self.sinkhorn_temperature))
        if self.max_iter_factor < 1:
            raise ConfigError("max_iter_factor must be at least 1")
        if self.afa_hidden < 1:
            raise ConfigError("afa_hidden must be at least 1")

    def tensor_shapes(self, d_s, d_p):
        h = self.afa_hidden
        return {
            'affinity.w_s': (d_s, d_s),
            'affinity.w_p': (d_p, d_p),
            'afa.w_msg': (AFA_INPUT_WIDTH, h),
            'afa.b_msg': (h,),
            'afa.a_pool': (h,),
            'afa.w_out': (2 * h,),
            'afa.b_out': (1,),
        }


class MatcherParams:
    """Matcher weights by tensor name; W_s and W_p start at 0.1 I."""

    def __init__(self, config, tensors):
        self.config = config
        self.tensors = {name: np.asarray(value, dtype=np.float64)
                        for name, value in tensors.items()}
        self.d_s = self.tensors['affinity.w_s'].shape[0]
        self.d_p = self.tensors['affinity.w_p'].shape[0]
        check_tensors(self.tensors, config.tensor_shapes(self.d_s, self.d_p),
                      'matcher')

    @classmethod
    def initialize(cls, config, d_s, d_p, seed):
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape in config.tensor_shapes(d_s, d_p).items():
            if name.startswith('affinity.'):
                tensors[name] = AFFINITY_INIT_SCALE * np.eye(shape[0])
            elif name in ('afa.b_msg', 'afa.b_out'):
                tensors[name] = np.zeros(shape)
            else:
                tensors[name] = fan_in_uniform(shape, rng)
        return cls(config, tensors)

    @property
    def sinkhorn_iters(self):
        return self.config.sinkhorn_iters

    @property
    def sinkhorn_temperature(self):
        return self.config.sinkhorn_temperature

    def replace_tensors(self, tensors):
        return MatcherParams(self.config, tensors)


def round_half_up(value):
    return int(np.floor(value + 0.5))


def topk_count(k_tilde, m_src, m_ref):
    """K = round(k~ * M_ref), clamped to [0, min(M_src, M_ref)]."""
    return max(0, min(round_half_up(k_tilde * m_ref), m_src, m_ref))


@dataclass
class SoftAlignment:
    """S~ with its dummy row/column, the similarity k~ and the top-K pairs.

    ``soft_matrix`` has source nodes on rows: shape (M_src + 1, M_ref + 1).
    ``selected_pairs`` holds (src node, ref node, score) triples.
    """
    soft_matrix: np.ndarray
    similarity: float
    selected_pairs: List[Tuple[int, int, float]] = field(default_factory=list)

    def __post_init__(self):
        self.soft_matrix = np.asarray(self.soft_matrix, dtype=np.float64)
        if self.soft_matrix.ndim != 2 or min(self.soft_matrix.shape) < 1:
            raise ValueError("soft_matrix must be a (M_src+1, M_ref+1) matrix")
        self.similarity = float(self.similarity)
        self.selected_pairs = [(int(i), int(j), float(s))
                               for i, j, s in self.selected_pairs]
        rows = [i for i, _, _ in self.selected_pairs]
        cols = [j for _, j, _ in self.selected_pairs]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("selected pairs must be row and column disjoint")

    @property
    def m_src(self):
        return self.soft_matrix.shape[0] - 1

    @property
    def m_ref(self):
        return self.soft_matrix.shape[1] - 1

    @property
    def interior(self):
        return self.soft_matrix[:-1, :-1]

    @property
    def k(self):
        return len(self.selected_pairs)

    @property
    def scores(self):
        return np.array([s for _, _, s in self.selected_pairs])

    def hard_matrix(self):
        """Binary M_src x M_ref matrix of the selected pairs."""
        hard = np.zeros((self.m_src, self.m_ref), dtype=np.int64)
        for i, j, _ in self.selected_pairs:
            hard[i, j] = 1
        return hard

    @classmethod
    def from_ground_truth(cls, gt_alignment):
        """Oracle alignment: all mass on gt pairs, the rest on the dummies."""
        gt = np.asarray(gt_alignment, dtype=np.float64)
        m_src, m_ref = gt.shape
        soft = np.zeros((m_src + 1, m_ref + 1))
        soft[:m_src, :m_ref] = gt
        soft[:m_src, m_ref] = 1.0 - gt.sum(axis=1)
        soft[m_src, :m_ref] = 1.0 - gt.sum(axis=0)
        pairs = [(int(i), int(j), 1.0) for i, j in np.argwhere(gt == 1)]
        similarity = len(pairs) / m_ref if m_ref else 0.0
        return cls(soft, similarity, pairs)
