import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from sgtools.config import ConfigSection
from sgtools.errors import ConfigError
from sgtools.geometry.data import PointCloud, RigidTransform

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

RELATIONS = ('supported_by', 'supports', 'near', 'larger_than')
SUPPORTED_BY, SUPPORTS, NEAR, LARGER_THAN = range(len(RELATIONS))

SHAPES = ('box', 'sphere', 'cylinder', 'plane')

# Principal extents are divided by this before entering the attribute vector
EXTENT_SCALE = 2.0

PRESETS = ('default', 'symmetric', 'twins')


@dataclass(frozen=True)
class GeneratorConfig(ConfigSection):
    section_name = 'generator'

    min_nodes: int = 6
    max_nodes: int = 12
    min_overlap: float = 0.3
    max_overlap: float = 1.0
    n_classes: int = 12
    n_relations: int = len(RELATIONS)
    min_points: int = 40
    max_points: int = 80
    max_rotation_deg: float = 180.0
    max_translation: float = 3.0
    noise_sigma: float = 0.0
    near_radius: float = 1.5
    stack_probability: float = 0.25
    preset: str = 'default'
    dynamic_object_rate: float = 0.0
    resample_shared: bool = False
    max_attempts: int = 100

    def validate(self):
        if self.min_nodes < 1 or self.max_nodes < self.min_nodes:
            raise ConfigError("node range [{}, {}] is invalid".format(
                self.min_nodes, self.max_nodes))
        if not 0.0 <= self.min_overlap <= self.max_overlap <= 1.0:
            raise ConfigError("overlap range [{}, {}] is invalid".format(
                self.min_overlap, self.max_overlap))
        if self.min_points < 1 or self.max_points < self.min_points:
            raise ConfigError("points-per-object range [{}, {}] is invalid"
                              .format(self.min_points, self.max_points))
        if self.n_classes < 2:
            raise ConfigError("need at least 2 semantic classes")
        if self.n_relations < len(RELATIONS):
            raise ConfigError(
                "generated scenes use {} relation classes, n_relations={}"
                .format(len(RELATIONS), self.n_relations))
        if self.preset not in PRESETS:
            raise ConfigError("unknown preset '{}', expected one of {}".format(
                self.preset, ', '.join(PRESETS)))
        if self.noise_sigma < 0 or self.max_translation < 0:
            raise ConfigError("noise_sigma and max_translation must be >= 0")
        if not 0.0 <= self.dynamic_object_rate <= 1.0:
            raise ConfigError("dynamic_object_rate must lie in [0, 1]")


class SceneGraph:
    """Attributed directed graph G = (V, A, X, E).

    Nodes are addressed by index 0..M-1; ``node_ids`` keeps the stable ids
    used in files. ``edges`` is an (E, 2) array of (src, dst) node indices
    and ``relations`` the relation class of each edge.
    """

    def __init__(self, node_ids, classes, attributes, centroids, edges,
                 relations, n_classes, n_relations):
        self.node_ids = np.asarray(node_ids, dtype=np.int64).reshape(-1)
        self.classes = np.asarray(classes, dtype=np.int64).reshape(-1)
        self.attributes = np.asarray(attributes, dtype=np.float64)
        self.centroids = np.asarray(centroids, dtype=np.float64).reshape(-1, 3)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.relations = np.asarray(relations, dtype=np.int64).reshape(-1)
        self.n_classes = int(n_classes)
        self.n_relations = int(n_relations)
        self._validate()

    def _validate(self):
        m = len(self.node_ids)
        if self.attributes.ndim != 2 or len(self.attributes) != m:
            raise ValueError("attributes must have one row per node")
        if len(self.classes) != m or len(self.centroids) != m:
            raise ValueError("classes and centroids need one entry per node")
        if len(set(self.node_ids.tolist())) != m:
            raise ValueError("node ids must be unique")
        if len(self.relations) != len(self.edges):
            raise ValueError("every edge needs exactly one relation class")
        if m and (self.classes.min() < 0 or self.classes.max() >= self.n_classes):
            raise ValueError("semantic class outside vocabulary of {}".format(
                self.n_classes))
        if len(self.relations) and (self.relations.min() < 0 or
                                    self.relations.max() >= self.n_relations):
            raise ValueError("relation class outside vocabulary of {}".format(
                self.n_relations))
        if len(self.edges):
            if self.edges.min() < 0 or self.edges.max() >= m:
                raise ValueError("edge references a missing node")
            if np.any(self.edges[:, 0] == self.edges[:, 1]):
                raise ValueError("self-loops are not allowed")
            keys = set(map(tuple, self.edges.tolist()))
            if len(keys) != len(self.edges):
                raise ValueError("duplicate edge (i, j) entries")

    def __len__(self):
        return len(self.node_ids)

    def __eq__(self, other):
        if not isinstance(other, SceneGraph):
            return NotImplemented
        return (self.n_classes == other.n_classes
                and self.n_relations == other.n_relations
                and np.array_equal(self.node_ids, other.node_ids)
                and np.array_equal(self.classes, other.classes)
                and np.array_equal(self.attributes, other.attributes)
                and np.array_equal(self.centroids, other.centroids)
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.relations, other.relations))

    def __repr__(self):
        return "SceneGraph(nodes={}, edges={})".format(len(self), len(self.edges))

    @property
    def adjacency(self):
        m = len(self)
        adjacency = np.zeros((m, m), dtype=np.int64)
        if len(self.edges):
            adjacency[self.edges[:, 0], self.edges[:, 1]] = 1
        return adjacency

    @property
    def edge_relations(self):
        return {(int(i), int(j)): int(r)
                for (i, j), r in zip(self.edges, self.relations)}

    @property
    def extents(self):
        return self.attributes[:, self.n_classes:]

    @staticmethod
    def build_attributes(classes, extents, n_classes):
        """X = one-hot semantic class concatenated with normalized extents."""
        classes = np.asarray(classes, dtype=np.int64)
        one_hot = np.zeros((len(classes), n_classes))
        one_hot[np.arange(len(classes)), classes] = 1.0
        extents = np.asarray(extents, dtype=np.float64).reshape(len(classes), -1)
        return np.concatenate([one_hot, extents], axis=1)

    def index_of(self, node_id):
        matches = np.flatnonzero(self.node_ids == node_id)
        if not len(matches):
            raise KeyError(node_id)
        return int(matches[0])

    def subgraph(self, keep):
        """Induced subgraph on the kept node indices (in the given order)."""
        keep = np.asarray(keep, dtype=np.int64)
        remap = -np.ones(len(self), dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        edges = remap[self.edges] if len(self.edges) else self.edges
        edge_mask = (edges >= 0).all(axis=1) if len(edges) else \
            np.zeros(0, dtype=bool)
        return SceneGraph(
            self.node_ids[keep], self.classes[keep], self.attributes[keep],
            self.centroids[keep], edges[edge_mask],
            self.relations[edge_mask], self.n_classes, self.n_relations
        )


@dataclass
class ScenePair:
    src_graph: SceneGraph
    src_cloud: PointCloud
    ref_graph: SceneGraph
    ref_cloud: PointCloud
    gt_alignment: np.ndarray
    gt_transform: RigidTransform
    overlap_fraction: float
    seed: Optional[int] = None

    def __post_init__(self):
        gt = np.asarray(self.gt_alignment, dtype=np.int64)
        expected = (len(self.src_graph), len(self.ref_graph))
        if gt.shape != expected:
            raise ValueError("gt_alignment has shape {}, expected {}".format(
                gt.shape, expected))
        if gt.size and (gt.sum(axis=0).max() > 1 or gt.sum(axis=1).max() > 1):
            raise ValueError("gt_alignment must be a partial permutation")
        self.gt_alignment = gt

    @property
    def src(self) -> Tuple[SceneGraph, PointCloud]:
        return self.src_graph, self.src_cloud

    @property
    def ref(self) -> Tuple[SceneGraph, PointCloud]:
        return self.ref_graph, self.ref_cloud

    @property
    def gt_pairs(self):
        """(src index, ref index) pairs of the ground-truth alignment."""
        return [tuple(pair) for pair in np.argwhere(self.gt_alignment == 1)]


def overlap_bucket(overlap_fraction):
    if overlap_fraction < 0.1:
        return None
    if overlap_fraction < 0.3:
        return '10-30'
    if overlap_fraction < 0.6:
        return '30-60'
    return '60+'


@dataclass(frozen=True)
class GenerateConfig(ConfigSection):
    """How many pairs ``scene generate`` writes and which overlaps it keeps."""
    section_name = 'generate'

    n_pairs: int = 10
    seed: int = 0
    min_overlap_filter: float = 0.0
    max_overlap_filter: float = 1.0
    n_fragments: int = 3
    max_draws_per_pair: int = 50

    def validate(self):
        if self.n_pairs < 0:
            raise ConfigError("n_pairs must be >= 0")
        if not 0.0 <= self.min_overlap_filter <= self.max_overlap_filter \
                <= 1.0:
            raise ConfigError("overlap filter [{}, {}] is invalid".format(
                self.min_overlap_filter, self.max_overlap_filter))
        if self.n_fragments < 2:
            raise ConfigError("n_fragments must be at least 2")
        if self.max_draws_per_pair < 1:
            raise ConfigError("max_draws_per_pair must be at least 1")

    def keeps(self, overlap_fraction):
        return self.min_overlap_filter <= overlap_fraction <= \
            self.max_overlap_filter
