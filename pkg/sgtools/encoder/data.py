import logging
from dataclasses import dataclass

import numpy as np

from sgtools.config import ConfigSection
from sgtools.errors import ConfigError, DimensionMismatch

logger = logging.getLogger(__name__)

# Normalized principal extents appended to the one-hot class in X
EXTENT_WIDTH = 3


@dataclass(frozen=True)
class EncoderConfig(ConfigSection):
    section_name = 'encoder'

    n_classes: int = 12
    n_relations: int = 4
    d: int = 16
    n_layers: int = 2
    d_p: int = 32
    descriptor_radius: float = 0.3
    knn_k: int = 8
    rotation_invariant: bool = True
    use_point_fusion: bool = True

    def validate(self):
        if self.d < 1 or self.n_layers < 0:
            raise ConfigError("encoder needs d >= 1 and n_layers >= 0")
        if self.d_p < 16:
            raise ConfigError(
                "d_p={} leaves no room for the point descriptor".format(
                    self.d_p))
        if self.descriptor_radius <= 0:
            raise ConfigError("descriptor_radius must be positive")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be at least 1")

    @property
    def attribute_width(self):
        return self.n_classes + EXTENT_WIDTH

    @property
    def d_s(self):
        return self.d * (self.n_layers + 1)

    def tensor_shapes(self):
        d, d_p = self.d, self.d_p
        shapes = {
            'node_mlp.w1': (self.attribute_width, d),
            'node_mlp.b1': (d,),
            'node_mlp.w2': (d, d),
            'node_mlp.b2': (d,),
            # one-hot relation plus a bit for the message direction
            'edge_mlp.w': (self.n_relations + 1, d),
            'edge_mlp.b': (d,),
        }
        for layer in range(self.n_layers):
            shapes['gat{}.w'.format(layer)] = (3 * d, d)
            shapes['gat{}.a'.format(layer)] = (d,)
            shapes['gat{}.v'.format(layer)] = (d, d)
            shapes['gat{}.skip'.format(layer)] = (1,)
        shapes['fusion.w'] = (2 * d_p, d_p)
        shapes['fusion.a'] = (d_p,)
        shapes['fusion.v'] = (d_p, d_p)
        return shapes


def fan_in_uniform(shape, rng):
    """Symmetric uniform init with bound 1/sqrt(fan_in)."""
    bound = 1.0 / np.sqrt(shape[0])
    return rng.uniform(-bound, bound, size=shape)


def check_tensors(tensors, shapes, owner):
    missing = sorted(set(shapes) - set(tensors))
    extra = sorted(set(tensors) - set(shapes))
    if missing or extra:
        raise DimensionMismatch(
            "{} tensors do not match the config (missing {}, unexpected {})"
            .format(owner, missing or 'none', extra or 'none'))
    for name, shape in shapes.items():
        if tuple(tensors[name].shape) != tuple(shape):
            raise DimensionMismatch("{} tensor {} has shape {}, expected {}"
                                    .format(owner, name, tensors[name].shape,
                                            shape))
        if not np.all(np.isfinite(tensors[name])):
            raise ValueError("{} tensor {} has non-finite entries".format(
                owner, name))


class EncoderParams:
    """Encoder weights by tensor name, plus the config that shapes them."""

    def __init__(self, config, tensors):
        self.config = config
        self.tensors = {name: np.asarray(value, dtype=np.float64)
                        for name, value in tensors.items()}
        check_tensors(self.tensors, config.tensor_shapes(), 'encoder')

    @classmethod
    def initialize(cls, config, seed):
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape in config.tensor_shapes().items():
            if name.endswith('.skip'):
                tensors[name] = np.ones(shape)
            elif name.endswith(('.b', '.b1', '.b2')):
                tensors[name] = np.zeros(shape)
            elif len(shape) == 1:
                tensors[name] = fan_in_uniform((shape[0],), rng)
            else:
                tensors[name] = fan_in_uniform(shape, rng)
        return cls(config, tensors)

    @property
    def d_s(self):
        return self.config.d_s

    @property
    def d_p(self):
        return self.config.d_p

    def replace_tensors(self, tensors):
        return EncoderParams(self.config, tensors)


@dataclass(frozen=True)
class NodeEmbeddings:
    semantic: np.ndarray
    geometric: np.ndarray

    def __post_init__(self):
        if len(self.semantic) != len(self.geometric):
            raise ValueError("semantic and geometric rows differ: {} vs {}"
                             .format(len(self.semantic), len(self.geometric)))

    def __len__(self):
        return len(self.semantic)

    @property
    def fused(self):
        return np.concatenate([self.semantic, self.geometric], axis=1)


@dataclass(frozen=True)
class SceneInputs:
    """Everything about one scene the encoder needs, computed once.

    ``knn`` holds the point k-NN edges used by fusion; descriptors and edges
    do not depend on trainable weights.
    """
    attributes: np.ndarray
    edges: np.ndarray
    relations: np.ndarray
    descriptors: np.ndarray
    knn: np.ndarray
    object_ids: np.ndarray
    n_nodes: int
