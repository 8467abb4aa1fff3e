import logging

import numpy as np

from sgtools.encoder.data import NodeEmbeddings, SceneInputs
from sgtools.encoder.descriptors import point_descriptors
from sgtools.encoder.fusion import (check_object_map, forward_geometric,
                                    fusion_edges)
from sgtools.encoder.graph import check_vocabulary, forward_semantic
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def scene_descriptors(cloud, config):
    if cloud.descriptors is not None and \
            cloud.descriptors.shape[1] == config.d_p:
        return cloud.descriptors
    return point_descriptors(cloud, config.descriptor_radius,
                             config.rotation_invariant, config.d_p)


def prepare_scene(graph, cloud, config):
    """Computes the weight-independent encoder inputs of one scene."""
    check_vocabulary(graph, config)
    check_object_map(cloud.object_ids, len(graph))
    if config.use_point_fusion:
        descriptors = scene_descriptors(cloud, config)
        knn = fusion_edges(cloud.points, config.knn_k)
    else:
        descriptors = np.zeros((len(cloud), config.d_p))
        knn = np.zeros((0, 2), dtype=np.int64)
    return SceneInputs(graph.attributes, graph.edges, graph.relations,
                       descriptors, knn, cloud.object_ids, len(graph))


def forward_embeddings(tape, weights, inputs, config):
    """(F_S, F_P) nodes for one prepared scene."""
    semantic = forward_semantic(tape, weights, inputs.attributes,
                                inputs.edges, inputs.relations, config)
    if not config.use_point_fusion:
        return semantic, tape.constant(np.zeros((inputs.n_nodes, config.d_p)))
    geometric = forward_geometric(tape, weights, inputs.descriptors,
                                  inputs.knn, inputs.object_ids,
                                  inputs.n_nodes)
    return semantic, geometric


def embed_scene(graph, cloud, params):
    """NodeEmbeddings of one scene under fixed encoder weights."""
    inputs = prepare_scene(graph, cloud, params.config)
    tape = ad.Tape()
    weights = {name: tape.constant(value)
               for name, value in params.tensors.items()}
    semantic, geometric = forward_embeddings(tape, weights, inputs,
                                             params.config)
    return NodeEmbeddings(semantic.value, geometric.value)
