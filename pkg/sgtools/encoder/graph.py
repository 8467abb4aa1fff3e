import logging

import numpy as np

from sgtools.errors import DimensionMismatch
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def check_vocabulary(graph, config):
    if graph.n_classes != config.n_classes or \
            graph.n_relations != config.n_relations:
        raise DimensionMismatch(
            "scene uses {} classes / {} relations, encoder expects {} / {}"
            .format(graph.n_classes, graph.n_relations, config.n_classes,
                    config.n_relations))
    if graph.attributes.shape[1] != config.attribute_width:
        raise DimensionMismatch(
            "attribute rows have width {}, encoder expects {}".format(
                graph.attributes.shape[1], config.attribute_width))


def message_edges(edges, relations, n_relations):
    """Both directions of every edge as (targets, sources, edge features).

    Edge i -> j sends j's state to i with direction bit 0 and i's state to j
    with direction bit 1.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    count = len(edges)
    targets = np.concatenate([edges[:, 0], edges[:, 1]])
    sources = np.concatenate([edges[:, 1], edges[:, 0]])
    features = np.zeros((2 * count, n_relations + 1))
    rows = np.arange(2 * count)
    features[rows, np.concatenate([relations, relations])] = 1.0
    features[count:, n_relations] = 1.0
    return targets, sources, features


def forward_semantic(tape, weights, attributes, edges, relations, config):
    """F_S on the tape: MLP lift, n attention layers, concat of all layers."""
    m = len(attributes)
    x = tape.constant(attributes)
    h = ad.leaky_relu(x @ weights['node_mlp.w1'] + weights['node_mlp.b1'])
    h = h @ weights['node_mlp.w2'] + weights['node_mlp.b2']
    layers = [h]
    if config.n_layers == 0:
        return h

    targets, sources, features = message_edges(edges, relations,
                                               config.n_relations)
    if len(targets):
        e = tape.constant(features) @ weights['edge_mlp.w'] + \
            weights['edge_mlp.b']
    for layer in range(config.n_layers):
        name = 'gat{}.'.format(layer)
        skip = weights[name + 'skip']
        if len(targets):
            joint = ad.concat([h[targets], h[sources], e], axis=1)
            score = ad.leaky_relu(joint @ weights[name + 'w']) @ \
                weights[name + 'a']
            alpha = ad.segment_softmax(score, targets, m)
            messages = (h[sources] @ weights[name + 'v']) * \
                ad.reshape(alpha, (len(targets), 1))
            aggregated = ad.segment_sum(messages, targets, m)
        else:
            aggregated = tape.constant(np.zeros((m, config.d)))
        h = ad.leaky_relu(aggregated) + skip * h
        layers.append(h)
    return ad.concat(layers, axis=1)


def encode_scene_graph(graph, params):
    """Semantic node embeddings F_S (M x d(n+1)) of a scene graph."""
    check_vocabulary(graph, params.config)
    tape = ad.Tape()
    weights = {name: tape.constant(value)
               for name, value in params.tensors.items()}
    return forward_semantic(tape, weights, graph.attributes, graph.edges,
                            graph.relations, params.config).value
