"""Point-to-scene-graph fusion.

One attention layer over the point k-NN graph refines each point descriptor
from its neighborhood; a per-object max over the point-to-object map pools
the refined descriptors into geometric node embeddings F_P.
"""
import logging

import numpy as np

from sgtools.encoder.data import NodeEmbeddings
from sgtools.errors import EmptyObject, ObjectOutOfRange
from sgtools.geometry.search import knn_edges
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def check_object_map(object_ids, n_nodes):
    object_ids = np.asarray(object_ids, dtype=np.int64)
    if len(object_ids) and (object_ids.min() < 0 or
                            object_ids.max() >= n_nodes):
        raise ObjectOutOfRange(
            "point object ids span [{}, {}] but the graph has {} nodes".format(
                object_ids.min(), object_ids.max(), n_nodes))
    counts = np.bincount(object_ids, minlength=n_nodes)
    empty = np.flatnonzero(counts == 0)
    if len(empty):
        raise EmptyObject("node(s) {} own no points".format(
            ', '.join(str(i) for i in empty)))


def fusion_edges(points, knn_k):
    """k-NN edges, with k clipped for clouds smaller than k + 1 points."""
    k = min(knn_k, len(points) - 1)
    if k < knn_k:
        logger.debug("cloud of {} points, using k={} instead of {}".format(
            len(points), k, knn_k))
    return knn_edges(points, k)


def forward_geometric(tape, weights, descriptors, knn, object_ids, n_nodes):
    """F_P on the tape."""
    n = len(descriptors)
    f = tape.constant(descriptors)
    if len(knn):
        centers, neighbors = knn[:, 0], knn[:, 1]
        joint = ad.concat([f[centers], f[neighbors]], axis=1)
        score = ad.leaky_relu(joint @ weights['fusion.w']) @ weights['fusion.a']
        alpha = ad.segment_softmax(score, centers, n)
        messages = (f[neighbors] @ weights['fusion.v']) * \
            ad.reshape(alpha, (len(knn), 1))
        refined = ad.leaky_relu(ad.segment_sum(messages, centers, n)) + f
    else:
        refined = f
    return ad.segment_max(refined, object_ids, n_nodes)


def p2sg_fuse(descriptors, cloud, params, semantic, knn_k=None):
    """Fuses point descriptors into per-node embeddings next to F_S."""
    semantic = np.asarray(semantic, dtype=np.float64)
    n_nodes = len(semantic)
    check_object_map(cloud.object_ids, n_nodes)
    if len(descriptors) != len(cloud):
        raise ValueError("{} descriptor rows for {} points".format(
            len(descriptors), len(cloud)))
    if not params.config.use_point_fusion:
        return NodeEmbeddings(semantic, np.zeros((n_nodes, params.d_p)))

    knn = fusion_edges(cloud.points, knn_k or params.config.knn_k)
    tape = ad.Tape()
    weights = {name: tape.constant(value)
               for name, value in params.tensors.items()
               if name.startswith('fusion.')}
    geometric = forward_geometric(tape, weights, descriptors, knn,
                                  cloud.object_ids, n_nodes)
    return NodeEmbeddings(semantic, geometric.value)
