"""Controlled corruption of scene graphs.

Five regimes: relations removed, nodes removed, both removed, wrong node
semantics, and wrong node plus relation semantics. Counts are floor(rate * n).
"""
import logging
from enum import Enum

import numpy as np

from sgtools.geometry.data import PointCloud
from sgtools.scenegraph.data import SceneGraph, ScenePair

logger = logging.getLogger(__name__)


class Regime(Enum):
    RELATIONS_REMOVED = 'relations_removed'
    NODES_REMOVED = 'nodes_removed'
    BOTH_REMOVED = 'both_removed'
    WRONG_NODE_SEMANTICS = 'wrong_node_semantics'
    WRONG_BOTH_SEMANTICS = 'wrong_both_semantics'


def _count(rate, total):
    return int(np.floor(rate * total + 1e-9))


def _remove_relations(graph, rate, rng):
    count = _count(rate, len(graph.edges))
    keep = np.ones(len(graph.edges), dtype=bool)
    keep[rng.choice(len(graph.edges), size=count, replace=False)] = False
    return SceneGraph(graph.node_ids, graph.classes, graph.attributes,
                      graph.centroids, graph.edges[keep],
                      graph.relations[keep], graph.n_classes,
                      graph.n_relations)


def _remove_nodes(graph, rate, rng):
    count = _count(rate, len(graph))
    dropped = rng.choice(len(graph), size=count, replace=False)
    keep = np.setdiff1d(np.arange(len(graph)), dropped)
    return graph.subgraph(keep)


def _wrong_classes(current, count, vocabulary, rng):
    """Picks `count` positions and moves each to a different class."""
    result = current.copy()
    if count == 0:
        return result
    positions = rng.choice(len(current), size=count, replace=False)
    for position in positions:
        offset = int(rng.integers(1, vocabulary))
        result[position] = (current[position] + offset) % vocabulary
    return result


def _wrong_node_semantics(graph, rate, rng):
    classes = _wrong_classes(graph.classes, _count(rate, len(graph)),
                             graph.n_classes, rng)
    attributes = SceneGraph.build_attributes(classes, graph.extents,
                                             graph.n_classes)
    return SceneGraph(graph.node_ids, classes, attributes, graph.centroids,
                      graph.edges, graph.relations, graph.n_classes,
                      graph.n_relations)


def _wrong_relation_semantics(graph, rate, rng):
    relations = _wrong_classes(graph.relations,
                               _count(rate, len(graph.relations)),
                               graph.n_relations, rng)
    return SceneGraph(graph.node_ids, graph.classes, graph.attributes,
                      graph.centroids, graph.edges, relations,
                      graph.n_classes, graph.n_relations)


def corrupt(graph, regime, rate, seed):
    """Returns a corrupted copy of graph; the input is left untouched."""
    regime = Regime(regime)
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1], got {}".format(rate))
    rng = np.random.default_rng(seed)
    if regime == Regime.RELATIONS_REMOVED:
        corrupted = _remove_relations(graph, rate, rng)
    elif regime == Regime.NODES_REMOVED:
        corrupted = _remove_nodes(graph, rate, rng)
    elif regime == Regime.BOTH_REMOVED:
        corrupted = _remove_nodes(_remove_relations(graph, rate, rng), rate,
                                  rng)
    elif regime == Regime.WRONG_NODE_SEMANTICS:
        corrupted = _wrong_node_semantics(graph, rate, rng)
    else:
        corrupted = _wrong_relation_semantics(
            _wrong_node_semantics(graph, rate, rng), rate, rng)
    logger.debug("corrupt {} rate={}: nodes {} -> {}, edges {} -> {}".format(
        regime.value, rate, len(graph), len(corrupted), len(graph.edges),
        len(corrupted.edges)))
    return corrupted


def _restrict_cloud(cloud, old_graph, new_graph):
    """Drops points of removed nodes and renumbers the object map."""
    remap = -np.ones(len(old_graph), dtype=np.int64)
    for new_index, node_id in enumerate(new_graph.node_ids):
        remap[old_graph.index_of(node_id)] = new_index
    labels = remap[cloud.object_ids]
    keep = labels >= 0
    return PointCloud(cloud.points[keep], labels[keep],
                      None if cloud.descriptors is None
                      else cloud.descriptors[keep]), remap


def corrupt_pair(pair, regime, rate, seed, side='src'):
    """Corrupts one side of a pair, keeping cloud and gt alignment consistent."""
    if side not in ('src', 'ref'):
        raise ValueError("side must be 'src' or 'ref'")
    graph, cloud = pair.src if side == 'src' else pair.ref
    corrupted = corrupt(graph, regime, rate, seed)
    new_cloud, remap = _restrict_cloud(cloud, graph, corrupted)
    kept = np.flatnonzero(remap >= 0)
    if side == 'src':
        gt = pair.gt_alignment[kept, :]
        return ScenePair(corrupted, new_cloud, pair.ref_graph, pair.ref_cloud,
                         gt, pair.gt_transform, _overlap(gt), pair.seed)
    gt = pair.gt_alignment[:, kept]
    return ScenePair(pair.src_graph, pair.src_cloud, corrupted, new_cloud, gt,
                     pair.gt_transform, _overlap(gt), pair.seed)


def _overlap(gt):
    smaller = min(gt.shape)
    return float(gt.sum()) / smaller if smaller else 0.0
