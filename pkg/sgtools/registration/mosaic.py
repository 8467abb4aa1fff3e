import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, minimum_spanning_tree

from sgtools.errors import (DegenerateConfiguration, DisconnectedScenes,
                            InsufficientCorrespondences, NoCorrespondences)
from sgtools.geometry.data import PointCloud, RigidTransform
from sgtools.matcher.align import align_graphs
from sgtools.registration.data import RegistrationConfig, Strategy
from sgtools.registration.pipeline import register_clouds

logger = logging.getLogger(__name__)


def _register_edge(scenes, a, b, encoder, matcher, config):
    """Registers scene b onto scene a; returns (a, b, transform, weight)."""
    alignment = None
    strategy = Strategy.A2A
    if encoder is not None and matcher is not None:
        alignment = align_graphs(scenes[b], scenes[a], encoder, matcher)
        strategy = config.strategy_enum
    try:
        result = register_clouds(scenes[b][1], scenes[a][1], alignment,
                                 strategy, config)
    except (NoCorrespondences, InsufficientCorrespondences,
            DegenerateConfiguration) as e:
        logger.debug("no edge {}-{}: {}".format(a, b, e))
        return a, b, None, 0.0
    inliers = result.inliers
    count = int(inliers.sum())
    ratio = count / len(inliers)
    if count < config.min_inliers or ratio < config.min_inlier_ratio:
        logger.debug("edge {}-{} rejected: {} inliers ({:.3f})".format(
            a, b, count, ratio))
        return a, b, None, 0.0
    weight = float(np.mean(result.correspondences.scores))
    logger.debug("edge {}-{}: weight {:.4f}, {} inliers".format(
        a, b, weight, count))
    return a, b, result.transform, weight


def pose_graph(scenes, encoder=None, matcher=None, config=None, threads=None):
    """Pairwise registrations of all scenes.

    Returns {(a, b): (T_b->a, weight)} for the accepted edges, a < b.
    """
    config = config or RegistrationConfig()
    jobs = list(combinations(range(len(scenes)), 2))
    with ThreadPoolExecutor(max_workers=threads) as executor:
        outcomes = list(executor.map(
            lambda job: _register_edge(scenes, job[0], job[1], encoder,
                                       matcher, config), jobs))
    return {(a, b): (transform, weight)
            for a, b, transform, weight in outcomes
            if transform is not None and weight > 0}


def spanning_tree(n_scenes, edges):
    """Maximum-weight spanning tree rooted at scene 0.

    Returns (bfs order, predecessors); DisconnectedScenes when some scene
    cannot be reached.
    """
    if not edges:
        raise DisconnectedScenes(
            "no scene pair could be registered among {} scenes".format(
                n_scenes))
    top = max(weight for _, weight in edges.values())
    rows, cols, costs = [], [], []
    for (a, b), (_, weight) in edges.items():
        rows.append(a)
        cols.append(b)
        costs.append(top + 1.0 - weight)
    graph = csr_matrix((costs, (rows, cols)), shape=(n_scenes, n_scenes))
    tree = minimum_spanning_tree(graph)
    order, predecessors = breadth_first_order(tree, 0, directed=False,
                                              return_predecessors=True)
    missing = sorted(set(range(n_scenes)) - set(order.tolist()))
    if missing:
        raise DisconnectedScenes(
            "scene(s) {} share no registered overlap with scene 0".format(
                ', '.join(str(m) for m in missing)))
    return order, predecessors


def mosaic(scenes, encoder=None, matcher=None, config=None, threads=None):
    """Transforms taking every scene into the frame of scene 0.

    Without model parameters the pairwise registrations run all-to-all;
    with them each pair is aligned first and registered with the
    configured strategy.
    """
    if len(scenes) < 2:
        raise ValueError("mosaicking needs at least 2 scenes, got {}".format(
            len(scenes)))
    edges = pose_graph(scenes, encoder, matcher, config, threads)
    order, predecessors = spanning_tree(len(scenes), edges)

    transforms = [None] * len(scenes)
    transforms[0] = RigidTransform.identity()
    for child in order[1:]:
        parent = int(predecessors[child])
        child = int(child)
        if (parent, child) in edges:
            child_to_parent = edges[(parent, child)][0]
        else:
            child_to_parent = edges[(child, parent)][0].inverse()
        transforms[child] = transforms[parent].compose(child_to_parent)
    logger.info("mosaicked {} scenes over {} registered pairs".format(
        len(scenes), len(edges)))
    return transforms


def merge_scenes(scenes, transforms):
    """One cloud of all scene points moved into the frame of scene 0."""
    points = np.concatenate([transform.apply(cloud.points)
                             for (_, cloud), transform in zip(scenes,
                                                              transforms)])
    labels = np.concatenate([np.full(len(cloud), k)
                             for k, (_, cloud) in enumerate(scenes)])
    return PointCloud(points, labels)
