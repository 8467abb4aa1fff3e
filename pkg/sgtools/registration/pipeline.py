import logging

import numpy as np

from sgtools.encoder.descriptors import point_descriptors
from sgtools.errors import InsufficientCorrespondences, NoCorrespondences
from sgtools.geometry.estimate import (local_to_global_pose, ransac_pose,
                                      residuals, weighted_svd_alignment)
from sgtools.geometry.search import nearest_neighbors
from sgtools.registration.data import (CorrespondenceSet, Estimator,
                                       RegistrationConfig, RegistrationResult,
                                       Strategy)
from sgtools.registration.matching import (extract_correspondences, rescore,
                                           superpoint_matching_matrix)
from sgtools.registration.superpoints import build_superpoints

logger = logging.getLogger(__name__)


def _superpoints(cloud, descriptors, mask, config):
    indices = np.flatnonzero(mask)
    return build_superpoints(cloud.select(mask), config.voxel,
                             point_descriptors=descriptors[indices],
                             point_indices=indices)


def _match(src_cloud, ref_cloud, src_descriptors, ref_descriptors, src_mask,
           ref_mask, alignment, gamma, config):
    src_sp = _superpoints(src_cloud, src_descriptors, src_mask, config)
    ref_sp = _superpoints(ref_cloud, ref_descriptors, ref_mask, config)
    if not len(src_sp) or not len(ref_sp):
        return CorrespondenceSet.empty()
    c = superpoint_matching_matrix(src_sp, ref_sp)
    if alignment is not None:
        c = rescore(c, alignment, src_sp, ref_sp, gamma)
    return extract_correspondences(c, src_sp, ref_sp, config.top_m,
                                   config.mutual, config.ratio)


def opo_pairs(alignment, strategy, config):
    """Object pairs registered one by one under the OPO strategies."""
    pairs = list(alignment.selected_pairs)
    if strategy == Strategy.OPO_SCORE:
        pairs = [p for p in pairs if p[2] > config.opo_score_threshold]
    elif strategy == Strategy.OPO_TOPK:
        pairs = sorted(pairs, key=lambda p: (-p[2], p[0], p[1]))
        pairs = pairs[:config.opo_top_k]
    return pairs


def estimate_pose(correspondences, config, estimator=None, seed=None):
    """Pose and inlier mask from scored correspondences.

    ``svd`` is one weighted SVD over every correspondence, weighted by its
    score. ``lgr`` and ``ransac`` are the robust alternatives.
    """
    estimator = Estimator(estimator) if estimator is not None else \
        config.estimator_enum
    if estimator == Estimator.RANSAC:
        return ransac_pose(correspondences, config.inlier_radius,
                           config.ransac_iters,
                           config.seed if seed is None else seed)
    if estimator == Estimator.LGR:
        return local_to_global_pose(correspondences, config.inlier_radius,
                                    config.refine_iters)
    if len(correspondences) < 3:
        raise InsufficientCorrespondences(
            "pose estimation needs at least 3 correspondences, got {}".format(
                len(correspondences)))
    scores = correspondences.scores
    transform = weighted_svd_alignment(
        correspondences.src_points, correspondences.ref_points,
        scores if scores.sum() > 0 else None)
    inliers = residuals(transform, correspondences.src_points,
                        correspondences.ref_points) < config.inlier_radius
    return transform, inliers


def register_clouds(src_cloud, ref_cloud, alignment=None, strategy=None,
                    config=None, estimator=None, seed=None, gamma=None):
    """Registers src onto ref; returns a RegistrationResult.

    The transform maps source coordinates onto reference coordinates.
    A2A matches the whole clouds and ignores the alignment. O2O keeps the
    points of objects in the selected pairs and matches once. The OPO
    strategies match each selected object pair separately and pool the
    correspondences before a single pose estimate.
    """
    config = config or RegistrationConfig()
    strategy = Strategy(strategy) if strategy is not None else \
        config.strategy_enum
    gamma = config.gamma if gamma is None else gamma
    if strategy != Strategy.A2A and alignment is None:
        raise ValueError("strategy {} needs a node alignment".format(
            strategy.value))

    src_descriptors = src_cloud.descriptors \
        if src_cloud.descriptors is not None else \
        point_descriptors(src_cloud, config.descriptor_radius)
    ref_descriptors = ref_cloud.descriptors \
        if ref_cloud.descriptors is not None else \
        point_descriptors(ref_cloud, config.descriptor_radius)

    def match(src_mask, ref_mask, with_alignment):
        return _match(src_cloud, ref_cloud, src_descriptors, ref_descriptors,
                      src_mask, ref_mask, alignment if with_alignment else None,
                      gamma, config)

    if strategy == Strategy.A2A:
        correspondences = match(np.ones(len(src_cloud), dtype=bool),
                                np.ones(len(ref_cloud), dtype=bool), False)
    elif strategy == Strategy.O2O:
        pairs = alignment.selected_pairs
        if not pairs:
            raise NoCorrespondences("O2O needs at least one selected pair")
        src_mask = np.isin(src_cloud.object_ids, [i for i, _, _ in pairs])
        ref_mask = np.isin(ref_cloud.object_ids, [j for _, j, _ in pairs])
        correspondences = match(src_mask, ref_mask, True)
    else:
        pairs = opo_pairs(alignment, strategy, config)
        if not pairs:
            raise NoCorrespondences("{} kept no object pairs".format(
                strategy.value))
        correspondences = CorrespondenceSet.concatenate([
            match(src_cloud.object_ids == i, ref_cloud.object_ids == j, True)
            for i, j, _ in pairs])

    if not len(correspondences):
        raise NoCorrespondences("strategy {} found no point correspondences"
                                .format(strategy.value))
    try:
        transform, inliers = estimate_pose(correspondences, config,
                                           estimator, seed)
    except InsufficientCorrespondences as e:
        raise NoCorrespondences(str(e))
    logger.debug("{}: {} correspondences, {} inliers".format(
        strategy.value, len(correspondences), int(inliers.sum())))
    return RegistrationResult(transform, correspondences, strategy, inliers)


def register(pair, alignment, strategy=None, use_ransac=False, seed=None,
             config=None):
    """Registers a scene pair; returns (transform, correspondences).

    ``use_ransac`` switches to RANSAC; otherwise the configured estimator
    runs.
    """
    estimator = Estimator.RANSAC if use_ransac else None
    result = register_clouds(pair.src_cloud, pair.ref_cloud, alignment,
                             strategy, config, estimator, seed)
    return result.transform, result.correspondences


def ground_truth_correspondences(pair, radius=0.05):
    """Point pairs that coincide within radius under the gt transform."""
    src_points = pair.src_cloud.points
    ref_points = pair.ref_cloud.points
    if not len(src_points) or not len(ref_points):
        return CorrespondenceSet.empty()
    moved = pair.gt_transform.apply(src_points)
    distances, nearest = nearest_neighbors(moved, ref_points)
    keep = np.flatnonzero(distances < radius)
    return CorrespondenceSet(nearest[keep], keep, np.ones(len(keep)),
                             src_points[keep], ref_points[nearest[keep]])
