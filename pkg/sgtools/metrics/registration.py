import logging

import numpy as np

from sgtools.errors import EmptyCloud, EmptyCorrespondences, EmptyInput
from sgtools.geometry.search import nearest_neighbors
from sgtools.metrics.data import MetricThresholds

logger = logging.getLogger(__name__)


def rotation_error(estimated, gt):
    """Geodesic angle between the two rotations, in degrees."""
    cosine = (np.trace(gt.rotation.T @ estimated.rotation) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))


def translation_error(estimated, gt):
    return float(np.linalg.norm(gt.translation - estimated.translation))


def rmse(estimated, gt_correspondences):
    """RMSE of gt point pairs under the estimated transform."""
    if not len(gt_correspondences):
        raise EmptyCorrespondences("RMSE needs ground-truth correspondences")
    moved = estimated.apply(gt_correspondences.src_points)
    squared = ((moved - gt_correspondences.ref_points) ** 2).sum(axis=1)
    return float(np.sqrt(squared.mean()))


def inlier_ratio(gt, correspondences, tau2):
    """Fraction of predicted pairs closer than tau2 under the gt transform."""
    if not len(correspondences):
        raise EmptyCorrespondences("inlier ratio needs predicted "
                                   "correspondences")
    moved = gt.apply(correspondences.src_points)
    distances = np.linalg.norm(moved - correspondences.ref_points, axis=1)
    return float(np.mean(distances < tau2))


def registration_metrics(estimated, gt, gt_correspondences, correspondences,
                         thresholds=None):
    thresholds = thresholds or MetricThresholds()
    error = rmse(estimated, gt_correspondences)
    ratio = inlier_ratio(gt, correspondences, thresholds.tau2)
    return {
        'rre': rotation_error(estimated, gt),
        'rte': translation_error(estimated, gt),
        'rmse': error,
        'registered': bool(error < thresholds.tau1),
        'inlier_ratio': ratio,
        'fmr': bool(ratio > thresholds.tau3)
    }


def chamfer(p, q, estimated):
    """Modified Chamfer distance: mean squared nearest distances both ways,
    with the estimated transform applied to p."""
    if not len(p) or not len(q):
        raise EmptyCloud("Chamfer distance needs two non-empty clouds")
    moved = estimated.apply(_points(p))
    q_points = _points(q)
    forward, _ = nearest_neighbors(moved, q_points)
    backward, _ = nearest_neighbors(q_points, moved)
    return float((forward ** 2).mean() + (backward ** 2).mean())


def _points(cloud):
    return getattr(cloud, 'points', cloud)


def scc(correspondences, src_object_ids, ref_object_ids, gt_alignment):
    """Share of correspondences linking a ref object to its gt source object.

    ``gt_alignment`` has source nodes on rows. Pairs whose reference object
    has no gt partner count as inconsistent.
    """
    if not len(correspondences):
        raise EmptyCorrespondences("SCC needs predicted correspondences")
    gt = np.asarray(gt_alignment)
    partner = np.full(gt.shape[1], -1, dtype=np.int64)
    rows, cols = np.nonzero(gt)
    partner[cols] = rows
    ref_objects = np.asarray(ref_object_ids)[correspondences.ref_indices]
    src_objects = np.asarray(src_object_ids)[correspondences.src_indices]
    return float(np.mean(partner[ref_objects] == src_objects))


def _mean_flags(flags, name):
    flags = list(flags)
    if not flags:
        raise EmptyInput("{} needs at least one pair".format(name))
    return float(np.mean([bool(flag) for flag in flags]))


def registration_recall(rmse_values, tau1=0.2):
    return _mean_flags((value < tau1 for value in rmse_values),
                       'registration recall')


def feature_matching_recall(inlier_ratios, tau3=0.05):
    return _mean_flags((value > tau3 for value in inlier_ratios),
                       'feature matching recall')
