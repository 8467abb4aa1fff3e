import logging

import numpy as np

from sgtools.errors import DegenerateConfiguration, InsufficientCorrespondences
from sgtools.geometry.data import RigidTransform

logger = logging.getLogger(__name__)

DEFAULT_INLIER_RADIUS = 0.05
DEFAULT_RANSAC_ITERS = 1000
RANK_TOLERANCE = 1e-10


def weighted_svd_alignment(src, ref, weights=None):
    """Weighted Procrustes: the rigid T minimizing sum w_i |T(src_i) - ref_i|^2.

    Reflections are corrected by flipping the sign of the singular direction
    with the smallest singular value.
    """
    src = np.asarray(src, dtype=np.float64).reshape(-1, 3)
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 3)
    if len(src) != len(ref):
        raise ValueError(
            "src has {} points but ref has {}".format(len(src), len(ref)))
    if weights is None:
        weights = np.ones(len(src))
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if len(weights) != len(src):
        raise ValueError("{} weights for {} point pairs".format(
            len(weights), len(src)))
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and non-negative")
    total = weights.sum()
    if len(src) < 3 or total <= 0:
        raise DegenerateConfiguration(
            "need at least 3 weighted pairs, got {} with weight sum {}".format(
                len(src), total)
        )
    weights = weights / total

    src_center = weights @ src
    ref_center = weights @ ref
    src_centered = src - src_center
    ref_centered = ref - ref_center
    covariance = (src_centered * weights[:, None]).T @ ref_centered

    u, singular, vt = np.linalg.svd(covariance)
    if singular[0] <= 0 or singular[1] <= RANK_TOLERANCE * singular[0]:
        raise DegenerateConfiguration(
            "weighted covariance has rank < 2 (singular values {})".format(
                singular)
        )
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0:
        d = 1.0
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    translation = ref_center - rotation @ src_center
    return RigidTransform(rotation, translation)


def residuals(transform, src, ref):
    return np.linalg.norm(transform.apply(src) - ref, axis=1)


def ransac_pose(correspondences, inlier_radius=DEFAULT_INLIER_RADIUS,
                max_iters=DEFAULT_RANSAC_ITERS, seed=0):
    """Classic 3-point RANSAC followed by weighted SVD on the inliers.

    ``correspondences`` needs ``src_points``, ``ref_points`` and ``scores``.
    Returns the refined transform and the inlier mask under it.
    """
    src = np.asarray(correspondences.src_points, dtype=np.float64)
    ref = np.asarray(correspondences.ref_points, dtype=np.float64)
    scores = np.asarray(correspondences.scores, dtype=np.float64)
    n = len(src)
    if n < 3:
        raise InsufficientCorrespondences(
            "RANSAC needs at least 3 correspondences, got {}".format(n))

    rng = np.random.default_rng(seed)
    best_transform = None
    best_count = -1
    skipped = 0
    for _ in range(max_iters):
        sample = rng.choice(n, size=3, replace=False)
        try:
            hypothesis = weighted_svd_alignment(src[sample], ref[sample])
        except DegenerateConfiguration:
            skipped += 1
            continue
        count = int((residuals(hypothesis, src, ref) < inlier_radius).sum())
        if count > best_count:
            best_count = count
            best_transform = hypothesis
    if skipped:
        logger.debug("RANSAC skipped {} degenerate samples".format(skipped))
    if best_transform is None:
        raise DegenerateConfiguration(
            "every RANSAC sample was degenerate ({} iterations)".format(
                max_iters)
        )
    logger.debug("RANSAC best hypothesis has {} of {} inliers".format(
        best_count, n))

    mask = residuals(best_transform, src, ref) < inlier_radius
    refined = best_transform
    if mask.sum() >= 3:
        weights = scores[mask] if scores[mask].sum() > 0 else None
        try:
            refined = weighted_svd_alignment(src[mask], ref[mask], weights)
        except DegenerateConfiguration:
            logger.warning("inlier set is degenerate, keeping hypothesis")
            refined = best_transform
    refined_mask = residuals(refined, src, ref) < inlier_radius
    if refined_mask.sum() < mask.sum():
        return best_transform, mask
    return refined, refined_mask


def local_to_global_pose(correspondences, inlier_radius=DEFAULT_INLIER_RADIUS,
                         refine_iters=5):
    """RANSAC-free pose from grouped, scored correspondences.

    Every group (one superpoint pair) with at least 3 pairs proposes a
    weighted-SVD hypothesis; the one with the largest score-weighted inlier
    mass over all correspondences wins and is refined by weighted SVD on its
    inliers. Without a usable group, weighted SVD runs on everything.
    Returns the transform and its inlier mask.
    """
    src = np.asarray(correspondences.src_points, dtype=np.float64)
    ref = np.asarray(correspondences.ref_points, dtype=np.float64)
    scores = np.asarray(correspondences.scores, dtype=np.float64)
    groups = np.asarray(correspondences.groups, dtype=np.int64)
    if len(src) < 3:
        raise InsufficientCorrespondences(
            "pose estimation needs at least 3 correspondences, got {}".format(
                len(src)))
    weights = scores if scores.sum() > 0 else None

    best_transform, best_mass = None, -1.0
    for group in np.unique(groups):
        members = groups == group
        if members.sum() < 3:
            continue
        try:
            hypothesis = weighted_svd_alignment(
                src[members], ref[members],
                scores[members] if scores[members].sum() > 0 else None)
        except DegenerateConfiguration:
            continue
        inliers = residuals(hypothesis, src, ref) < inlier_radius
        mass = scores[inliers].sum() + inliers.sum() * 1e-9
        if mass > best_mass:
            best_transform, best_mass = hypothesis, mass
    if best_transform is None:
        logger.debug("no group can propose a pose, aligning all {} pairs"
                     .format(len(src)))
        best_transform = weighted_svd_alignment(src, ref, weights)

    transform = best_transform
    mask = residuals(transform, src, ref) < inlier_radius
    for _ in range(refine_iters):
        if mask.sum() < 3:
            break
        try:
            refined = weighted_svd_alignment(
                src[mask], ref[mask],
                scores[mask] if scores[mask].sum() > 0 else None)
        except DegenerateConfiguration:
            break
        refined_mask = residuals(refined, src, ref) < inlier_radius
        if refined_mask.sum() < mask.sum():
            break
        transform = refined
        if np.array_equal(refined_mask, mask):
            break
        mask = refined_mask
    logger.debug("local-to-global pose keeps {} of {} correspondences".format(
        int(mask.sum()), len(src)))
    return transform, mask
