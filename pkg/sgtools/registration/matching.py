"""Superpoint matching, semantic rescoring and point correspondences.

Matrices over superpoints put reference superpoints on rows and source
superpoints on columns.
"""
import logging

import numpy as np

from sgtools.errors import DimensionMismatch, ObjectOutOfRange
from sgtools.registration.data import POINT, CorrespondenceSet

logger = logging.getLogger(__name__)


def superpoint_matching_matrix(src_sp, ref_sp):
    """C[i][j] = (cos(ref i, src j) + 1) / 2, so every entry is in [0, 1]."""
    if src_sp.descriptors.shape[1] != ref_sp.descriptors.shape[1]:
        raise DimensionMismatch(
            "superpoint descriptors differ in width: {} vs {}".format(
                src_sp.descriptors.shape[1], ref_sp.descriptors.shape[1]))

    def unit(descriptors):
        norms = np.linalg.norm(descriptors, axis=1, keepdims=True)
        return descriptors / np.where(norms > 0, norms, 1.0)

    cosine = unit(ref_sp.descriptors) @ unit(src_sp.descriptors).T
    return (np.clip(cosine, -1.0, 1.0) + 1.0) / 2.0


def rescore(c, alignment, src_sp, ref_sp, gamma=0.2):
    """C' = C + gamma R with R[i][j] = S~[object(src j), object(ref i)]."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0, got {}".format(gamma))
    soft = getattr(alignment, 'soft_matrix', alignment)
    interior = np.asarray(soft, dtype=np.float64)[:-1, :-1]
    for sp, size, side in ((src_sp, interior.shape[0], 'source'),
                           (ref_sp, interior.shape[1], 'reference')):
        ids = np.asarray(sp.object_ids)
        bad = ids[(ids < 0) | (ids >= size)]
        if len(bad):
            raise ObjectOutOfRange(
                "{} superpoint object id {} outside the alignment's {} nodes"
                .format(side, int(bad[0]), size))
    c = np.asarray(c, dtype=np.float64)
    if gamma == 0:
        return c.copy()
    r = interior[src_sp.object_ids[None, :], ref_sp.object_ids[:, None]]
    return c + gamma * r


def candidate_pairs(c_prime, top_m, mutual=True):
    """(ref, src) superpoint pairs by decreasing C', ties by (row, column)."""
    if c_prime.size == 0:
        return []
    rows, cols = np.indices(c_prime.shape)
    rows, cols, values = rows.ravel(), cols.ravel(), c_prime.ravel()
    if mutual:
        keep = (np.argmax(c_prime, axis=1)[rows] == cols) & \
            (np.argmax(c_prime, axis=0)[cols] == rows)
        rows, cols, values = rows[keep], cols[keep], values[keep]
    order = np.lexsort((cols, rows, -values))[:top_m]
    return [(int(rows[k]), int(cols[k]), float(values[k])) for k in order]


def match_points(src_descriptors, ref_descriptors, ratio):
    """Nearest-descriptor matches passing a ratio test and a mutual check.

    Returns (src positions, ref positions) within the two member lists.
    """
    if not len(src_descriptors) or not len(ref_descriptors):
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    distances = np.linalg.norm(
        src_descriptors[:, None, :] - ref_descriptors[None, :, :], axis=2)
    nearest = np.argmin(distances, axis=1)
    best = distances[np.arange(len(distances)), nearest]
    if distances.shape[1] > 1:
        second = np.partition(distances, 1, axis=1)[:, 1]
        passed = best < ratio * second
    else:
        passed = np.ones(len(best), dtype=bool)
    mutual = np.argmin(distances, axis=0)[nearest] == \
        np.arange(len(distances))
    keep = np.flatnonzero(passed & mutual)
    return keep, nearest[keep]


def extract_correspondences(c_prime, src_sp, ref_sp, top_m, mutual=True,
                            ratio=0.8):
    """Point correspondences from the top_m superpoint pairs of C'.

    Each correspondence scores the C' entry of its superpoint pair; a point
    pair found through several superpoint pairs keeps the best one.
    """
    if top_m < 1:
        raise ValueError("top_m must be at least 1")
    pairs = candidate_pairs(np.asarray(c_prime), top_m, mutual)
    seen = set()
    ref_out, src_out, scores, groups = [], [], [], []
    for group, (i, j, score) in enumerate(pairs):
        ref_members = ref_sp.members[i]
        src_members = src_sp.members[j]
        src_pos, ref_pos = match_points(
            src_sp.point_descriptors[src_members],
            ref_sp.point_descriptors[ref_members], ratio)
        for s, r in zip(src_members[src_pos], ref_members[ref_pos]):
            key = (int(s), int(r))
            if key in seen:
                continue
            seen.add(key)
            src_out.append(int(s))
            ref_out.append(int(r))
            scores.append(max(score, 0.0))
            groups.append(group)
    src_out = np.asarray(src_out, dtype=np.int64)
    ref_out = np.asarray(ref_out, dtype=np.int64)
    logger.debug("{} superpoint pairs gave {} point correspondences".format(
        len(pairs), len(src_out)))
    return CorrespondenceSet(
        ref_sp.point_indices[ref_out] if len(ref_out) else ref_out,
        src_sp.point_indices[src_out] if len(src_out) else src_out,
        np.asarray(scores, dtype=np.float64),
        src_sp.points[src_out].reshape(-1, 3),
        ref_sp.points[ref_out].reshape(-1, 3),
        np.asarray(groups, dtype=np.int64), POINT)
