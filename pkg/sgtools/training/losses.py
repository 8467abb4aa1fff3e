"""Matching, similarity and batch losses.

The matching loss is sparse negative cross-entropy: the mean of -log S~ over
the ground-truth cells. Binary ground truth makes the variant with S inside
the log degenerate, so the log is always taken of the prediction.
"""
import logging

import numpy as np

from sgtools.errors import EmptyBatch, EmptyGroundTruth, ShapeMismatch
from sgtools.training import autodiff as ad
from sgtools.training.data import MATCHING_LOSS_EPS, LossReport

logger = logging.getLogger(__name__)


def _gt_cells(soft_shape, gt):
    gt = np.asarray(gt)
    if soft_shape != gt.shape and soft_shape != (gt.shape[0] + 1,
                                                 gt.shape[1] + 1):
        raise ShapeMismatch("soft matrix {} does not fit gt alignment {}"
                            .format(soft_shape, gt.shape))
    rows, cols = np.nonzero(gt)
    if not len(rows):
        raise EmptyGroundTruth("ground-truth alignment has no pairs")
    return rows, cols


def forward_matching_loss(soft, gt):
    rows, cols = _gt_cells(soft.shape, gt)
    picked = soft[rows, cols]
    return ad.sum(ad.log(picked + MATCHING_LOSS_EPS)) * (-1.0 / len(rows))


def target_similarity(gt, m_src, m_ref):
    """k = |S| / min(M_src, M_ref)."""
    return float(np.asarray(gt).sum()) / min(m_src, m_ref)


def forward_similarity_loss(k_tilde, gt, m_src, m_ref):
    return ad.square(k_tilde - target_similarity(gt, m_src, m_ref))


def forward_total_loss(losses, alpha):
    """Mean over the batch of L_s + alpha L_k, from (L_s, L_k) node pairs."""
    if not losses:
        raise EmptyBatch("cannot average an empty batch")
    terms = [matching + alpha * similarity for matching, similarity in losses]
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total * (1.0 / len(terms))


def matching_loss(soft_matrix, gt):
    soft_matrix = np.asarray(soft_matrix, dtype=np.float64)
    rows, cols = _gt_cells(soft_matrix.shape, gt)
    return float(-np.mean(np.log(soft_matrix[rows, cols] +
                                 MATCHING_LOSS_EPS)))


def similarity_loss(k_tilde, gt, m_src, m_ref):
    return (target_similarity(gt, m_src, m_ref) - float(k_tilde)) ** 2


def total_loss(batch, alpha=10.0):
    if not batch:
        raise EmptyBatch("cannot average an empty batch")
    return float(np.mean([matching + alpha * similarity
                          for matching, similarity in batch]))


def loss_report(batch, alpha=10.0):
    matching = float(np.mean([m for m, _ in batch])) if batch else 0.0
    similarity = float(np.mean([s for _, s in batch])) if batch else 0.0
    return LossReport(matching, similarity, total_loss(batch, alpha), alpha)
