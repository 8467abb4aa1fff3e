"""Node alignment metrics: Hits@k, mean reciprocal rank and matching F1.

Ranks are 1-based; Hits@k counts ranks <= k.
"""
import logging

import numpy as np

from sgtools.errors import EmptyInput, ShapeMismatch

logger = logging.getLogger(__name__)


def _ranks(ranks):
    ranks = np.asarray(ranks, dtype=np.int64).reshape(-1)
    if not len(ranks):
        raise EmptyInput("no ranks to score")
    if ranks.min() < 1:
        raise ValueError("ranks are 1-based, got {}".format(ranks.min()))
    return ranks


def alignment_ranks(soft_matrix, gt_alignment):
    """Rank of the true reference node in each gt source node's row.

    A row ranks its reference nodes by decreasing soft score; the rank is
    one plus the number of strictly higher scores, so ties favor the truth.
    """
    gt = np.asarray(gt_alignment)
    soft = np.asarray(soft_matrix, dtype=np.float64)
    if soft.shape == (gt.shape[0] + 1, gt.shape[1] + 1):
        soft = soft[:-1, :-1]
    if soft.shape != gt.shape:
        raise ShapeMismatch("soft matrix {} against gt alignment {}".format(
            soft.shape, gt.shape))
    rows, cols = np.nonzero(gt)
    return [int((soft[i] > soft[i, j]).sum()) + 1 for i, j in zip(rows, cols)]


def hits_at_k(ranks, k):
    return float(np.mean(_ranks(ranks) <= k))


def mean_reciprocal_rank(ranks):
    return float(np.mean(1.0 / _ranks(ranks)))


def matching_f1(predicted, gt_alignment):
    """2tp / (2tp + fp + fn) over binary matrices; 0 when nothing is set."""
    predicted = np.asarray(predicted, dtype=np.float64)
    gt = np.asarray(gt_alignment, dtype=np.float64)
    if predicted.shape != gt.shape:
        raise ShapeMismatch("prediction {} against gt alignment {}".format(
            predicted.shape, gt.shape))
    tp = float((predicted * gt).sum())
    fp = float((predicted * (1.0 - gt)).sum())
    fn = float(((1.0 - predicted) * gt).sum())
    denominator = 2.0 * tp + fp + fn
    if denominator == 0:
        return 0.0
    return 2.0 * tp / denominator


def alignment_metrics(alignment, gt_alignment, hits_at=(1, 3, 5)):
    """Hits@k, MRR and F1 of one alignment; rank metrics are None without gt."""
    ranks = alignment_ranks(alignment.soft_matrix, gt_alignment)
    metrics = {}
    for k in hits_at:
        metrics['hits@{}'.format(k)] = hits_at_k(ranks, k) if ranks else None
    metrics['mrr'] = mean_reciprocal_rank(ranks) if ranks else None
    metrics['f1'] = matching_f1(alignment.hard_matrix(), gt_alignment)
    return metrics
