import logging

import numpy as np

from sgtools.metrics.data import (NON_OVERLAP, OVERLAP, TOP3,
                                  MetricThresholds, f1_score)

logger = logging.getLogger(__name__)


def overlap_score(alignment, variant='all'):
    """mu = k~ times the mean score of the selected pairs (top 3 for top3)."""
    scores = np.sort(alignment.scores)[::-1]
    if variant == 'top3':
        scores = scores[:TOP3]
    elif variant != 'all':
        raise ValueError("unknown overlap variant '{}'".format(variant))
    if not len(scores):
        return 0.0
    return float(alignment.similarity * scores.mean())


def overlap_decision(mu, variant='all', thresholds=None):
    thresholds = thresholds or MetricThresholds()
    if mu < thresholds.overlap_threshold(variant):
        return NON_OVERLAP
    return OVERLAP


def overlap_classification(predicted, actual):
    """Precision, recall and F1 with overlap as the positive class."""
    predicted = [p == OVERLAP for p in predicted]
    actual = [a == OVERLAP for a in actual]
    if len(predicted) != len(actual):
        raise ValueError("{} predictions for {} labels".format(
            len(predicted), len(actual)))
    tp = sum(p and a for p, a in zip(predicted, actual))
    fp = sum(p and not a for p, a in zip(predicted, actual))
    fn = sum(a and not p for p, a in zip(predicted, actual))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return {'precision': precision, 'recall': recall,
            'f1': f1_score(precision, recall),
            'tp': tp, 'fp': fp, 'fn': fn,
            'tn': len(actual) - tp - fp - fn}
