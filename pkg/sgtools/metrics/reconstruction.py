import logging

import numpy as np

from sgtools.errors import EmptyCloud
from sgtools.geometry.search import nearest_neighbors
from sgtools.metrics.data import MetricThresholds, f1_score

logger = logging.getLogger(__name__)


def mosaic_metrics(reconstruction, gt, thresholds=None):
    """Acc and Comp in meters, Prec/Recall/F1 at the mosaic distance.

    Acc and Prec walk the ground-truth points to the reconstruction; Comp and
    Recall walk the reconstruction back to the ground truth.
    """
    thresholds = thresholds or MetricThresholds()
    if not len(reconstruction) or not len(gt):
        raise EmptyCloud("mosaic metrics need two non-empty clouds")
    to_recon, _ = nearest_neighbors(gt.points, reconstruction.points)
    to_gt, _ = nearest_neighbors(reconstruction.points, gt.points)
    precision = float(np.mean(to_recon < thresholds.mosaic_dist))
    recall = float(np.mean(to_gt < thresholds.mosaic_dist))
    return {
        'acc': float(to_recon.mean()),
        'comp': float(to_gt.mean()),
        'precision': precision,
        'recall': recall,
        'f1': f1_score(precision, recall)
    }
