import logging

import numpy as np

from sgtools.cli.file import write_csv_file, write_schema_file
from sgtools.errors import EmptyInput
from sgtools.metrics.data import BUCKETS, OVERALL
from sgtools.metrics.evaluate import (ALIGNMENT_COLUMNS, COLUMNS,
                                      REGISTRATION_COLUMNS)
from sgtools.metrics.overlap import overlap_classification

logger = logging.getLogger(__name__)

SUMMARY_SCHEMA_VERSION = 1

# summary aggregates; boolean columns become recalls
MEAN_COLUMNS = ALIGNMENT_COLUMNS + ('rre', 'rte', 'rmse', 'inlier_ratio',
                                    'scc', 'chamfer')
RECALL_COLUMNS = {'registered': 'rr', 'fmr': 'fmr'}


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return '{:.6g}'.format(value)
    return value


def csv_rows(rows):
    return [[_cell(row.get(column)) for column in COLUMNS] for row in rows]


def _mean(values):
    values = [float(v) for v in values if v is not None]
    return float(np.mean(values)) if values else None


def aggregate(rows):
    summary = {'count': len(rows)}
    for column in MEAN_COLUMNS:
        summary[column] = _mean(row.get(column) for row in rows)
    for column, name in RECALL_COLUMNS.items():
        summary[name] = _mean(row.get(column) for row in rows)
    return summary


def summarize(rows):
    """Per-bucket and overall aggregates plus the overlap-check confusion."""
    if not rows:
        raise EmptyInput("nothing to summarize: zero evaluated pairs")
    buckets = {bucket: aggregate([r for r in rows if r['bucket'] == bucket])
               for bucket in BUCKETS}
    buckets[OVERALL] = aggregate(rows)
    return {
        'version': SUMMARY_SCHEMA_VERSION,
        'buckets': buckets,
        'overlap_check': overlap_classification(
            [r['predicted_overlap'] for r in rows],
            [r['actual_overlap'] for r in rows])
    }


def write_evaluation(csv_path, summary_path, rows):
    summary = summarize(rows)
    write_csv_file(csv_path, COLUMNS, csv_rows(rows))
    write_schema_file(summary_path, summary)
    logger.info("wrote {} evaluation rows to {} and summary to {}".format(
        len(rows), csv_path, summary_path))
    return summary


def registration_report(result, gt_metrics=None):
    """Registration result document; metrics are added when gt is known."""
    document = {
        'transform': result.transform.to_list(),
        'strategy': result.strategy.value,
        'n_correspondences': len(result.correspondences),
        'n_inliers': int(np.sum(result.inliers))
        if result.inliers is not None else None
    }
    if gt_metrics is not None:
        document['metrics'] = {k: v for k, v in gt_metrics.items()
                               if k in REGISTRATION_COLUMNS}
    return document
