import logging
from concurrent.futures import ThreadPoolExecutor

from sgtools.errors import DegenerateConfiguration, NoCorrespondences
from sgtools.matcher.align import align
from sgtools.matcher.data import SoftAlignment
from sgtools.metrics.alignment import alignment_metrics
from sgtools.metrics.data import (HITS_AT, NON_OVERLAP, OVERLAP,
                                  EvaluationConfig, MetricThresholds)
from sgtools.metrics.overlap import overlap_decision, overlap_score
from sgtools.metrics.registration import (chamfer, registration_metrics,
                                          scc)
from sgtools.registration.data import RegistrationConfig
from sgtools.registration.pipeline import (ground_truth_correspondences,
                                           register_clouds)
from sgtools.scenegraph.data import overlap_bucket

logger = logging.getLogger(__name__)

ALIGNMENT_COLUMNS = tuple('hits@{}'.format(k) for k in HITS_AT) + \
    ('mrr', 'f1')
REGISTRATION_COLUMNS = ('rre', 'rte', 'rmse', 'registered', 'inlier_ratio',
                        'fmr', 'scc', 'chamfer', 'n_correspondences')
COLUMNS = ('name', 'seed', 'overlap_fraction', 'bucket', 'm_src', 'm_ref',
           'k_tilde', 'mu', 'predicted_overlap', 'actual_overlap') + \
    ALIGNMENT_COLUMNS + REGISTRATION_COLUMNS


def actual_overlap(pair):
    return OVERLAP if overlap_bucket(pair.overlap_fraction) else NON_OVERLAP


def score_registration(pair, result, thresholds=None, gt_radius=0.05):
    """Registration metrics of one result; None where gt is unavailable."""
    row = dict.fromkeys(REGISTRATION_COLUMNS)
    row['n_correspondences'] = len(result.correspondences)
    gt_correspondences = ground_truth_correspondences(pair, gt_radius)
    if not len(gt_correspondences):
        return row
    correspondences = result.correspondences
    row.update(registration_metrics(result.transform, pair.gt_transform,
                                    gt_correspondences, correspondences,
                                    thresholds))
    row['scc'] = scc(correspondences, pair.src_cloud.object_ids,
                     pair.ref_cloud.object_ids, pair.gt_alignment)
    row['chamfer'] = chamfer(pair.src_cloud, pair.ref_cloud,
                             result.transform)
    return row


def _registration_row(pair, alignment, registration, thresholds, evaluation):
    if not pair.gt_alignment.any():
        return dict.fromkeys(REGISTRATION_COLUMNS)
    try:
        result = register_clouds(pair.src_cloud, pair.ref_cloud, alignment,
                                 evaluation.strategy, registration)
    except (NoCorrespondences, DegenerateConfiguration) as e:
        logger.warning("pair {} not registered: {}".format(pair.seed, e))
        row = dict.fromkeys(REGISTRATION_COLUMNS)
        row['registered'] = False
        row['n_correspondences'] = 0
        return row
    return score_registration(pair, result, thresholds, evaluation.gt_radius)


def evaluate_pair(pair, encoder, matcher, name=None, registration=None,
                  thresholds=None, evaluation=None):
    """One evaluation row: alignment, overlap check and registration."""
    registration = registration or RegistrationConfig()
    thresholds = thresholds or MetricThresholds()
    evaluation = evaluation or EvaluationConfig()
    alignment = align(pair, encoder, matcher)
    mu = overlap_score(alignment, evaluation.overlap_variant)
    row = {
        'name': name,
        'seed': pair.seed,
        'overlap_fraction': pair.overlap_fraction,
        'bucket': overlap_bucket(pair.overlap_fraction),
        'm_src': alignment.m_src,
        'm_ref': alignment.m_ref,
        'k_tilde': alignment.similarity,
        'mu': mu,
        'predicted_overlap': overlap_decision(mu, evaluation.overlap_variant,
                                              thresholds),
        'actual_overlap': actual_overlap(pair)
    }
    row.update(alignment_metrics(alignment, pair.gt_alignment, HITS_AT))
    registration_alignment = SoftAlignment.from_ground_truth(
        pair.gt_alignment) if evaluation.use_gt_alignment else alignment
    row.update(_registration_row(pair, registration_alignment, registration,
                                 thresholds, evaluation))
    logger.debug("evaluated pair {}: mu={:.3f} f1={:.3f}".format(
        name, mu, row['f1']))
    return row


def evaluate_pairs(named_pairs, encoder, matcher, registration=None,
                   thresholds=None, evaluation=None, threads=None):
    """Evaluation rows for [(name, ScenePair)], in input order."""
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(
            lambda item: evaluate_pair(item[1], encoder, matcher, item[0],
                                       registration, thresholds, evaluation),
            named_pairs))

