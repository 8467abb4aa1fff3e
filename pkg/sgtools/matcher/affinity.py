import logging

import numpy as np

from sgtools.errors import DimensionMismatch
from sgtools.matcher.data import INSTANCE_NORM_EPS
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def instance_norm(a, eps=INSTANCE_NORM_EPS):
    """Zero mean, unit variance over all entries of a tape matrix."""
    centered = a - ad.mean(a)
    variance = ad.mean(ad.square(centered))
    return centered / ad.sqrt(variance + eps)


def forward_affinity(tape, weights, semantic_ref, geometric_ref,
                     semantic_src, geometric_src):
    """M_ref x M_src affinity; semantic and geometric parts scored apart."""
    semantic = semantic_ref @ weights['affinity.w_s'] @ semantic_src.T
    geometric = geometric_ref @ weights['affinity.w_p'] @ geometric_src.T
    return instance_norm(semantic + geometric)


def _check_width(embeddings, width, part, side):
    if embeddings.shape[1] != width:
        raise DimensionMismatch(
            "{} {} embeddings have width {}, affinity weights expect {}"
            .format(side, part, embeddings.shape[1], width))


def affinity(f_ref, f_src, params):
    """A = F_S_ref W_s F_S_src^T + F_P_ref W_p F_P_src^T, instance-normalized."""
    for embeddings, side in ((f_ref, 'ref'), (f_src, 'src')):
        _check_width(embeddings.semantic, params.d_s, 'semantic', side)
        _check_width(embeddings.geometric, params.d_p, 'geometric', side)
    tape = ad.Tape()
    weights = {name: tape.constant(params.tensors[name])
               for name in ('affinity.w_s', 'affinity.w_p')}
    result = forward_affinity(
        tape, weights,
        tape.constant(f_ref.semantic), tape.constant(f_ref.geometric),
        tape.constant(f_src.semantic), tape.constant(f_src.geometric))
    return np.asarray(result.value)
