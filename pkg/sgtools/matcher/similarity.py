"""Graph similarity head producing k~ from a soft assignment.

The two graphs become one bipartite graph whose edges are the interior cells
of S~. Source nodes start from zero vectors and reference nodes from the
one-hot e0. One attention-weighted aggregation layer, a readout of the
overlap-normalized sum and an attention-pooled summary, and a sigmoid give
k~. With no interior mass every message vanishes and k~ = sigmoid(b_out).

This head is a simplification of a learned graph-pair similarity: every
reference node carries the same one-hot feature and every source node the
zero vector, so a node's message is its S~ row or column sum times a
shared vector. k~ therefore depends only on the row and column sums of the
interior of S~, not on which cells hold the mass.
"""
import logging

import numpy as np

from sgtools.errors import DimensionMismatch
from sgtools.matcher.data import AFA_INPUT_WIDTH
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def _node_features(m_src, m_ref):
    src = np.zeros((m_src, AFA_INPUT_WIDTH))
    ref = np.zeros((m_ref, AFA_INPUT_WIDTH))
    ref[:, 0] = 1.0
    return src, ref


def forward_afa(tape, weights, soft, m_src, m_ref):
    """Scalar k~ node from the (M_src+1) x (M_ref+1) soft matrix node."""
    if min(m_src, m_ref) < 1:
        raise DimensionMismatch("both graphs need at least one node")
    interior = soft[:m_src, :m_ref]
    x_src, x_ref = _node_features(m_src, m_ref)
    w_msg, b_msg = weights['afa.w_msg'], weights['afa.b_msg']
    # Every message is weighted by the S~ cell of its edge
    into_src = interior @ (tape.constant(x_ref) @ w_msg + b_msg)
    into_ref = interior.T @ (tape.constant(x_src) @ w_msg + b_msg)
    h = ad.leaky_relu(ad.concat([into_src, into_ref], axis=0))

    count = m_src + m_ref
    summed = ad.sum(h, axis=0) * (1.0 / min(m_src, m_ref))
    attention = ad.segment_softmax(h @ weights['afa.a_pool'],
                                   np.zeros(count, dtype=np.int64), 1)
    pooled = ad.sum(h * ad.reshape(attention, (count, 1)), axis=0)
    readout = ad.concat([summed, pooled], axis=0)
    logit = readout @ weights['afa.w_out'] + weights['afa.b_out']
    return ad.reshape(ad.sigmoid(logit), ())


def afa_similarity(soft_matrix, m_src, m_ref, params):
    """k~ in [0, 1] for a soft assignment of an M_src x M_ref pair."""
    soft_matrix = np.asarray(soft_matrix, dtype=np.float64)
    if soft_matrix.shape != (m_src + 1, m_ref + 1):
        raise DimensionMismatch(
            "soft matrix has shape {}, expected {}".format(
                soft_matrix.shape, (m_src + 1, m_ref + 1)))
    tape = ad.Tape()
    weights = {name: tape.constant(value)
               for name, value in params.tensors.items()
               if name.startswith('afa.')}
    return float(forward_afa(tape, weights, tape.constant(soft_matrix),
                             m_src, m_ref).value)
