"""Log-domain Sinkhorn with a dummy row and column.

The scores a / temperature are padded with a zero row and a zero column.
Each round normalizes the interior rows (their dummy-column cell included)
and then the interior columns (their dummy-row cell included). The dummy
row, the dummy column and the corner cell are never normalized themselves,
so they absorb whatever mass the interior cannot place.
"""
import logging

import numpy as np

from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def _masks(rows, cols):
    row_mask = np.ones((rows, 1))
    row_mask[-1, 0] = 0.0
    col_mask = np.ones((1, cols))
    col_mask[0, -1] = 0.0
    return row_mask, col_mask


def pad_scores(tape, a, temperature):
    """(M+1) x (N+1) log scores: a / temperature plus zero dummies."""
    m, n = a.shape
    scaled = a * (1.0 / temperature)
    scaled = ad.concat([scaled, tape.constant(np.zeros((m, 1)))], axis=1)
    return ad.concat([scaled, tape.constant(np.zeros((1, n + 1)))], axis=0)


def row_residual(log_matrix):
    """Worst deviation of an interior row sum from 1."""
    sums = np.exp(log_matrix[:-1]).sum(axis=1)
    return float(np.abs(sums - 1.0).max()) if len(sums) else 0.0


def forward_sinkhorn(tape, log_scores, iters, tolerance=None, max_iters=None):
    """Runs Sinkhorn on padded log scores and returns the log of S~.

    Exactly ``iters`` rounds are recorded when tolerance is None. Otherwise
    rounds continue past ``iters`` until the interior row residual is below
    tolerance, up to max_iters.
    """
    rows, cols = log_scores.shape
    row_mask, col_mask = _masks(rows, cols)
    z = log_scores
    limit = iters if tolerance is None else max(iters, max_iters or iters)
    done = 0
    while done < limit:
        z = z - ad.logsumexp(z, axis=1) * row_mask
        z = z - ad.logsumexp(z, axis=0) * col_mask
        done += 1
        if tolerance is not None and done >= iters and \
                row_residual(z.value) < tolerance:
            break
    if tolerance is not None:
        residual = row_residual(z.value)
        if residual >= tolerance:
            logger.warning("Sinkhorn stopped after {} rounds with row "
                           "residual {:.3g}".format(done, residual))
        else:
            logger.debug("Sinkhorn converged in {} rounds".format(done))
    return z


def sinkhorn_with_dummy(a, params):
    """Soft assignment S~ of an affinity matrix (rows keep the input's order).

    Returns an (rows + 1) x (cols + 1) non-negative matrix whose interior
    row and column sums, dummy cells included, equal 1.
    """
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("affinity has non-finite entries")
    config = params.config if hasattr(params, 'config') else params
    tape = ad.Tape()
    log_scores = pad_scores(tape, tape.constant(a),
                            config.sinkhorn_temperature)
    z = forward_sinkhorn(tape, log_scores, config.sinkhorn_iters,
                         config.sinkhorn_tolerance,
                         config.max_iter_factor * config.sinkhorn_iters)
    return np.exp(z.value)
