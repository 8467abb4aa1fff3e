import logging

import numpy as np

from sgtools.training.autodiff import Tape

logger = logging.getLogger(__name__)

# Gradients below this magnitude are compared in absolute terms
RELATIVE_ERROR_FLOOR = 1e-5


def _evaluate(f, params):
    tape = Tape()
    weights = {name: tape.constant(value) for name, value in params.items()}
    return float(np.asarray(f(tape, weights).value).reshape(()))


def grad_check(f, params, step=1e-5, samples_per_tensor=4, seed=0,
               floor=RELATIVE_ERROR_FLOOR):
    """Worst relative error of tape gradients against central differences.

    ``f(tape, weights)`` must record a scalar on the tape from the weight
    nodes. A few coordinates per tensor are sampled with a seeded generator.
    """
    tape = Tape()
    weights = {name: tape.variable(value, name=name)
               for name, value in params.items()}
    names = sorted(weights)
    output = f(tape, weights)
    analytic = dict(zip(names, tape.gradients(output,
                                              [weights[n] for n in names])))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in names:
        value = np.asarray(params[name], dtype=np.float64)
        count = min(samples_per_tensor, value.size)
        for flat in rng.choice(value.size, size=count, replace=False):
            index = np.unravel_index(flat, value.shape)
            shifted = dict(params)
            plus, minus = value.copy(), value.copy()
            plus[index] += step
            minus[index] -= step
            shifted[name] = plus
            upper = _evaluate(f, shifted)
            shifted[name] = minus
            lower = _evaluate(f, shifted)
            numeric = (upper - lower) / (2.0 * step)
            exact = analytic[name][index]
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            if error > worst:
                logger.debug("{}{}: tape {:.6g}, numeric {:.6g}".format(
                    name, list(index), exact, numeric))
                worst = error
    return worst
