import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from sgtools.encoder.data import EncoderConfig, EncoderParams
from sgtools.encoder.embed import prepare_scene
from sgtools.errors import DivergenceDetected, EmptyInput
from sgtools.matcher.align import forward_alignment
from sgtools.matcher.data import MatcherConfig, MatcherParams
from sgtools.training.autodiff import Tape
from sgtools.training.data import TrainingState
from sgtools.training.losses import (forward_matching_loss,
                                     forward_similarity_loss,
                                     forward_total_loss)
from sgtools.training.optim import Adam

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedPair:
    src: object
    ref: object
    gt_alignment: np.ndarray


@dataclass
class TrainingResult:
    encoder: EncoderParams
    matcher: MatcherParams
    loss_curve: List[tuple]
    state: TrainingState


def initialize_params(encoder_config, matcher_config, seed):
    encoder = EncoderParams.initialize(encoder_config, seed)
    matcher = MatcherParams.initialize(matcher_config, encoder.d_s,
                                       encoder.d_p, seed + 1)
    return encoder, matcher


def prepare_pair(pair, encoder_config):
    return PreparedPair(prepare_scene(pair.src_graph, pair.src_cloud,
                                      encoder_config),
                        prepare_scene(pair.ref_graph, pair.ref_cloud,
                                      encoder_config),
                        pair.gt_alignment)


def pair_losses(tape, weights, prepared, encoder_config, matcher_config):
    """(L_s, L_k) nodes of one pair; L_s is 0 when the pair shares nothing."""
    soft, k_tilde = forward_alignment(tape, weights, prepared.src,
                                      prepared.ref, encoder_config,
                                      matcher_config, training=True)
    m_src, m_ref = prepared.src.n_nodes, prepared.ref.n_nodes
    if prepared.gt_alignment.any():
        matching = forward_matching_loss(soft, prepared.gt_alignment)
    else:
        matching = tape.constant(0.0)
    similarity = forward_similarity_loss(k_tilde, prepared.gt_alignment,
                                         m_src, m_ref)
    return matching, similarity


def batch_step(prepared_pairs, tensors, encoder_config, matcher_config,
               alpha):
    """Loss values and gradients of one batch under the given tensors."""
    tape = Tape()
    weights = {name: tape.variable(value, name=name)
               for name, value in tensors.items()}
    losses = [pair_losses(tape, weights, prepared, encoder_config,
                          matcher_config) for prepared in prepared_pairs]
    total = forward_total_loss(losses, alpha)
    names = sorted(weights)
    grads = tape.gradients(total, [weights[name] for name in names])
    matching = [float(m.value) for m, _ in losses]
    similarity = [float(s.value) for _, s in losses]
    return float(total.value), matching, similarity, dict(zip(names, grads))


def train(dataset, config, encoder=None, matcher=None, state=None,
          encoder_config=None, matcher_config=None, on_epoch=None):
    """Trains encoder and matcher weights with Adam on scene pairs.

    Each epoch shuffles with a generator seeded by (seed, epoch), so a run
    resumed from ``state`` repeats the uninterrupted run exactly.
    ``on_epoch(result)`` is called after every epoch.
    """
    if not dataset:
        raise EmptyInput("training needs at least one scene pair")
    encoder_config = encoder.config if encoder is not None else \
        (encoder_config or EncoderConfig())
    matcher_config = matcher.config if matcher is not None else \
        (matcher_config or MatcherConfig())
    if encoder is None or matcher is None:
        fresh_encoder, fresh_matcher = initialize_params(
            encoder_config, matcher_config, config.seed)
        encoder = fresh_encoder if encoder is None else encoder
        matcher = fresh_matcher if matcher is None else matcher
    if state is None:
        state = TrainingState(0, [], Adam.from_config(config))
    elif state.optimizer is None:
        state.optimizer = Adam.from_config(config)
    optimizer = state.optimizer
    optimizer.beta1, optimizer.beta2 = config.beta1, config.beta2
    optimizer.eps = config.adam_eps

    prepared = [prepare_pair(pair, encoder_config) for pair in dataset]
    tensors = dict(encoder.tensors)
    tensors.update(matcher.tensors)
    encoder_names = set(encoder.tensors)

    result = TrainingResult(encoder, matcher, state.loss_curve, state)
    for epoch in range(state.epoch, config.epochs):
        lr = config.learning_rate_at(epoch)
        order = np.random.default_rng([config.seed, epoch]).permutation(
            len(prepared))
        matching, similarity, totals = [], [], []
        for start in range(0, len(order), config.batch_size):
            batch = [prepared[i] for i in order[start:start + config.batch_size]]
            total, batch_matching, batch_similarity, grads = batch_step(
                batch, tensors, encoder_config, matcher_config, config.alpha)
            if not np.isfinite(total) or not all(
                    np.all(np.isfinite(g)) for g in grads.values()):
                raise DivergenceDetected(
                    "loss became non-finite in epoch {} (batch at {})".format(
                        epoch, start))
            tensors = optimizer.step(tensors, grads, lr)
            matching.extend(batch_matching)
            similarity.extend(batch_similarity)
            totals.append((total, len(batch)))
            logger.debug("epoch {} batch {}: L={:.6f}".format(
                epoch, start // config.batch_size, total))

        mean_total = sum(t * n for t, n in totals) / len(prepared)
        row = (epoch, float(np.mean(matching)), float(np.mean(similarity)),
               float(mean_total))
        state.loss_curve.append(row)
        state.epoch = epoch + 1
        encoder = encoder.replace_tensors(
            {n: v for n, v in tensors.items() if n in encoder_names})
        matcher = matcher.replace_tensors(
            {n: v for n, v in tensors.items() if n not in encoder_names})
        result = TrainingResult(encoder, matcher, state.loss_curve, state)
        logger.info("epoch {}: lr={:.3g} L_s={:.4f} L_k={:.4f} L={:.4f}"
                    .format(epoch, lr, row[1], row[2], row[3]))
        if on_epoch is not None:
            on_epoch(result)
    return result
