import logging

import numpy as np

from sgtools.cli.file import read_schema_file, write_schema_file
from sgtools.encoder.embed import forward_embeddings, prepare_scene
from sgtools.errors import ParseError
from sgtools.matcher.affinity import forward_affinity
from sgtools.matcher.data import SoftAlignment
from sgtools.matcher.selection import topk_select
from sgtools.matcher.similarity import forward_afa
from sgtools.matcher.sinkhorn import forward_sinkhorn, pad_scores
from sgtools.training import autodiff as ad

logger = logging.getLogger(__name__)


def forward_alignment(tape, weights, src_inputs, ref_inputs, encoder_config,
                      matcher_config, training=False):
    """Soft matrix S~ and k~ nodes of one pair, recorded on ``tape``.

    Training records a fixed number of Sinkhorn rounds so gradients flow
    through an unrolled iteration; inference iterates to tolerance.
    """
    semantic_src, geometric_src = forward_embeddings(tape, weights, src_inputs,
                                                     encoder_config)
    semantic_ref, geometric_ref = forward_embeddings(tape, weights, ref_inputs,
                                                     encoder_config)
    a = forward_affinity(tape, weights, semantic_ref, geometric_ref,
                         semantic_src, geometric_src)
    log_scores = pad_scores(tape, a.T, matcher_config.sinkhorn_temperature)
    if training:
        log_soft = forward_sinkhorn(tape, log_scores,
                                    matcher_config.train_sinkhorn_iters)
    else:
        log_soft = forward_sinkhorn(
            tape, log_scores, matcher_config.sinkhorn_iters,
            matcher_config.sinkhorn_tolerance,
            matcher_config.max_iter_factor * matcher_config.sinkhorn_iters)
    soft = ad.exp(log_soft)
    k_tilde = forward_afa(tape, weights, soft, src_inputs.n_nodes,
                          ref_inputs.n_nodes)
    return soft, k_tilde


def constant_weights(tape, encoder_params, matcher_params):
    tensors = dict(encoder_params.tensors)
    tensors.update(matcher_params.tensors)
    return {name: tape.constant(value) for name, value in tensors.items()}


def align_graphs(src, ref, encoder_params, matcher_params):
    """Aligns two (SceneGraph, PointCloud) scenes; src nodes index rows."""
    src_inputs = prepare_scene(src[0], src[1], encoder_params.config)
    ref_inputs = prepare_scene(ref[0], ref[1], encoder_params.config)
    tape = ad.Tape()
    weights = constant_weights(tape, encoder_params, matcher_params)
    soft, k_tilde = forward_alignment(tape, weights, src_inputs, ref_inputs,
                                      encoder_params.config,
                                      matcher_params.config)
    similarity = float(k_tilde.value)
    selected = topk_select(soft.value, similarity, ref_inputs.n_nodes)
    logger.debug("aligned {}x{} nodes: k~={:.3f}, {} pairs selected".format(
        src_inputs.n_nodes, ref_inputs.n_nodes, similarity, len(selected)))
    return SoftAlignment(soft.value, similarity, selected)


def align(pair, encoder_params, matcher_params):
    return align_graphs(pair.src, pair.ref, encoder_params, matcher_params)


def alignment_to_schema(alignment, src_graph=None, ref_graph=None,
                        include_soft_matrix=False):
    """Alignment result document; node indices become ids when graphs given."""
    def src_id(i):
        return int(src_graph.node_ids[i]) if src_graph is not None else i

    def ref_id(j):
        return int(ref_graph.node_ids[j]) if ref_graph is not None else j

    document = {
        'pairs': [{'src': src_id(i), 'ref': ref_id(j), 'score': score}
                  for i, j, score in alignment.selected_pairs],
        'k_tilde': alignment.similarity,
        'm_src': alignment.m_src,
        'm_ref': alignment.m_ref
    }
    if include_soft_matrix:
        document['soft_matrix'] = alignment.soft_matrix.tolist()
    return document


def alignment_from_schema(document, src_graph=None, ref_graph=None,
                          where='alignment'):
    try:
        m_src, m_ref = int(document['m_src']), int(document['m_ref'])
        pairs = [(p['src'], p['ref'], float(p['score']))
                 for p in document['pairs']]
        similarity = float(document['k_tilde'])
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError("{}: malformed alignment document ({})".format(
            where, e))
    if src_graph is not None and ref_graph is not None:
        try:
            pairs = [(src_graph.index_of(i), ref_graph.index_of(j), s)
                     for i, j, s in pairs]
        except KeyError as e:
            raise ParseError("{}: node id {} does not exist".format(
                where, e.args[0]))
    if 'soft_matrix' in document:
        soft = np.asarray(document['soft_matrix'], dtype=np.float64)
        if soft.shape != (m_src + 1, m_ref + 1):
            raise ParseError("{}: soft_matrix has shape {}".format(
                where, soft.shape))
    else:
        # Without the dense matrix only the selection is recoverable
        soft = np.zeros((m_src + 1, m_ref + 1))
        for i, j, score in pairs:
            soft[i, j] = score
    try:
        return SoftAlignment(soft, similarity, pairs)
    except ValueError as e:
        raise ParseError("{}: {}".format(where, e))


def save_alignment(file_path, alignment, src_graph=None, ref_graph=None,
                   include_soft_matrix=False):
    write_schema_file(file_path, alignment_to_schema(
        alignment, src_graph, ref_graph, include_soft_matrix))


def load_alignment(file_path, src_graph=None, ref_graph=None):
    return alignment_from_schema(read_schema_file(file_path), src_graph,
                                 ref_graph, where=str(file_path))
