"""Versioned binary checkpoints.

Layout: 8 magic bytes, the header length as a little-endian uint64, a UTF-8
JSON header, then every tensor as little-endian float64 in header order. The
header lists tensor names and shapes, both configs, and training state for
resuming (next epoch, loss curve, optimizer step count).
"""
import json
import logging
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from sgtools.cli.file import write_binary_file
from sgtools.encoder.data import EncoderConfig, EncoderParams
from sgtools.errors import CheckpointMismatch, ConfigError, \
    DimensionMismatch, IoError
from sgtools.matcher.data import MatcherConfig, MatcherParams
from sgtools.training.data import TrainingState
from sgtools.training.optim import Adam

logger = logging.getLogger(__name__)

MAGIC = b'SGTCKPT\x00'
FORMAT_VERSION = 1
_LENGTH = struct.Struct('<Q')


@dataclass
class Checkpoint:
    encoder: EncoderParams
    matcher: MatcherParams
    state: Optional[TrainingState] = None


def checkpoint_bytes(encoder, matcher, state=None):
    tensors = dict(encoder.tensors)
    tensors.update(matcher.tensors)
    if state is not None and state.optimizer is not None:
        tensors.update(state.optimizer.state_tensors())
    names = sorted(tensors)
    header = {
        'format_version': FORMAT_VERSION,
        'encoder': encoder.config.to_dict(),
        'matcher': matcher.config.to_dict(),
        'tensors': [{'name': name, 'shape': list(tensors[name].shape)}
                    for name in names],
    }
    if state is not None:
        header['training'] = {
            'epoch': state.epoch,
            'loss_curve': [list(row) for row in state.loss_curve],
            'optimizer_step': state.optimizer.step_count
            if state.optimizer is not None else 0
        }
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    payload = b''.join(
        np.ascontiguousarray(tensors[name], dtype='<f8').tobytes()
        for name in names)
    return MAGIC + _LENGTH.pack(len(encoded)) + encoded + payload


def save_checkpoint(file_path, encoder, matcher, state=None):
    write_binary_file(file_path, checkpoint_bytes(encoder, matcher, state))
    logger.info("wrote checkpoint {}".format(file_path))


def _parse_header(blob, where):
    if len(blob) < len(MAGIC) + _LENGTH.size or \
            not blob.startswith(MAGIC):
        raise CheckpointMismatch("{} is not an sgtools checkpoint".format(
            where))
    (length,) = _LENGTH.unpack_from(blob, len(MAGIC))
    start = len(MAGIC) + _LENGTH.size
    try:
        header = json.loads(blob[start:start + length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointMismatch("{}: unreadable header ({})".format(where, e))
    version = header.get('format_version')
    if version != FORMAT_VERSION:
        raise CheckpointMismatch(
            "{}: checkpoint format {} is not supported (expected {})".format(
                where, version, FORMAT_VERSION))
    return header, start + length


def checkpoint_from_bytes(blob, where='checkpoint'):
    header, offset = _parse_header(blob, where)
    tensors = {}
    for entry in header['tensors']:
        shape = tuple(entry['shape'])
        size = int(np.prod(shape, dtype=np.int64)) * 8
        chunk = blob[offset:offset + size]
        if len(chunk) != size:
            raise CheckpointMismatch("{}: payload ends inside tensor {}"
                                     .format(where, entry['name']))
        tensors[entry['name']] = np.frombuffer(chunk, dtype='<f8') \
            .astype(np.float64).reshape(shape)
        offset += size
    if offset != len(blob):
        raise CheckpointMismatch("{}: {} trailing bytes after the payload"
                                 .format(where, len(blob) - offset))

    try:
        encoder_config = EncoderConfig.from_dict(header['encoder'])
        matcher_config = MatcherConfig.from_dict(header['matcher'])
        encoder_names = set(encoder_config.tensor_shapes())
        encoder = EncoderParams(encoder_config, {
            name: value for name, value in tensors.items()
            if name in encoder_names})
        matcher = MatcherParams(matcher_config, {
            name: value for name, value in tensors.items()
            if not name.startswith('adam.') and name not in encoder_names})
    except (ConfigError, DimensionMismatch, KeyError, ValueError) as e:
        raise CheckpointMismatch("{}: {}".format(where, e))

    state = None
    if 'training' in header:
        training = header['training']
        optimizer = Adam.from_state(
            {name: value for name, value in tensors.items()
             if name.startswith('adam.')},
            int(training.get('optimizer_step', 0)))
        state = TrainingState(int(training['epoch']),
                              [tuple(row) for row in training['loss_curve']],
                              optimizer)
    return Checkpoint(encoder, matcher, state)


def load_checkpoint(file_path, encoder_config=None):
    """Reads a checkpoint; with encoder_config, also checks compatibility."""
    try:
        with open(file_path, 'rb') as in_file:
            blob = in_file.read()
    except OSError as e:
        raise IoError("unable to read {}: {}".format(file_path, e))
    checkpoint = checkpoint_from_bytes(blob, str(file_path))
    if encoder_config is not None:
        stored = checkpoint.encoder.config
        if stored.tensor_shapes() != encoder_config.tensor_shapes():
            raise CheckpointMismatch(
                "{} was trained for a different encoder shape".format(
                    file_path))
    return checkpoint
