#!/usr/bin/env python3
import argparse
import logging
import os
import sys

from deepdiff import DeepDiff

from sgtools.cli.file import write_csv_file, write_schema_file
from sgtools.cli.handler import CliHandler
from sgtools.errors import ConfigError
from sgtools.matcher.align import align, alignment_to_schema
from sgtools.metrics.alignment import alignment_metrics
from sgtools.metrics.data import HITS_AT
from sgtools.scenegraph.file import load_pair_manifest, load_scene_pair
from sgtools.training.checkpoint import load_checkpoint, save_checkpoint
from sgtools.training.data import LOSS_CURVE_HEADER
from sgtools.training.trainer import initialize_params, train

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = 'model.ckpt'
LOSS_CURVE_FILE = 'loss_curve.csv'


def load_model(config, checkpoint_path=None):
    """(encoder, matcher) from a checkpoint, or freshly initialized."""
    if checkpoint_path is None:
        logger.warning("no checkpoint given, using untrained parameters")
        return initialize_params(config.encoder, config.matcher,
                                 config.training.seed)
    checkpoint = load_checkpoint(checkpoint_path, config.encoder)
    return checkpoint.encoder, checkpoint.matcher


def write_loss_curve(file_path, loss_curve):
    write_csv_file(file_path, LOSS_CURVE_HEADER,
                   [[int(row[0])] + ['{:.10g}'.format(v) for v in row[1:]]
                    for row in loss_curve])


class ModelCliHandler(CliHandler):

    def _train(self):
        dataset = [pair for _, pair in load_pair_manifest(self._args.manifest)]
        encoder = matcher = state = None
        if self._args.resume:
            checkpoint = load_checkpoint(self._args.resume,
                                         self._config.encoder)
            encoder, matcher, state = checkpoint.encoder, checkpoint.matcher, \
                checkpoint.state
            logger.info("resuming from {} at epoch {}".format(
                self._args.resume, state.epoch if state else 0))
            differences = DeepDiff(self._config.matcher.to_dict(),
                                   matcher.config.to_dict())
            if differences:
                logger.warning(
                    "matcher config of {} overrides the run config: {}"
                    .format(self._args.resume, differences))
        checkpoint_path = os.path.join(self._args.out, CHECKPOINT_FILE)
        curve_path = os.path.join(self._args.out, LOSS_CURVE_FILE)

        def on_epoch(result):
            save_checkpoint(checkpoint_path, result.encoder, result.matcher,
                            result.state)
            write_loss_curve(curve_path, result.loss_curve)

        result = train(dataset, self._config.training, encoder, matcher,
                       state, self._config.encoder, self._config.matcher,
                       on_epoch=on_epoch)
        on_epoch(result)
        return "Trained to epoch {}; wrote {} and {}".format(
            result.state.epoch, checkpoint_path, curve_path)

    def _align(self):
        pair = load_scene_pair(self._args.pair)
        encoder, matcher = load_model(self._config, self._args.checkpoint)
        alignment = align(pair, encoder, matcher)
        document = alignment_to_schema(alignment, pair.src_graph,
                                       pair.ref_graph,
                                       self._args.soft_matrix)
        document['metrics'] = alignment_metrics(alignment, pair.gt_alignment,
                                                HITS_AT)
        write_schema_file(self._args.out, document)
        return "Aligned {} pairs of nodes; wrote {}".format(
            alignment.k, self._args.out)

    def _parse_args(self):
        parser = argparse.ArgumentParser(
            description="Train the alignment model and align scene pairs",
            prog="sgtools model",
            add_help=False
        )

        parser.add_argument('action',
                            choices=[
                                'align',
                                'help',
                                'train'
                            ],
                            help='Model action to take.')
        parser.add_argument('--manifest',
                            help="Scene-pair manifest to train on.")
        parser.add_argument('--pair',
                            help="Scene-pair file to align.")
        parser.add_argument('--checkpoint',
                            help="Checkpoint holding the model parameters. "
                                 "Untrained parameters are used without it.")
        parser.add_argument('--resume',
                            help="Checkpoint to resume training from.")
        parser.add_argument('--out',
                            help="Output directory for train, output file "
                                 "for align.")
        parser.add_argument('--soft-matrix', action='store_true',
                            help="Include the dense soft matrix in the "
                                 "alignment file.")

        args = parser.parse_args(args=self._args_list)
        if args.action == 'help':
            parser.print_help()
            sys.exit(0)

        if not args.out:
            raise ConfigError(
                "Must specify --out for action {}".format(args.action))
        if args.action == 'train':
            if not args.manifest:
                raise ConfigError("Must specify --manifest for action train")
            if args.pair or args.checkpoint:
                raise ConfigError(
                    "--pair and --checkpoint are align options; use --resume "
                    "to continue training from a checkpoint.")
        elif args.action == 'align':
            if not args.pair:
                raise ConfigError("Must specify --pair for action align")
            if args.resume or args.manifest:
                raise ConfigError(
                    "--resume and --manifest can only be used with train")

        return args
