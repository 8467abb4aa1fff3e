#!/usr/bin/env python3
import argparse
import logging
import os
import sys

from sgtools.cli.handler import CliHandler
from sgtools.errors import ConfigError, EmptyInput
from sgtools.metrics.evaluate import evaluate_pairs
from sgtools.metrics.report import write_evaluation
from sgtools.scenegraph.file import load_pair_manifest
from sgtools.training.cli import load_model

logger = logging.getLogger(__name__)

EVALUATION_FILE = 'evaluation.csv'
SUMMARY_FILE = 'summary.json'


class EvaluationCliHandler(CliHandler):

    def _evaluate(self):
        named_pairs = load_pair_manifest(self._args.manifest)
        if not named_pairs:
            raise EmptyInput("{} lists no scene pairs".format(
                self._args.manifest))
        encoder, matcher = load_model(self._config, self._args.checkpoint)
        rows = evaluate_pairs(named_pairs, encoder, matcher,
                              self._config.registration, self._config.metrics,
                              self._config.evaluation, self._threads)
        csv_path = os.path.join(self._args.out, EVALUATION_FILE)
        summary_path = os.path.join(self._args.out, SUMMARY_FILE)
        summary = write_evaluation(csv_path, summary_path, rows)
        overall = summary['buckets']['overall']
        return "Evaluated {} pairs (F1 {}, RR {}); wrote {} and {}".format(
            overall['count'], _fmt(overall['f1']), _fmt(overall['rr']),
            csv_path, summary_path)

    def _parse_args(self):
        parser = argparse.ArgumentParser(
            description="Evaluate alignment, overlap checking and "
                        "registration over a set of scene pairs",
            prog="sgtools evaluation",
            add_help=False
        )

        parser.add_argument('action',
                            choices=[
                                'evaluate',
                                'help'
                            ],
                            help='Evaluation action to take.')
        parser.add_argument('--manifest',
                            help="Scene-pair manifest to evaluate.")
        parser.add_argument('--checkpoint',
                            help="Checkpoint holding the model parameters.")
        parser.add_argument('--out',
                            help="Output directory for the per-pair CSV and "
                                 "the summary JSON.")

        args = parser.parse_args(args=self._args_list)
        if args.action == 'help':
            parser.print_help()
            sys.exit(0)

        if not args.manifest or not args.out:
            raise ConfigError(
                "Must specify --manifest and --out for action evaluate")

        return args


def _fmt(value):
    return 'n/a' if value is None else '{:.4f}'.format(value)
