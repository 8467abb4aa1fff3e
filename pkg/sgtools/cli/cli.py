#!/usr/bin/env python3
import argparse
import logging
import os
import sys

from sgtools.cli.config import RunConfig
from sgtools.errors import ConfigError, SgToolsError
from sgtools.metrics.cli import EvaluationCliHandler
from sgtools.metrics.data import OVERLAP_VARIANTS
from sgtools.registration.cli import RegistrationCliHandler
from sgtools.registration.data import Estimator, Strategy
from sgtools.scenegraph.cli import SceneCliHandler
from sgtools.training.cli import ModelCliHandler

logger = logging.getLogger('sgtools')


def parse_args(arguments):
    parser = argparse.ArgumentParser(
        description="CLI for partial 3D scene graph matching: synthetic "
                    "data, training, alignment, registration, mosaicking "
                    "and evaluation.",
        prog='sgtools',
        add_help=False
    )

    parser.add_argument('feature',
                        choices=[
                            'evaluation',
                            'help',
                            'model',
                            'registration',
                            'scene'
                        ],
                        help='sgtools feature that you wish to use.')
    parser.add_argument('--config',
                        help="YAML spec or JSON schema file with one section "
                             "per module.")
    parser.add_argument('--seed', type=int,
                        help="Seed of every random generator of the command.")
    parser.add_argument('--gamma', type=float,
                        help="Superpoint rescoring weight (default 0.2).")
    parser.add_argument('--strategy',
                        choices=[strategy.value for strategy in Strategy],
                        help="Registration strategy.")
    parser.add_argument('--estimator',
                        choices=[estimator.value for estimator in Estimator],
                        help="Pose estimator: weighted SVD (default), "
                             "local-to-global refinement or RANSAC.")
    parser.add_argument('--no-ransac', action='store_const', dest='estimator',
                        const=Estimator.SVD.value,
                        help="Same as --estimator svd.")
    parser.add_argument('--overlap-variant', choices=OVERLAP_VARIANTS,
                        help="Scene-level overlap score variant.")
    parser.add_argument('--log-level',
                        default='info',
                        help="Log level sent to the console.")
    feature_args, action_args = parser.parse_known_args(args=arguments)

    if feature_args.feature == 'help':
        parser.print_help()
        sys.exit(0)
    return feature_args, action_args


def feature_to_handler(feature_name):
    name_to_handler = {
        'evaluation': EvaluationCliHandler,
        'model': ModelCliHandler,
        'registration': RegistrationCliHandler,
        'scene': SceneCliHandler
    }
    return name_to_handler[feature_name]


def thread_count():
    """Worker cap from SG_ALIGN_THREADS; None lets the pool decide."""
    value = os.environ.get('SG_ALIGN_THREADS')
    if not value:
        return None
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads < 1:
        raise ConfigError(
            "SG_ALIGN_THREADS must be a positive integer, got '{}'".format(
                value))
    return threads


def main(arguments=sys.argv[1:]):
    feature_args, action_args = parse_args(arguments)

    logging_levels = {
        'debug':    logging.DEBUG,
        'info':     logging.INFO,
        'warn':     logging.WARN,
        'error':    logging.ERROR
    }
    log_level = logging_levels[feature_args.log_level.lower()]

    logger.setLevel(log_level)
    console_handler = logging.StreamHandler()
    logger.addHandler(console_handler)

    try:
        config = RunConfig.load(feature_args.config).with_overrides(
            seed=feature_args.seed,
            gamma=feature_args.gamma,
            strategy=feature_args.strategy,
            estimator=feature_args.estimator,
            overlap_variant=feature_args.overlap_variant
        )
        cli_handler_class = feature_to_handler(feature_args.feature)
        cli_handler = cli_handler_class(
            action_args,
            config,
            threads=thread_count(),
            log_level=log_level
        )
        cli_handler.execute()
    except SgToolsError as e:
        logger.error(str(e))
        sys.exit(e.exit_code)
    finally:
        logger.removeHandler(console_handler)


if __name__ == "__main__":
    main()
