#!/usr/bin/env python3
import argparse
import logging
import sys

from sgtools.cli.file import write_schema_file
from sgtools.cli.handler import CliHandler
from sgtools.errors import ConfigError
from sgtools.matcher.align import align
from sgtools.matcher.data import SoftAlignment
from sgtools.metrics.evaluate import score_registration
from sgtools.metrics.reconstruction import mosaic_metrics
from sgtools.metrics.registration import rotation_error, translation_error
from sgtools.metrics.report import registration_report
from sgtools.registration.data import Strategy
from sgtools.registration.mosaic import merge_scenes, mosaic
from sgtools.registration.pipeline import register_clouds
from sgtools.scenegraph.file import load_fragments, load_scene_pair
from sgtools.training.cli import load_model

logger = logging.getLogger(__name__)


class RegistrationCliHandler(CliHandler):

    def _register(self):
        pair = load_scene_pair(self._args.pair)
        registration = self._config.registration
        alignment = None
        if self._args.gt_alignment:
            alignment = SoftAlignment.from_ground_truth(pair.gt_alignment)
        elif registration.strategy_enum != Strategy.A2A:
            encoder, matcher = load_model(self._config, self._args.checkpoint)
            alignment = align(pair, encoder, matcher)
        result = register_clouds(pair.src_cloud, pair.ref_cloud, alignment,
                                 config=registration)
        metrics = score_registration(pair, result, self._config.metrics,
                                     self._config.evaluation.gt_radius)
        write_schema_file(self._args.out,
                          registration_report(result, metrics))
        return "Registered with {} ({} correspondences); wrote {}".format(
            result.strategy.value, len(result.correspondences),
            self._args.out)

    def _mosaic(self):
        scenes, gt_transforms, full_cloud = load_fragments(
            self._args.fragments)
        encoder = matcher = None
        if self._args.checkpoint:
            encoder, matcher = load_model(self._config, self._args.checkpoint)
        transforms = mosaic(scenes, encoder, matcher,
                            self._config.registration, self._threads)
        document = {
            'transforms': [transform.to_list() for transform in transforms],
            'pose_errors': [
                {'rre': rotation_error(estimated, gt),
                 'rte': translation_error(estimated, gt)}
                for estimated, gt in zip(transforms, gt_transforms)]
        }
        if full_cloud is not None:
            document['metrics'] = mosaic_metrics(
                merge_scenes(scenes, transforms), full_cloud,
                self._config.metrics)
        write_schema_file(self._args.out, document)
        return "Mosaicked {} scenes; wrote {}".format(len(scenes),
                                                      self._args.out)

    def _parse_args(self):
        parser = argparse.ArgumentParser(
            description="Register scene pairs and mosaic scene fragments",
            prog="sgtools registration",
            add_help=False
        )

        parser.add_argument('action',
                            choices=[
                                'help',
                                'mosaic',
                                'register'
                            ],
                            help='Registration action to take.')
        parser.add_argument('--pair',
                            help="Scene-pair file to register.")
        parser.add_argument('--fragments',
                            help="Fragments manifest to mosaic.")
        parser.add_argument('--checkpoint',
                            help="Checkpoint holding the model parameters.")
        parser.add_argument('--gt-alignment', action='store_true',
                            help="Register with the ground-truth node "
                                 "alignment instead of a predicted one.")
        parser.add_argument('--out',
                            help="Output report file.")

        args = parser.parse_args(args=self._args_list)
        if args.action == 'help':
            parser.print_help()
            sys.exit(0)

        if not args.out:
            raise ConfigError(
                "Must specify --out for action {}".format(args.action))
        if args.action == 'register':
            if not args.pair:
                raise ConfigError("Must specify --pair for action register")
            if args.fragments:
                raise ConfigError("--fragments can only be used with mosaic")
        elif args.action == 'mosaic':
            if not args.fragments:
                raise ConfigError("Must specify --fragments for action mosaic")
            if args.pair or args.gt_alignment:
                raise ConfigError(
                    "--pair and --gt-alignment can only be used with register")

        return args
