#!/usr/bin/env python3
import argparse
import logging
import os
import sys

import numpy as np

from sgtools.cli.file import read_schema_file, write_schema_file
from sgtools.cli.handler import CliHandler
from sgtools.errors import ConfigError, InfeasibleConfig, ParseError
from sgtools.geometry.data import RigidTransform
from sgtools.matcher.align import alignment_from_schema
from sgtools.scenegraph.data import overlap_bucket
from sgtools.scenegraph.file import (load_fragments, load_pair_manifest,
                                     pair_from_schema, pair_manifest,
                                     save_fragments, save_scene_pair,
                                     scene_from_schema)
from sgtools.scenegraph.generator import (generate_scene_fragments,
                                          generate_scene_pair)
from sgtools.training.checkpoint import load_checkpoint

logger = logging.getLogger(__name__)

PAIR_MANIFEST = 'manifest.json'
SEED_RANGE = 2 ** 31


def check_file(file_path):
    """Reads an sgtools output file back; returns a one-line description."""
    if str(file_path).endswith('.ckpt'):
        checkpoint = load_checkpoint(file_path)
        epoch = checkpoint.state.epoch if checkpoint.state else 0
        return "{}: checkpoint after {} epoch(s)".format(file_path, epoch)
    document = read_schema_file(file_path)
    if not isinstance(document, dict):
        raise ParseError("{}: top level must be an object".format(file_path))
    if 'src' in document and 'ref' in document:
        pair = pair_from_schema(document, where=str(file_path))
        return "{}: scene pair {}x{} nodes".format(
            file_path, len(pair.src_graph), len(pair.ref_graph))
    if 'fragments' in document:
        scenes, _, _ = load_fragments(file_path)
        return "{}: {} fragments".format(file_path, len(scenes))
    if 'k_tilde' in document:
        alignment = alignment_from_schema(document, where=str(file_path))
        return "{}: alignment with {} pairs".format(file_path, alignment.k)
    if 'pairs' in document:
        pairs = load_pair_manifest(file_path)
        return "{}: manifest of {} pairs".format(file_path, len(pairs))
    if 'transform' in document and 'strategy' in document:
        RigidTransform.from_list(document['transform'])
        return "{}: registration report ({})".format(file_path,
                                                      document['strategy'])
    if 'buckets' in document:
        return "{}: evaluation summary of {} pairs".format(
            file_path, document['buckets']['overall']['count'])
    if 'nodes' in document:
        graph, cloud = scene_from_schema(document, where=str(file_path))
        return "{}: scene with {} nodes, {} points".format(
            file_path, len(graph), len(cloud))
    raise ParseError("{}: not an sgtools document".format(file_path))


class SceneCliHandler(CliHandler):

    def _generate(self):
        generate = self._config.generate
        if self._args.count is not None:
            generate = generate.replace(n_pairs=self._args.count)
        rng = np.random.default_rng(generate.seed)
        entries, dropped = [], 0
        draws = generate.n_pairs * generate.max_draws_per_pair
        while len(entries) < generate.n_pairs and draws > 0:
            draws -= 1
            seed = int(rng.integers(SEED_RANGE))
            pair = generate_scene_pair(self._config.generator, seed)
            if not generate.keeps(pair.overlap_fraction):
                dropped += 1
                continue
            name = 'pair_{:04d}.json'.format(len(entries))
            save_scene_pair(os.path.join(self._args.out, name), pair)
            entries.append({'file': name, 'seed': seed,
                            'overlap_fraction': pair.overlap_fraction,
                            'bucket': overlap_bucket(pair.overlap_fraction)})
        if dropped:
            logger.warning("overlap filter [{}, {}] dropped {} pair(s)".format(
                generate.min_overlap_filter, generate.max_overlap_filter,
                dropped))
        if len(entries) < generate.n_pairs:
            raise InfeasibleConfig(
                "only {} of {} pairs passed the overlap filter".format(
                    len(entries), generate.n_pairs))
        manifest_path = os.path.join(self._args.out, PAIR_MANIFEST)
        write_schema_file(manifest_path, pair_manifest(entries,
                                                       generate.seed))
        return "Wrote {} scene pairs and {}".format(len(entries),
                                                     manifest_path)

    def _fragments(self):
        generate = self._config.generate
        fragments = generate_scene_fragments(self._config.generator,
                                             generate.seed,
                                             generate.n_fragments)
        manifest_path = save_fragments(self._args.out, fragments,
                                       generate.seed)
        return "Wrote {} fragments and {}".format(
            len(fragments.fragments), manifest_path)

    def _check(self):
        return "\n".join(check_file(path) for path in self._args.input)

    def _parse_args(self):
        parser = argparse.ArgumentParser(
            description="Generate and check synthetic scene data",
            prog="sgtools scene",
            add_help=False
        )

        parser.add_argument('action',
                            choices=[
                                'check',
                                'fragments',
                                'generate',
                                'help'
                            ],
                            help='Scene action to take.')
        parser.add_argument('--out',
                            help="Output directory for generated files.")
        parser.add_argument('--count', type=int,
                            help="Number of scene pairs to generate. "
                                 "Overrides generate.n_pairs.")
        parser.add_argument('--input', nargs='+',
                            help="Files to read back and validate.")

        args = parser.parse_args(args=self._args_list)
        if args.action == 'help':
            parser.print_help()
            sys.exit(0)

        if args.action in ['generate', 'fragments'] and not args.out:
            raise ConfigError(
                "Must specify --out for action {}".format(args.action))
        if args.action == 'check' and not args.input:
            raise ConfigError("Must specify --input for action check")
        if args.count is not None and args.count < 0:
            raise ConfigError("--count must be >= 0")

        return args
