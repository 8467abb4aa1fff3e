import os
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest
import yaml

from sgtools.cli.cli import main
from sgtools.cli.config import RunConfig
from sgtools.cli.file import read_csv_file, read_schema_file, \
    write_schema_file
from sgtools.errors import ConfigError, EmptyInput, InfeasibleConfig
from sgtools.metrics.cli import EvaluationCliHandler
from sgtools.registration.cli import RegistrationCliHandler
from sgtools.registration.data import RegistrationResult, Strategy
from sgtools.registration.pipeline import ground_truth_correspondences
from sgtools.scenegraph.cli import SceneCliHandler, check_file
from sgtools.scenegraph.file import (load_pair_manifest, pair_manifest,
                                     save_fragments, save_scene_pair)
from sgtools.scenegraph.generator import (generate_scene_fragments,
                                          generate_scene_pair)
from sgtools.training.cli import ModelCliHandler

dir_path = os.path.dirname(os.path.abspath(__file__))
tiny_scene_path = os.path.join(dir_path, 'scene_data', 'tiny_scene.json')

SMALL_RUN = {
    'generator': {'min_nodes': 3, 'max_nodes': 4, 'min_points': 10,
                  'max_points': 12},
    'encoder': {'d': 4, 'n_layers': 1, 'd_p': 16, 'knn_k': 4},
    'matcher': {'sinkhorn_iters': 20, 'train_sinkhorn_iters': 5,
                'afa_hidden': 4},
    'training': {'epochs': 1, 'batch_size': 2},
    'generate': {'n_pairs': 2, 'seed': 11}
}


@pytest.fixture
def config():
    return RunConfig.from_dict(SMALL_RUN)


@pytest.fixture
def config_file(tmp_path):
    path = os.path.join(str(tmp_path), 'run.yaml')
    with open(path, 'w') as out_file:
        yaml.safe_dump(SMALL_RUN, out_file)
    return path


@pytest.fixture
def manifest(tmp_path, config):
    out = os.path.join(str(tmp_path), 'pairs')
    SceneCliHandler(['generate', '--out', out], config).execute()
    return os.path.join(out, 'manifest.json')


def read_bytes(path):
    with open(path, 'rb') as in_file:
        return in_file.read()


def test_help_exits_cleanly():
    with pytest.raises(SystemExit) as e:
        main(['help'])
    assert e.value.code == 0
    with pytest.raises(SystemExit) as e:
        SceneCliHandler(['help'])
    assert e.value.code == 0


def test_unknown_feature():
    with pytest.raises(SystemExit) as e:
        main(['perspective'])
    assert e.value.code == 2


def test_bad_thread_count_exits_with_config_code():
    with patch.dict(os.environ, {'SG_ALIGN_THREADS': '0'}):
        with pytest.raises(SystemExit) as e:
            main(['scene', 'check', '--input', tiny_scene_path])
    assert e.value.code == 2


def test_missing_manifest_exits_with_data_code(tmp_path, config_file):
    with pytest.raises(SystemExit) as e:
        main(['model', 'train', '--config', config_file,
              '--manifest', os.path.join(str(tmp_path), 'missing.json'),
              '--out', str(tmp_path)])
    assert e.value.code == 3


def test_unknown_config_section_exits_with_config_code(tmp_path):
    path = os.path.join(str(tmp_path), 'run.yaml')
    with open(path, 'w') as out_file:
        yaml.safe_dump({'perspective': {}}, out_file)
    with pytest.raises(SystemExit) as e:
        main(['scene', 'check', '--config', path, '--input', tiny_scene_path])
    assert e.value.code == 2


def test_check_through_main(capsys, config_file):
    main(['scene', 'check', '--config', config_file, '--input',
          tiny_scene_path])
    assert capsys.readouterr().out.strip() == \
        "{}: scene with 2 nodes, 3 points".format(tiny_scene_path)


@pytest.mark.parametrize("handler_class, args", [
    (ModelCliHandler, ['train', '--out', 'out']),
    (ModelCliHandler, ['train', '--manifest', 'm.json']),
    (ModelCliHandler, ['train', '--manifest', 'm.json', '--out', 'out',
                       '--checkpoint', 'model.ckpt']),
    (ModelCliHandler, ['align', '--out', 'a.json']),
    (ModelCliHandler, ['align', '--pair', 'p.json', '--out', 'a.json',
                       '--resume', 'model.ckpt']),
    (RegistrationCliHandler, ['register', '--out', 'r.json']),
    (RegistrationCliHandler, ['register', '--pair', 'p.json', '--out',
                              'r.json', '--fragments', 'f.json']),
    (RegistrationCliHandler, ['mosaic', '--out', 'm.json']),
    (RegistrationCliHandler, ['mosaic', '--fragments', 'f.json', '--out',
                              'm.json', '--gt-alignment']),
    (SceneCliHandler, ['generate']),
    (SceneCliHandler, ['check']),
    (SceneCliHandler, ['generate', '--out', 'out', '--count', '-1']),
    (EvaluationCliHandler, ['evaluate', '--out', 'out']),
])
def test_invalid_flags(handler_class, args):
    with pytest.raises(ConfigError):
        handler_class(args)


def test_generate_is_deterministic(tmp_path, config):
    first = os.path.join(str(tmp_path), 'first')
    second = os.path.join(str(tmp_path), 'second')
    handler = SceneCliHandler(['generate', '--out', first], config)
    handler.execute()
    SceneCliHandler(['generate', '--out', second], config).execute()
    assert handler._results == "Wrote 2 scene pairs and {}".format(
        os.path.join(first, 'manifest.json'))
    names = sorted(os.listdir(first))
    assert names == ['manifest.json', 'pair_0000.json', 'pair_0001.json']
    assert names == sorted(os.listdir(second))
    for name in names:
        assert read_bytes(os.path.join(first, name)) == \
            read_bytes(os.path.join(second, name))


def test_generate_applies_the_overlap_filter(tmp_path, config):
    config = replace(config, generate=config.generate.replace(
        min_overlap_filter=0.5, n_pairs=3))
    out = str(tmp_path)
    SceneCliHandler(['generate', '--out', out], config).execute()
    document = read_schema_file(os.path.join(out, 'manifest.json'))
    assert len(document['pairs']) == 3
    assert all(entry['overlap_fraction'] >= 0.5
               for entry in document['pairs'])
    for _, pair in load_pair_manifest(os.path.join(out, 'manifest.json')):
        assert pair.overlap_fraction >= 0.5


def test_generate_with_an_unreachable_filter(tmp_path, config):
    config = replace(
        config,
        generator=config.generator.replace(min_overlap=0.1, max_overlap=0.3),
        generate=config.generate.replace(min_overlap_filter=0.9,
                                         max_draws_per_pair=3))
    with pytest.raises(InfeasibleConfig):
        SceneCliHandler(['generate', '--out', str(tmp_path)],
                        config).execute()


def test_count_overrides_the_config(tmp_path, config):
    handler = SceneCliHandler(['generate', '--out', str(tmp_path),
                               '--count', '1'], config)
    handler.execute()
    assert len(load_pair_manifest(
        os.path.join(str(tmp_path), 'manifest.json'))) == 1


def test_evaluate_without_pairs_writes_nothing(tmp_path, config):
    manifest_path = os.path.join(str(tmp_path), 'manifest.json')
    write_schema_file(manifest_path, pair_manifest([], 0))
    out = os.path.join(str(tmp_path), 'out')
    handler = EvaluationCliHandler(['evaluate', '--manifest', manifest_path,
                                    '--out', out], config)
    with pytest.raises(EmptyInput):
        handler.execute()
    assert not os.path.exists(out)


def test_evaluate_writes_rows_and_summary(tmp_path, config, manifest):
    out = os.path.join(str(tmp_path), 'out')
    handler = EvaluationCliHandler(['evaluate', '--manifest', manifest,
                                    '--out', out], config, threads=2)
    handler.execute()
    assert handler._results.startswith("Evaluated 2 pairs")
    rows = read_csv_file(os.path.join(out, 'evaluation.csv'))
    assert [row['name'] for row in rows] == ['pair_0000.json',
                                             'pair_0001.json']
    summary = read_schema_file(os.path.join(out, 'summary.json'))
    assert summary['buckets']['overall']['count'] == 2
    assert check_file(os.path.join(out, 'summary.json')).endswith(
        "evaluation summary of 2 pairs")


def test_train_resume_and_align(tmp_path, config, manifest):
    out = os.path.join(str(tmp_path), 'model')
    handler = ModelCliHandler(['train', '--manifest', manifest, '--out', out],
                              config)
    handler.execute()
    checkpoint = os.path.join(out, 'model.ckpt')
    curve = read_csv_file(os.path.join(out, 'loss_curve.csv'))
    assert [row['epoch'] for row in curve] == ['0']
    assert list(curve[0]) == ['epoch', 'L_s', 'L_k', 'L']

    longer = replace(config, training=config.training.replace(epochs=2))
    resumed = os.path.join(str(tmp_path), 'resumed')
    ModelCliHandler(['train', '--manifest', manifest, '--resume', checkpoint,
                     '--out', resumed], longer).execute()
    curve = read_csv_file(os.path.join(resumed, 'loss_curve.csv'))
    assert [row['epoch'] for row in curve] == ['0', '1']
    resumed_checkpoint = os.path.join(resumed, 'model.ckpt')
    assert check_file(resumed_checkpoint) == \
        "{}: checkpoint after 2 epoch(s)".format(resumed_checkpoint)

    pair_path = os.path.join(os.path.dirname(manifest), 'pair_0000.json')
    alignment_path = os.path.join(str(tmp_path), 'alignment.json')
    handler = ModelCliHandler(['align', '--pair', pair_path, '--checkpoint',
                               resumed_checkpoint, '--out', alignment_path,
                               '--soft-matrix'], config)
    handler.execute()
    document = read_schema_file(alignment_path)
    assert set(document['metrics']) == {'hits@1', 'hits@3', 'hits@5', 'mrr',
                                        'f1'}
    assert 'alignment with' in check_file(alignment_path)


def registration_fixture(tmp_path, config):
    pair = generate_scene_pair(config.generator, 1)
    path = os.path.join(str(tmp_path), 'pair.json')
    save_scene_pair(path, pair)
    correspondences = ground_truth_correspondences(pair)
    result = RegistrationResult(pair.gt_transform, correspondences,
                                Strategy.O2O,
                                np.ones(len(correspondences), dtype=bool))
    return pair, path, result


@patch('sgtools.registration.cli.register_clouds')
def test_register_with_the_ground_truth_alignment(mock_register, tmp_path,
                                                  config):
    pair, pair_path, result = registration_fixture(tmp_path, config)
    mock_register.return_value = result
    out = os.path.join(str(tmp_path), 'report.json')
    handler = RegistrationCliHandler(['register', '--pair', pair_path,
                                      '--gt-alignment', '--out', out], config)
    handler.execute()

    alignment = mock_register.call_args[0][2]
    assert np.array_equal(alignment.hard_matrix(), pair.gt_alignment)
    assert mock_register.call_args[1]['config'] == config.registration
    report = read_schema_file(out)
    assert report['strategy'] == 'o2o'
    assert report['n_correspondences'] == len(result.correspondences)
    assert report['metrics']['registered'] is True
    assert report['metrics']['rre'] == pytest.approx(0.0, abs=1e-5)
    assert handler._results.startswith("Registered with o2o")


@patch('sgtools.registration.cli.load_model')
@patch('sgtools.registration.cli.register_clouds')
def test_register_all_to_all_needs_no_model(mock_register, mock_load_model,
                                            tmp_path, config):
    _, pair_path, result = registration_fixture(tmp_path, config)
    mock_register.return_value = result
    config = config.with_overrides(strategy='a2a', estimator='ransac')
    RegistrationCliHandler(['register', '--pair', pair_path, '--out',
                            os.path.join(str(tmp_path), 'report.json')],
                           config).execute()
    assert mock_register.call_args[0][2] is None
    assert mock_register.call_args[1]['config'].estimator == 'ransac'
    assert not mock_load_model.called


@patch('sgtools.registration.cli.mosaic')
def test_mosaic_reports_pose_errors(mock_mosaic, tmp_path, config,
                                    generator_config):
    fragments = generate_scene_fragments(generator_config, 1, n_fragments=3)
    manifest_path = save_fragments(os.path.join(str(tmp_path), 'fragments'),
                                   fragments, seed=1)
    mock_mosaic.return_value = list(fragments.gt_transforms)
    out = os.path.join(str(tmp_path), 'mosaic.json')
    handler = RegistrationCliHandler(['mosaic', '--fragments', manifest_path,
                                      '--out', out], config, threads=2)
    handler.execute()

    assert mock_mosaic.call_args[0][3] == config.registration
    document = read_schema_file(out)
    assert len(document['transforms']) == 3
    for errors in document['pose_errors']:
        assert errors['rre'] == pytest.approx(0.0, abs=1e-5)
        assert errors['rte'] == pytest.approx(0.0, abs=1e-9)
    assert document['metrics']['comp'] == pytest.approx(0.0, abs=1e-9)
    assert handler._results == "Mosaicked 3 scenes; wrote {}".format(out)
