import hypothesis
import numpy as np
import pytest

from sgtools.encoder.data import EncoderConfig
from sgtools.geometry.data import PointCloud
from sgtools.matcher.data import MatcherConfig
from sgtools.scenegraph.data import GeneratorConfig, SceneGraph
from sgtools.scenegraph.generator import generate_scene_pair
from sgtools.training.trainer import initialize_params

hypothesis.settings.register_profile("sgtools", max_examples=25,
                                     deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("sgtools")


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help="run desk-scale reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def generator_config():
    return GeneratorConfig(min_nodes=4, max_nodes=6, min_points=20,
                           max_points=30)


@pytest.fixture
def encoder_config():
    return EncoderConfig(d=4, n_layers=1, d_p=16, knn_k=4)


@pytest.fixture
def matcher_config():
    return MatcherConfig(sinkhorn_iters=20, max_iter_factor=50,
                         train_sinkhorn_iters=5, afa_hidden=4)


@pytest.fixture
def pair(generator_config):
    return generate_scene_pair(generator_config, seed=3)


@pytest.fixture
def model(encoder_config, matcher_config):
    return initialize_params(encoder_config, matcher_config, 0)


@pytest.fixture
def permute_scene():
    """Relabels the nodes of a scene: new node k is old node perm[k]."""
    def permute(graph, cloud, perm):
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        edges = inverse[graph.edges] if len(graph.edges) else graph.edges
        permuted = SceneGraph(graph.node_ids[perm], graph.classes[perm],
                              graph.attributes[perm], graph.centroids[perm],
                              edges, graph.relations, graph.n_classes,
                              graph.n_relations)
        return permuted, PointCloud(cloud.points, inverse[cloud.object_ids],
                                    cloud.descriptors)
    return permute
