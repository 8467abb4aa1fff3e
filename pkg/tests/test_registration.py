from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgtools.encoder.descriptors import point_descriptors
from sgtools.errors import (ConfigError, DegenerateConfiguration,
                            DimensionMismatch, DisconnectedScenes,
                            NoCorrespondences, ObjectOutOfRange)
from sgtools.geometry.data import PointCloud, RigidTransform
from sgtools.geometry.estimate import weighted_svd_alignment
from sgtools.matcher.data import SoftAlignment
from sgtools.metrics.reconstruction import mosaic_metrics
from sgtools.metrics.registration import (rotation_error, scc,
                                          translation_error)
from sgtools.registration.data import (CorrespondenceSet, Estimator,
                                       RegistrationConfig, RegistrationResult,
                                       Strategy, SuperpointSet)
from sgtools.registration.matching import (candidate_pairs,
                                           extract_correspondences,
                                           match_points, rescore,
                                           superpoint_matching_matrix)
from sgtools.registration.mosaic import (merge_scenes, mosaic, pose_graph,
                                         spanning_tree)
from sgtools.registration.pipeline import (estimate_pose,
                                           ground_truth_correspondences,
                                           opo_pairs, register,
                                           register_clouds)
from sgtools.registration.superpoints import build_superpoints
from sgtools.scenegraph.data import GeneratorConfig, ScenePair
from sgtools.scenegraph.generator import (generate_scene_fragments,
                                          generate_scene_pair)

# whole voxels, so both clouds cluster into the same superpoints
SHIFT = RigidTransform(np.eye(3), [1.0, -0.5, 1.5])


@pytest.fixture
def config():
    return RegistrationConfig(voxel=0.5)


def textured_cloud(n=400, seed=0):
    """Points over three slabs along x, each with its own random descriptor."""
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 2.0, size=(n, 3))
    object_ids = np.minimum((points[:, 0] * 1.5).astype(int), 2)
    return PointCloud(points, object_ids, rng.normal(size=(n, 8)))


def moved(cloud, transform):
    return PointCloud(transform.apply(cloud.points), cloud.object_ids,
                      cloud.descriptors)


def superpoint_set(descriptors, object_ids):
    descriptors = np.asarray(descriptors, dtype=np.float64)
    n = len(descriptors)
    return SuperpointSet(np.zeros((n, 3)), [np.array([k]) for k in range(n)],
                         descriptors, np.asarray(object_ids), np.zeros((n, 3)),
                         np.zeros((n, 2)))


def test_superpoints_partition_the_cloud():
    rng = np.random.default_rng(1)
    cloud = PointCloud(rng.uniform(0.0, 1.0, size=(200, 3)),
                       rng.integers(0, 3, size=200))
    superpoints = build_superpoints(cloud, 0.25,
                                    point_descriptors=np.zeros((200, 4)))
    members = np.concatenate(superpoints.members)
    assert np.array_equal(np.sort(members), np.arange(200))
    assert superpoints.descriptors.shape == (len(superpoints), 7)
    for center, member in zip(superpoints.centers, superpoints.members):
        keys = np.floor(cloud.points[member] / 0.25)
        assert (keys == keys[0]).all()
        assert np.allclose(center, cloud.points[member].mean(axis=0))


def test_superpoint_takes_the_majority_object():
    cloud = PointCloud([[0.1, 0.1, 0.1], [0.2, 0.1, 0.1], [0.1, 0.2, 0.1]],
                       [1, 1, 2])
    superpoints = build_superpoints(cloud, 1.0,
                                    point_descriptors=np.zeros((3, 4)))
    assert superpoints.object_ids.tolist() == [1]


def test_superpoints_of_an_empty_cloud():
    superpoints = build_superpoints(PointCloud(np.zeros((0, 3)), []), 0.5,
                                    point_descriptors=np.zeros((0, 4)))
    assert len(superpoints) == 0
    assert superpoints.descriptors.shape == (0, 7)


def test_superpoints_need_a_positive_voxel():
    with pytest.raises(ConfigError):
        build_superpoints(PointCloud(np.zeros((1, 3)), [0]), 0.0,
                          point_descriptors=np.zeros((1, 4)))


def test_matching_matrix_of_orthogonal_descriptors():
    c = superpoint_matching_matrix(superpoint_set([[1.0, 0.0, 0.0]], [0]),
                                   superpoint_set([[0.0, 1.0, 0.0]], [0]))
    assert np.allclose(c, [[0.5]])


def test_matching_matrix_of_identical_descriptors():
    descriptors = np.random.default_rng(2).normal(size=(5, 6))
    c = superpoint_matching_matrix(superpoint_set(descriptors, [0] * 5),
                                   superpoint_set(descriptors, [0] * 5))
    assert np.allclose(np.diag(c), 1.0)
    assert np.array_equal(np.argmax(c, axis=1), np.arange(5))
    assert c.min() >= 0.0 and c.max() <= 1.0 + 1e-12


def test_matching_matrix_needs_equal_widths():
    with pytest.raises(DimensionMismatch):
        superpoint_matching_matrix(superpoint_set(np.ones((2, 3)), [0, 0]),
                                   superpoint_set(np.ones((2, 4)), [0, 0]))


def test_rescoring_adds_the_node_alignment():
    alignment = SoftAlignment.from_ground_truth(np.eye(2))
    src = superpoint_set(np.ones((2, 3)), [0, 1])
    ref = superpoint_set(np.ones((3, 3)), [1, 0, 1])
    c = np.full((3, 2), 0.5)
    rescored = rescore(c, alignment, src, ref, gamma=0.2)
    assert np.allclose(rescored, [[0.5, 0.7], [0.7, 0.5], [0.5, 0.7]])


def test_rescoring_without_gamma_copies():
    alignment = SoftAlignment.from_ground_truth(np.eye(2))
    src = superpoint_set(np.ones((2, 3)), [0, 1])
    c = np.full((2, 2), 0.5)
    rescored = rescore(c, alignment, src, src, gamma=0.0)
    assert np.array_equal(rescored, c)
    assert rescored is not c


@given(gammas=st.tuples(st.integers(0, 100), st.integers(0, 100)),
       seed=st.integers(0, 50))
def test_rescoring_grows_with_gamma(gammas, seed):
    rng = np.random.default_rng(seed)
    low, high = sorted(g / 100.0 for g in gammas)
    soft = rng.uniform(0.0, 1.0, size=(4, 5))
    alignment = SoftAlignment(soft, 0.5)
    src = superpoint_set(np.ones((6, 3)), rng.integers(0, 3, size=6))
    ref = superpoint_set(np.ones((7, 3)), rng.integers(0, 4, size=7))
    c = rng.uniform(0.0, 1.0, size=(7, 6))
    assert (rescore(c, alignment, src, ref, low) <=
            rescore(c, alignment, src, ref, high)).all()


def test_rescoring_breaks_ties_between_twins():
    src = superpoint_set(np.ones((1, 3)), [0])
    ref = superpoint_set(np.ones((2, 3)), [0, 1])
    c = np.full((2, 1), 0.9)
    assert candidate_pairs(c, 1)[0][:2] == (0, 0)
    alignment = SoftAlignment.from_ground_truth([[0, 1]])
    assert candidate_pairs(rescore(c, alignment, src, ref), 1)[0][:2] == (1, 0)


def test_rescoring_rejects_objects_outside_the_alignment():
    alignment = SoftAlignment.from_ground_truth(np.eye(1))
    inside = superpoint_set(np.ones((1, 3)), [0])
    outside = superpoint_set(np.ones((1, 3)), [5])
    with pytest.raises(ObjectOutOfRange):
        rescore(np.ones((1, 1)), alignment, outside, inside)
    with pytest.raises(ValueError):
        rescore(np.ones((1, 1)), alignment, inside, inside, gamma=-0.1)


def test_rescoring_names_the_offending_object():
    alignment = SoftAlignment.from_ground_truth(np.eye(3))
    src = superpoint_set(np.ones((3, 3)), [2, -1, 1])
    ref = superpoint_set(np.ones((1, 3)), [0])
    with pytest.raises(ObjectOutOfRange) as e:
        rescore(np.ones((1, 3)), alignment, src, ref)
    assert str(e.value) == \
        "source superpoint object id -1 outside the alignment's 3 nodes"


def test_candidate_pairs():
    c = np.array([[0.9, 0.1], [0.2, 0.8]])
    assert candidate_pairs(c, 5) == [(0, 0, 0.9), (1, 1, 0.8)]
    assert candidate_pairs(c, 3, mutual=False) == \
        [(0, 0, 0.9), (1, 1, 0.8), (1, 0, 0.2)]
    assert candidate_pairs(c, 1) == [(0, 0, 0.9)]
    assert candidate_pairs(np.zeros((0, 3)), 5) == []


def test_point_matches_of_identical_descriptors():
    descriptors = np.random.default_rng(3).normal(size=(6, 4))
    src_pos, ref_pos = match_points(descriptors, descriptors, ratio=0.8)
    assert src_pos.tolist() == list(range(6))
    assert ref_pos.tolist() == list(range(6))


def test_point_matches_fail_the_ratio_test_between_twins():
    src_pos, _ = match_points(np.array([[0.0, 0.0]]),
                              np.array([[1.0, 0.0], [0.0, 1.0]]), ratio=0.8)
    assert len(src_pos) == 0


def test_one_superpoint_pair_gives_one_group(config):
    cloud = textured_cloud()
    superpoints = build_superpoints(cloud, config.voxel)
    c = superpoint_matching_matrix(superpoints, superpoints)
    correspondences = extract_correspondences(c, superpoints, superpoints,
                                              top_m=1)
    assert len(correspondences) > 0
    assert set(correspondences.groups.tolist()) == {0}
    assert np.array_equal(correspondences.src_indices,
                          correspondences.ref_indices)
    with pytest.raises(ValueError):
        extract_correspondences(c, superpoints, superpoints, top_m=0)


def test_all_to_all_on_identical_clouds(config):
    cloud = textured_cloud()
    result = register_clouds(cloud, cloud, strategy='a2a', config=config)
    assert result.strategy == Strategy.A2A
    assert np.allclose(result.transform.as_matrix(), np.eye(4), atol=1e-9)
    assert result.inliers.all()


@pytest.mark.parametrize("estimator", ['svd', 'lgr', 'ransac'])
def test_all_to_all_recovers_a_shift(config, estimator):
    ref = textured_cloud()
    src = moved(ref, SHIFT)
    result = register_clouds(src, ref, strategy='a2a', config=config,
                             estimator=estimator)
    assert np.allclose(result.transform.as_matrix(),
                       SHIFT.inverse().as_matrix(), atol=1e-9)


def test_default_estimator_is_one_weighted_svd():
    rng = np.random.default_rng(6)
    src = rng.uniform(-1.0, 1.0, size=(30, 3))
    truth = RigidTransform(np.eye(3), [0.2, 0.1, -0.3])
    ref = truth.apply(src)
    ref[:5] += rng.normal(scale=0.5, size=(5, 3))
    correspondences = CorrespondenceSet(np.arange(30), np.arange(30),
                                        rng.uniform(0.1, 1.0, size=30),
                                        src, ref)
    config = RegistrationConfig()
    assert config.estimator == 'svd'
    transform, inliers = estimate_pose(correspondences, config)
    expected = weighted_svd_alignment(src, ref, correspondences.scores)
    assert np.allclose(transform.as_matrix(), expected.as_matrix(),
                       atol=1e-12)
    distances = np.linalg.norm(expected.apply(src) - ref, axis=1)
    assert np.array_equal(inliers, distances < config.inlier_radius)


def test_registration_pose_comes_from_its_correspondences(config):
    ref = textured_cloud()
    src = moved(ref, SHIFT)
    alignment = SoftAlignment.from_ground_truth(np.eye(3))
    result = register_clouds(src, ref, alignment, 'o2o', config)
    correspondences = result.correspondences
    expected = weighted_svd_alignment(correspondences.src_points,
                                      correspondences.ref_points,
                                      correspondences.scores)
    assert np.allclose(result.transform.as_matrix(), expected.as_matrix(),
                       atol=1e-12)


@pytest.mark.parametrize("use_ransac, estimator", [
    (False, None),
    (True, Estimator.RANSAC),
])
@patch('sgtools.registration.pipeline.register_clouds')
def test_register_passes_the_estimator(mock_register, pair, use_ransac,
                                       estimator):
    alignment = SoftAlignment.from_ground_truth(pair.gt_alignment)
    register(pair, alignment, 'o2o', use_ransac=use_ransac, seed=3)
    args = mock_register.call_args[0]
    assert args[0] is pair.src_cloud
    assert args[1] is pair.ref_cloud
    assert args[5] == estimator
    assert args[6] == 3


def test_object_to_object_over_every_object_matches_all_to_all(config):
    ref = textured_cloud()
    src = moved(ref, SHIFT)
    alignment = SoftAlignment.from_ground_truth(np.eye(3))
    everything = register_clouds(src, ref, strategy='a2a', config=config)
    objects = register_clouds(src, ref, alignment, 'o2o', config, gamma=0.0)
    assert np.array_equal(objects.transform.as_matrix(),
                          everything.transform.as_matrix())
    assert np.array_equal(objects.correspondences.src_indices,
                          everything.correspondences.src_indices)
    assert np.array_equal(objects.correspondences.ref_indices,
                          everything.correspondences.ref_indices)


def test_object_to_object_keeps_selected_objects(config):
    ref = textured_cloud()
    src = moved(ref, SHIFT)
    alignment = SoftAlignment(SoftAlignment.from_ground_truth(
        np.eye(3)).soft_matrix, 1 / 3, [(1, 1, 1.0)])
    result = register_clouds(src, ref, alignment, 'o2o', config)
    correspondences = result.correspondences
    assert set(src.object_ids[correspondences.src_indices].tolist()) == {1}
    assert set(ref.object_ids[correspondences.ref_indices].tolist()) == {1}
    assert np.allclose(result.transform.translation, [-1.0, 0.5, -1.5],
                       atol=1e-9)


def test_object_to_object_needs_a_selection(config):
    cloud = textured_cloud()
    alignment = SoftAlignment(np.full((4, 4), 0.25), 0.0)
    with pytest.raises(NoCorrespondences):
        register_clouds(cloud, cloud, alignment, 'o2o', config)


def test_alignment_strategies_need_an_alignment(config):
    cloud = textured_cloud()
    with pytest.raises(ValueError):
        register_clouds(cloud, cloud, None, 'o2o', config)


def test_object_pair_filters(config):
    alignment = SoftAlignment(np.full((4, 4), 0.25), 0.75,
                              [(0, 0, 0.9), (1, 2, 0.3), (2, 1, 0.6)])
    assert opo_pairs(alignment, Strategy.OPO, config) == \
        alignment.selected_pairs
    assert opo_pairs(alignment, Strategy.OPO_SCORE, config) == \
        [(0, 0, 0.9), (2, 1, 0.6)]
    assert opo_pairs(alignment, Strategy.OPO_TOPK,
                     config.replace(opo_top_k=1)) == [(0, 0, 0.9)]


@pytest.mark.parametrize("strategy", ['opo', 'opo-s', 'opo-k'])
def test_object_pair_strategies_pool_correspondences(config, strategy):
    ref = textured_cloud()
    src = moved(ref, SHIFT)
    alignment = SoftAlignment.from_ground_truth(np.eye(3))
    result = register_clouds(src, ref, alignment, strategy, config)
    correspondences = result.correspondences
    assert np.array_equal(src.object_ids[correspondences.src_indices],
                          ref.object_ids[correspondences.ref_indices])
    assert np.allclose(result.transform.translation, [-1.0, 0.5, -1.5],
                       atol=1e-9)


def test_object_pair_strategy_without_kept_pairs(config):
    cloud = textured_cloud()
    alignment = SoftAlignment(np.full((4, 4), 0.25), 0.75,
                              [(0, 0, 0.3), (1, 1, 0.2)])
    with pytest.raises(NoCorrespondences):
        register_clouds(cloud, cloud, alignment, 'opo-s', config)


def test_ground_truth_correspondences_coincide(pair):
    correspondences = ground_truth_correspondences(pair, radius=0.05)
    moved_points = pair.gt_transform.apply(correspondences.src_points)
    distances = np.linalg.norm(moved_points - correspondences.ref_points,
                               axis=1)
    assert (distances < 0.05).all()


def test_concatenated_correspondences_keep_groups_apart():
    part = CorrespondenceSet([0, 1], [0, 1], [1.0, 1.0], np.zeros((2, 3)),
                             np.zeros((2, 3)), [0, 1])
    pooled = CorrespondenceSet.concatenate([part, part])
    assert pooled.groups.tolist() == [0, 1, 2, 3]
    assert len(CorrespondenceSet.concatenate([])) == 0


def test_correspondence_scores_must_be_non_negative():
    with pytest.raises(ValueError):
        CorrespondenceSet([0], [0], [-1.0], np.zeros((1, 3)), np.zeros((1, 3)))


@pytest.mark.parametrize("values", [
    {'strategy': 'everything'},
    {'gamma': -0.5},
    {'voxel': 0},
    {'ratio': 1.5},
    {'opo_top_k': 0},
])
def test_invalid_registration_config(values):
    with pytest.raises(ConfigError):
        RegistrationConfig.from_dict(values)


def test_spanning_tree_prefers_heavy_edges():
    identity = RigidTransform.identity()
    edges = {(0, 1): (identity, 0.9), (1, 2): (identity, 0.8),
             (0, 2): (identity, 0.1)}
    order, predecessors = spanning_tree(3, edges)
    assert order[0] == 0
    assert predecessors[1] == 0
    assert predecessors[2] == 1


def test_spanning_tree_reports_unreachable_scenes():
    identity = RigidTransform.identity()
    with pytest.raises(DisconnectedScenes) as e:
        spanning_tree(3, {(0, 1): (identity, 0.5)})
    assert 'scene(s) 2' in str(e.value)
    with pytest.raises(DisconnectedScenes):
        spanning_tree(2, {})


def shifted_scenes():
    cloud = textured_cloud(seed=4)
    second = RigidTransform(np.eye(3), [0.5, 0.0, -1.0])
    return [(None, cloud), (None, moved(cloud, SHIFT)),
            (None, moved(cloud, second))], [SHIFT, second]


def test_mosaic_brings_scenes_into_the_first_frame(config):
    scenes, shifts = shifted_scenes()
    transforms = mosaic(scenes, config=config, threads=2)
    assert np.allclose(transforms[0].as_matrix(), np.eye(4))
    for transform, shift in zip(transforms[1:], shifts):
        assert np.allclose(transform.as_matrix(), shift.inverse().as_matrix(),
                           atol=1e-9)
    merged = merge_scenes(scenes, transforms)
    n = len(scenes[0][1])
    assert merged.object_ids.tolist() == [0] * n + [1] * n + [2] * n
    assert np.allclose(merged.points[n:2 * n], scenes[0][1].points,
                       atol=1e-9)


def test_mosaic_with_an_unregistrable_scene(config):
    scenes, _ = shifted_scenes()
    rng = np.random.default_rng(5)
    tiny = PointCloud(rng.uniform(size=(2, 3)), [0, 0],
                      rng.normal(size=(2, 8)))
    with pytest.raises(DisconnectedScenes):
        mosaic(scenes[:2] + [(None, tiny)], config=config)


def test_mosaic_needs_two_scenes(config):
    with pytest.raises(ValueError):
        mosaic([(None, textured_cloud())], config=config)


@patch('sgtools.registration.mosaic.register_clouds')
def test_pose_graph_weighs_edges_by_mean_score(mock_register, config):
    scores = np.linspace(0.1, 1.0, 20)
    inliers = np.arange(20) >= 8
    correspondences = CorrespondenceSet(np.arange(20), np.arange(20), scores,
                                        np.zeros((20, 3)), np.zeros((20, 3)))
    mock_register.return_value = RegistrationResult(
        RigidTransform.identity(), correspondences, Strategy.A2A, inliers)
    edges = pose_graph([(None, None), (None, None)], config=config)
    assert list(edges) == [(0, 1)]
    assert edges[(0, 1)][1] == pytest.approx(scores.mean())
    assert mock_register.call_args[0][3] == Strategy.A2A


@patch('sgtools.registration.mosaic.register_clouds')
def test_pose_graph_drops_edges_with_few_inliers(mock_register, config):
    correspondences = CorrespondenceSet(np.arange(20), np.arange(20),
                                        np.ones(20), np.zeros((20, 3)),
                                        np.zeros((20, 3)))
    mock_register.return_value = RegistrationResult(
        RigidTransform.identity(), correspondences, Strategy.A2A,
        np.arange(20) < 9)
    assert pose_graph([(None, None), (None, None)], config=config) == {}


def gt_alignment_of(pair):
    return SoftAlignment.from_ground_truth(pair.gt_alignment)


def rotation_error_of(pair, strategy, config):
    """Rotation error in degrees; 180 when the pair cannot be registered."""
    try:
        result = register_clouds(pair.src_cloud, pair.ref_cloud,
                                 gt_alignment_of(pair), strategy, config)
    except (NoCorrespondences, DegenerateConfiguration):
        return 180.0, None
    return rotation_error(result.transform, pair.gt_transform), result


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_registration_follows_a_turned_reference(generator_config, seed):
    pair = generate_scene_pair(generator_config, seed)
    turn = RigidTransform.random(np.random.default_rng(100 + seed))
    turned = ScenePair(pair.src_graph, pair.src_cloud, pair.ref_graph,
                       moved(pair.ref_cloud, turn), pair.gt_alignment,
                       turn.compose(pair.gt_transform),
                       pair.overlap_fraction, pair.seed)
    config = RegistrationConfig(estimator='lgr')
    original, _ = register(pair, gt_alignment_of(pair), 'o2o', config=config)
    recovered, _ = register(turned, gt_alignment_of(turned), 'o2o',
                            config=config)
    assert np.allclose(recovered.as_matrix(),
                       turn.compose(original).as_matrix(), atol=1e-6)


@pytest.mark.slow
def test_object_to_object_is_more_consistent_on_symmetric_scenes():
    generator = GeneratorConfig(preset='symmetric')
    config = RegistrationConfig(estimator='lgr')
    objects, everything = [], []
    for seed in range(50):
        pair = generate_scene_pair(generator, seed)
        for strategy, consistency in (('o2o', objects), ('a2a', everything)):
            try:
                result = register_clouds(pair.src_cloud, pair.ref_cloud,
                                         gt_alignment_of(pair), strategy,
                                         config)
            except (NoCorrespondences, DegenerateConfiguration):
                consistency.append(0.0)
                continue
            consistency.append(scc(result.correspondences,
                                   pair.src_cloud.object_ids,
                                   pair.ref_cloud.object_ids,
                                   pair.gt_alignment))
    assert np.mean(objects) >= np.mean(everything)


def whole_scene_correspondences(pair, gamma, config):
    """Superpoint matching over both whole clouds, rescored by the gt nodes."""
    src_sp, ref_sp = [
        build_superpoints(cloud, config.voxel,
                          point_descriptors=point_descriptors(
                              cloud, config.descriptor_radius))
        for cloud in (pair.src_cloud, pair.ref_cloud)]
    c = rescore(superpoint_matching_matrix(src_sp, ref_sp),
                gt_alignment_of(pair), src_sp, ref_sp, gamma)
    return extract_correspondences(c, src_sp, ref_sp, config.top_m,
                                   config.mutual, config.ratio)


@pytest.mark.slow
def test_rescoring_resolves_twins():
    generator = GeneratorConfig(preset='twins')
    config = RegistrationConfig(estimator='lgr')
    consistency = {0.0: [], 0.2: []}
    errors = {0.0: [], 0.2: []}
    for seed in range(50):
        pair = generate_scene_pair(generator, seed)
        for gamma in consistency:
            correspondences = whole_scene_correspondences(pair, gamma, config)
            if len(correspondences) < 3:
                consistency[gamma].append(0.0)
                errors[gamma].append(180.0)
                continue
            consistency[gamma].append(scc(
                correspondences, pair.src_cloud.object_ids,
                pair.ref_cloud.object_ids, pair.gt_alignment))
            transform, _ = estimate_pose(correspondences, config)
            errors[gamma].append(rotation_error(transform, pair.gt_transform))
    assert np.mean(consistency[0.2]) > np.mean(consistency[0.0])
    # arccos near 1 is only good to about 1e-6 degrees
    assert np.mean(errors[0.2]) <= np.mean(errors[0.0]) + 1e-4


@pytest.mark.slow
def test_object_to_object_recovers_planted_transforms():
    generator = GeneratorConfig()
    config = RegistrationConfig(estimator='lgr')
    recovered, objects, per_object = 0, [], []
    for seed in range(200):
        pair = generate_scene_pair(generator, seed)
        error, result = rotation_error_of(pair, 'o2o', config)
        objects.append(error)
        if result is not None and error < 0.5 and translation_error(
                result.transform, pair.gt_transform) < 0.01:
            recovered += 1
        per_object.append(rotation_error_of(pair, 'opo', config)[0])
    assert recovered >= 198
    assert np.mean(objects) <= np.mean(per_object) + 1e-4


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_mosaic_rebuilds_a_generated_scene(seed):
    fragments = generate_scene_fragments(GeneratorConfig(), seed, 3)
    transforms = mosaic(fragments.fragments,
                        config=RegistrationConfig(estimator='lgr'))
    for transform, truth in zip(transforms, fragments.gt_transforms):
        assert rotation_error(transform, truth) < 0.5
    metrics = mosaic_metrics(merge_scenes(fragments.fragments, transforms),
                             fragments.full_cloud)
    assert metrics['acc'] < 0.01
    assert metrics['comp'] < 0.01
    assert metrics['f1'] >= 0.99
