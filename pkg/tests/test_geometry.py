import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sgtools.errors import (DegenerateConfiguration,
                            InsufficientCorrespondences, KTooLarge)
from sgtools.geometry.data import PointCloud, RigidTransform, apply_transform
from sgtools.geometry.estimate import (local_to_global_pose, ransac_pose,
                                       residuals, weighted_svd_alignment)
from sgtools.geometry.search import (knn_edges, nearest_neighbors,
                                     radius_neighbors)
from sgtools.registration.data import CorrespondenceSet


def brute_knn(points, k):
    points = np.asarray(points, dtype=np.float64)
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    edges = []
    for i in range(len(points)):
        order = [j for j in np.lexsort((np.arange(len(points)), dist[i]))
                 if j != i]
        edges.extend([i, j] for j in order[:k])
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def correspondences(src, ref, groups=None, scores=None):
    n = len(src)
    return CorrespondenceSet(np.arange(n), np.arange(n),
                             np.ones(n) if scores is None else scores,
                             src, ref, groups)


def test_identity_leaves_points_unchanged():
    points = np.random.default_rng(0).normal(size=(10, 3))
    assert np.array_equal(RigidTransform.identity().apply(points), points)


def test_translation():
    transform = RigidTransform(np.eye(3), [1.0, 2.0, 3.0])
    assert np.allclose(transform.apply([[0.0, 0.0, 0.0]]), [[1.0, 2.0, 3.0]])


def test_inverse_undoes_transform():
    rng = np.random.default_rng(1)
    transform = RigidTransform.random(rng)
    points = rng.normal(size=(20, 3))
    restored = transform.inverse().apply(transform.apply(points))
    assert np.allclose(restored, points, atol=1e-12)


def test_compose_applies_right_operand_first():
    rng = np.random.default_rng(2)
    first, second = RigidTransform.random(rng), RigidTransform.random(rng)
    points = rng.normal(size=(5, 3))
    assert np.allclose(second.compose(first).apply(points),
                       second.apply(first.apply(points)), atol=1e-12)


def test_random_respects_rotation_bound():
    rng = np.random.default_rng(3)
    for _ in range(20):
        transform = RigidTransform.random(rng, max_rotation_deg=30.0,
                                          max_translation=0.5)
        cos = (np.trace(transform.rotation) - 1.0) / 2.0
        assert np.degrees(np.arccos(np.clip(cos, -1, 1))) <= 30.0 + 1e-9
        assert np.all(np.abs(transform.translation) <= 0.5)


def test_reflection_is_rejected():
    with pytest.raises(ValueError) as e:
        RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    assert 'determinant' in str(e.value)


def test_non_orthonormal_rotation_is_rejected():
    with pytest.raises(ValueError):
        RigidTransform(np.eye(3) * 2.0, np.zeros(3))


def test_matrix_and_list_forms_agree():
    transform = RigidTransform.random(np.random.default_rng(4))
    from_list = RigidTransform.from_list(transform.to_list())
    assert np.allclose(from_list.as_matrix(), transform.as_matrix())
    with pytest.raises(ValueError):
        RigidTransform.from_list([0.0] * 15)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_rigid_transform_preserves_distances(seed):
    rng = np.random.default_rng(seed)
    transform = RigidTransform.random(rng)
    points = rng.normal(size=(6, 3))
    moved = transform.apply(points)
    before = np.linalg.norm(points[:, None] - points[None], axis=2)
    after = np.linalg.norm(moved[:, None] - moved[None], axis=2)
    assert np.allclose(before, after, atol=1e-9)


def test_apply_transform_keeps_object_map():
    cloud = PointCloud(np.zeros((3, 3)), [0, 1, 1])
    moved = apply_transform(RigidTransform(np.eye(3), [1, 0, 0]), cloud)
    assert np.array_equal(moved.object_ids, cloud.object_ids)
    assert np.allclose(moved.points[:, 0], 1.0)


def test_point_cloud_rejects_mismatched_object_map():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)), [0, 1])


def test_weighted_svd_identity():
    points = np.random.default_rng(5).normal(size=(10, 3))
    transform = weighted_svd_alignment(points, points)
    assert np.allclose(transform.as_matrix(), np.eye(4), atol=1e-9)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_weighted_svd_recovers_planted_transform(seed):
    rng = np.random.default_rng(seed)
    truth = RigidTransform.random(rng)
    src = rng.normal(size=(12, 3))
    weights = rng.uniform(0.1, 1.0, size=12)
    recovered = weighted_svd_alignment(src, truth.apply(src), weights)
    assert np.allclose(recovered.as_matrix(), truth.as_matrix(), atol=1e-6)


def test_weighted_svd_ignores_weight_scale():
    rng = np.random.default_rng(6)
    src = rng.normal(size=(8, 3))
    ref = src + rng.normal(scale=0.05, size=(8, 3))
    weights = rng.uniform(0.1, 1.0, size=8)
    first = weighted_svd_alignment(src, ref, weights)
    second = weighted_svd_alignment(src, ref, weights * 7.0)
    assert np.allclose(first.as_matrix(), second.as_matrix(), atol=1e-12)


def test_weighted_svd_returns_proper_rotation_for_mirrored_input():
    rng = np.random.default_rng(7)
    src = rng.normal(size=(10, 3))
    mirrored = src * np.array([1.0, 1.0, -1.0])
    transform = weighted_svd_alignment(src, mirrored)
    assert np.isclose(np.linalg.det(transform.rotation), 1.0)


@pytest.mark.parametrize("src, weights", [
    (np.zeros((2, 3)), None),
    (np.random.default_rng(8).normal(size=(5, 3)), np.zeros(5)),
    (np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]), None),
    (np.ones((4, 3)), None),
])
def test_weighted_svd_degenerate_inputs(src, weights):
    with pytest.raises(DegenerateConfiguration):
        weighted_svd_alignment(src, src, weights)


def test_weighted_svd_length_mismatch():
    with pytest.raises(ValueError):
        weighted_svd_alignment(np.zeros((4, 3)), np.zeros((5, 3)))


def planted_correspondences(seed, n_inliers=70, n_outliers=30):
    rng = np.random.default_rng(seed)
    truth = RigidTransform.random(rng)
    src = rng.uniform(-2.0, 2.0, size=(n_inliers + n_outliers, 3))
    ref = truth.apply(src)
    ref[n_inliers:] = rng.uniform(-5.0, 5.0, size=(n_outliers, 3))
    groups = np.concatenate([np.arange(n_inliers) // 10,
                             100 + np.arange(n_outliers) // 10])
    return truth, correspondences(src, ref, groups)


def test_ransac_recovers_transform_among_outliers():
    truth, corr = planted_correspondences(9)
    transform, mask = ransac_pose(corr, max_iters=500, seed=0)
    assert np.allclose(transform.as_matrix(), truth.as_matrix(), atol=1e-6)
    assert mask[:70].all()


def test_ransac_is_deterministic_for_a_seed():
    _, corr = planted_correspondences(10)
    first, first_mask = ransac_pose(corr, max_iters=50, seed=4)
    second, second_mask = ransac_pose(corr, max_iters=50, seed=4)
    assert np.array_equal(first.as_matrix(), second.as_matrix())
    assert np.array_equal(first_mask, second_mask)


def test_ransac_needs_three_correspondences():
    points = np.zeros((2, 3))
    with pytest.raises(InsufficientCorrespondences):
        ransac_pose(correspondences(points, points))


def test_local_to_global_recovers_transform_among_outlier_groups():
    truth, corr = planted_correspondences(11)
    transform, mask = local_to_global_pose(corr)
    assert np.allclose(transform.as_matrix(), truth.as_matrix(), atol=1e-6)
    assert mask[:70].all()
    assert np.all(residuals(transform, corr.src_points[mask],
                            corr.ref_points[mask]) < 0.05)


def test_local_to_global_falls_back_to_all_pairs_without_groups():
    rng = np.random.default_rng(12)
    truth = RigidTransform.random(rng)
    src = rng.normal(size=(6, 3))
    # every pair in its own group, so no group can propose a pose
    transform, _ = local_to_global_pose(
        correspondences(src, truth.apply(src), np.arange(6)))
    assert np.allclose(transform.as_matrix(), truth.as_matrix(), atol=1e-6)


def test_local_to_global_needs_three_correspondences():
    points = np.zeros((2, 3))
    with pytest.raises(InsufficientCorrespondences):
        local_to_global_pose(correspondences(points, points))


def test_knn_breaks_ties_by_index():
    points = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [2.0, 1.0, 0.0]]
    assert knn_edges(points, 1).tolist() == [[0, 1], [1, 0], [2, 1]]


@pytest.mark.parametrize("k", [-1, 3, 4])
def test_knn_rejects_k_outside_cloud(k):
    with pytest.raises(KTooLarge):
        knn_edges(np.zeros((3, 3)), k)


def test_knn_zero_k_is_empty():
    assert knn_edges(np.zeros((3, 3)), 0).shape == (0, 2)


def test_knn_tree_path_matches_brute_force():
    points = np.random.default_rng(13).uniform(size=(100, 3))
    assert np.array_equal(knn_edges(points, 5), brute_knn(points, 5))


def test_knn_tree_path_is_exact_on_grid_ties():
    grid = np.stack(np.meshgrid(np.arange(5), np.arange(5), np.arange(3),
                                indexing='ij'), axis=-1).reshape(-1, 3)
    assert len(grid) == 75
    assert np.array_equal(knn_edges(grid.astype(float), 6),
                          brute_knn(grid, 6))


@given(points=arrays(np.float64, (12, 3),
                     elements=st.floats(-10, 10, allow_nan=False)),
       k=st.integers(0, 11))
def test_knn_has_k_edges_per_point_and_no_self_loops(points, k):
    edges = knn_edges(points, k)
    assert edges.shape == (12 * k, 2)
    assert np.all(edges[:, 0] != edges[:, 1])
    assert np.array_equal(np.bincount(edges[:, 0], minlength=12),
                          np.full(12, k))


def test_nearest_neighbors():
    dist, index = nearest_neighbors([[0.0, 0.0, 0.1]],
                                    [[5.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    assert index.tolist() == [1]
    assert np.allclose(dist, [0.1])


def test_radius_neighbors_includes_self():
    neighbors = radius_neighbors([[0.0, 0, 0], [0.5, 0, 0], [3.0, 0, 0]], 1.0)
    assert sorted(neighbors[0]) == [0, 1]
    assert list(neighbors[2]) == [2]
