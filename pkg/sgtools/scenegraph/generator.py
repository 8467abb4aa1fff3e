import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from sgtools.errors import InfeasibleConfig
from sgtools.geometry.data import PointCloud, RigidTransform
from sgtools.scenegraph.data import (EXTENT_SCALE, LARGER_THAN, NEAR, SHAPES,
                                     SUPPORTED_BY, SUPPORTS, SceneGraph,
                                     ScenePair)

logger = logging.getLogger(__name__)

SYMMETRIC_GROUP_SIZE = 3
PLANE_THICKNESS = 0.02
DYNAMIC_MAX_ANGLE_SUM_DEG = 3.0
DYNAMIC_MAX_SHIFT = 0.05


@dataclass
class _SceneObject:
    cls: int
    shape: str
    dims: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    support: Optional[int] = None
    offset: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None

    @property
    def footprint(self):
        return 0.5 * float(np.hypot(self.dims[0], self.dims[1]))

    @property
    def volume(self):
        ex, ey, ez = self.dims
        if self.shape == 'sphere':
            return 4.0 / 3.0 * np.pi * (ex / 2.0) ** 3
        if self.shape == 'cylinder':
            return np.pi * (ex / 2.0) ** 2 * ez
        return float(ex * ey * ez)

    @property
    def flat_top(self):
        return self.shape in ('box', 'cylinder')


@dataclass
class SceneFragments:
    """Several overlapping fragments cut from one scene.

    ``gt_transforms[i]`` maps fragment i's frame into fragment 0's frame,
    which is also the frame of ``full_cloud``.
    """
    fragments: list
    gt_transforms: List[RigidTransform]
    full_cloud: PointCloud
    node_ranges: list


def _round_half_up(value):
    return int(np.floor(value + 0.5))


def _default_shape(cls):
    return SHAPES[cls % len(SHAPES)]


def _class_dims(cls, shape, rng):
    base = 0.3 + 0.15 * ((cls // len(SHAPES)) % 4)
    jitter = rng.uniform(0.85, 1.15, size=3)
    if shape == 'box':
        return np.array([base * 1.4, base, base * 0.9]) * jitter
    if shape == 'sphere':
        return np.full(3, base * jitter[0])
    if shape == 'cylinder':
        diameter = base * jitter[0]
        return np.array([diameter, diameter, base * 1.3 * jitter[2]])
    return np.array([base * 1.6 * jitter[0], base * 1.2 * jitter[1],
                     PLANE_THICKNESS])


def _draw_object(config, rng):
    cls = int(rng.integers(config.n_classes))
    shape = _default_shape(cls)
    return _SceneObject(cls, shape, _class_dims(cls, shape, rng))


def _sample_surface(obj, count, rng):
    """Uniform surface samples in the object's local frame (origin = center)."""
    ex, ey, ez = obj.dims
    if obj.shape == 'sphere':
        directions = rng.normal(size=(count, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return directions * (ex / 2.0)
    if obj.shape == 'cylinder':
        radius = ex / 2.0
        side = 2.0 * np.pi * radius * ez
        cap = np.pi * radius ** 2
        choice = rng.choice(3, size=count, p=np.array([side, cap, cap]) /
                            (side + 2 * cap))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
        r = np.where(choice == 0, radius,
                     radius * np.sqrt(rng.uniform(size=count)))
        z = np.where(choice == 0, rng.uniform(-ez / 2, ez / 2, size=count),
                     np.where(choice == 1, ez / 2, -ez / 2))
        return np.stack([r * np.cos(angle), r * np.sin(angle), z], axis=1)
    if obj.shape == 'plane':
        return np.stack([rng.uniform(-ex / 2, ex / 2, size=count),
                         rng.uniform(-ey / 2, ey / 2, size=count),
                         np.full(count, ez / 2)], axis=1)
    # box: pick faces by area
    areas = np.array([ey * ez, ey * ez, ex * ez, ex * ez, ex * ey, ex * ey])
    face = rng.choice(6, size=count, p=areas / areas.sum())
    local = rng.uniform(-0.5, 0.5, size=(count, 3)) * obj.dims
    axis = face // 2
    sign = np.where(face % 2 == 0, -0.5, 0.5)
    local[np.arange(count), axis] = sign * obj.dims[axis]
    return local


def _place_objects(objects, config, rng):
    """Lays floor objects out along x and stacks the rest on their support."""
    cursor = 0.0
    previous_footprint = 0.0
    for index, obj in enumerate(objects):
        if obj.support is not None:
            support = objects[obj.support]
            top = support.center[2] + support.dims[2] / 2.0
            slack = max(support.footprint - obj.footprint, 0.0) * 0.5
            offset = obj.offset
            if offset is None:
                offset = rng.uniform(-slack, slack, size=2)
            else:
                c, s = np.cos(support.yaw), np.sin(support.yaw)
                offset = np.array([c * offset[0] - s * offset[1],
                                   s * offset[0] + c * offset[1]])
            obj.center = np.array([support.center[0] + offset[0],
                                   support.center[1] + offset[1],
                                   top + obj.dims[2] / 2.0])
            obj.yaw = support.yaw
            continue
        gap = rng.uniform(0.3, 0.8)
        if index > 0:
            cursor += previous_footprint + obj.footprint + gap
        obj.center = np.array([cursor, rng.uniform(-1.0, 1.0),
                               obj.dims[2] / 2.0])
        obj.yaw = rng.uniform(0.0, 2.0 * np.pi)
        previous_footprint = obj.footprint


def _build_objects(config, rng, m_full, src_count, ref_count):
    objects = []
    for index in range(m_full):
        obj = _draw_object(config, rng)
        previous = objects[-1] if objects else None
        if (previous is not None and previous.support is None
                and previous.flat_top
                and obj.footprint <= previous.footprint
                and not any(o.support == index - 1 for o in objects)
                and rng.uniform() < config.stack_probability):
            obj.support = index - 1
        objects.append(obj)

    if config.preset == 'symmetric':
        _insert_symmetric_group(objects, config, rng, m_full)
    elif config.preset == 'twins':
        _insert_twins(objects, config, rng, m_full, src_count, ref_count)
    _place_objects(objects, config, rng)
    return objects


def _insert_symmetric_group(objects, config, rng, m_full):
    """One wide support carrying identical same-class objects in a row."""
    size = min(SYMMETRIC_GROUP_SIZE, m_full - 1)
    start = max(0, min(m_full // 2 - (size + 1) // 2, m_full - size - 1))
    support_cls, item_cls = 0, 1
    support = _SceneObject(support_cls, 'box', np.array([2.0, 0.9, 0.45]))
    item_dims = np.array([0.45, 0.35, 0.15])
    objects[start] = support
    spacing = 0.6
    for k in range(size):
        item = _SceneObject(item_cls, 'box', item_dims.copy(), support=start)
        item.offset = np.array([(k - (size - 1) / 2.0) * spacing, 0.0])
        objects[start + 1 + k] = item
    follower = start + 1 + size
    if follower < m_full and objects[follower].support is not None:
        objects[follower].support = None


def _insert_twins(objects, config, rng, m_full, src_count, ref_count):
    """Two same-shape objects: one in the overlap, one only in the reference."""
    overlap_start = m_full - ref_count
    twin_cls = 2 % config.n_classes
    dims = np.array([1.2, 0.8, 0.75])
    first = overlap_start + (src_count - overlap_start) // 2
    second = src_count + (m_full - src_count) // 2
    for index in (first, second):
        objects[index] = _SceneObject(twin_cls, 'box', dims.copy())
        if index + 1 < m_full and objects[index + 1].support == index:
            objects[index + 1].support = None


def _scene_relations(objects, near_radius):
    relations = {}
    for i, obj in enumerate(objects):
        if obj.support is not None:
            relations[(i, obj.support)] = SUPPORTED_BY
            relations[(obj.support, i)] = SUPPORTS
    for i, a in enumerate(objects):
        for j, b in enumerate(objects):
            if i == j or (i, j) in relations:
                continue
            if np.linalg.norm(a.center - b.center) < near_radius:
                if a.volume > 1.5 * b.volume:
                    relations[(i, j)] = LARGER_THAN
                else:
                    relations[(i, j)] = NEAR
    return relations


def _object_points(obj, count, rng):
    local = _sample_surface(obj, count, rng)
    rotation = Rotation.from_euler('z', obj.yaw).as_matrix()
    return local @ rotation.T + obj.center


def _small_motion(rng):
    weights = rng.dirichlet(np.ones(3))
    angles = weights * rng.uniform(0.0, DYNAMIC_MAX_ANGLE_SUM_DEG * 0.999)
    rotation = Rotation.from_euler('xyz', angles, degrees=True).as_matrix()
    shift = rng.uniform(-DYNAMIC_MAX_SHIFT, DYNAMIC_MAX_SHIFT, size=3)
    return rotation, shift


def _build_fragment(objects, indices, relations, transform, config, rng,
                    resample=(), moved=()):
    """Induced fragment in its own frame; returns (graph, cloud, order)."""
    indices = np.asarray(indices, dtype=np.int64)
    order = indices[rng.permutation(len(indices))]
    position = {int(g): local for local, g in enumerate(order)}

    classes, extents, centers, chunks, labels = [], [], [], [], []
    for local, g in enumerate(order):
        obj = objects[g]
        points = obj.points
        if g in resample:
            points = _object_points(obj, len(obj.points), rng)
        center = obj.center
        if g in moved:
            rotation, shift = _small_motion(rng)
            points = (points - obj.center) @ rotation.T + obj.center + shift
            center = obj.center + shift
        if config.noise_sigma > 0:
            points = points + rng.normal(scale=config.noise_sigma,
                                         size=points.shape)
        classes.append(obj.cls)
        extents.append(np.sort(obj.dims)[::-1] / EXTENT_SCALE)
        centers.append(center)
        chunks.append(points)
        labels.append(np.full(len(points), local))

    edges, rels = [], []
    for (i, j), relation in sorted(relations.items()):
        if i in position and j in position:
            edges.append((position[i], position[j]))
            rels.append(relation)

    points = transform.apply(np.concatenate(chunks, axis=0))
    graph = SceneGraph(
        node_ids=np.arange(len(order)),
        classes=classes,
        attributes=SceneGraph.build_attributes(classes, extents,
                                               config.n_classes),
        centroids=transform.apply(np.asarray(centers)),
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        relations=np.asarray(rels, dtype=np.int64),
        n_classes=config.n_classes,
        n_relations=config.n_relations
    )
    cloud = PointCloud(points, np.concatenate(labels))
    return graph, cloud, order


def _draw_sizes(config, rng):
    src_count = int(rng.integers(config.min_nodes, config.max_nodes + 1))
    ref_count = int(rng.integers(config.min_nodes, config.max_nodes + 1))
    fraction = rng.uniform(config.min_overlap, config.max_overlap)
    shared = _round_half_up(fraction * min(src_count, ref_count))
    return src_count, ref_count, shared


def _sizes_feasible(config, src_count, ref_count, shared):
    m_full = src_count + ref_count - shared
    if config.preset == 'symmetric':
        return m_full >= SYMMETRIC_GROUP_SIZE + 1
    if config.preset == 'twins':
        return shared >= 1 and ref_count - shared >= 1
    return True


def generate_scene_pair(config, seed):
    """Cuts a synthetic scene into two overlapping fragments.

    The source fragment stays in the scene frame; the reference fragment is
    moved by the ground-truth transform, so gt_transform maps source
    coordinates onto reference coordinates.
    """
    rng = np.random.default_rng(seed)
    for attempt in range(config.max_attempts):
        src_count, ref_count, shared = _draw_sizes(config, rng)
        if _sizes_feasible(config, src_count, ref_count, shared):
            break
        logger.debug("attempt {}: sizes ({}, {}, {}) infeasible for preset {}"
                     .format(attempt, src_count, ref_count, shared,
                             config.preset))
    else:
        raise InfeasibleConfig(
            "could not draw fragment sizes for preset '{}' in {} attempts"
            .format(config.preset, config.max_attempts)
        )

    m_full = src_count + ref_count - shared
    objects = _build_objects(config, rng, m_full, src_count, ref_count)
    for obj in objects:
        count = int(rng.integers(config.min_points, config.max_points + 1))
        obj.points = _object_points(obj, count, rng)
    relations = _scene_relations(objects, config.near_radius)

    src_indices = np.arange(0, src_count)
    ref_indices = np.arange(m_full - ref_count, m_full)
    shared_indices = set(range(m_full - ref_count, src_count))

    transform = RigidTransform.random(rng, config.max_rotation_deg,
                                      config.max_translation)
    src_graph, src_cloud, src_order = _build_fragment(
        objects, src_indices, relations, RigidTransform.identity(), config,
        rng)
    moved = {g for g in sorted(shared_indices)
             if rng.uniform() < config.dynamic_object_rate}
    resample = shared_indices if config.resample_shared else set()
    ref_graph, ref_cloud, ref_order = _build_fragment(
        objects, ref_indices, relations, transform, config, rng,
        resample=resample, moved=moved)

    gt_alignment = (src_order[:, None] == ref_order[None, :]).astype(np.int64)
    overlap_fraction = shared / min(src_count, ref_count)
    logger.debug("generated pair seed={} src={} ref={} shared={}".format(
        seed, src_count, ref_count, shared))
    return ScenePair(src_graph, src_cloud, ref_graph, ref_cloud,
                     gt_alignment, transform, overlap_fraction, seed=seed)


def generate_scene_fragments(config, seed, n_fragments=3):
    """Cuts one scene into n_fragments consecutive overlapping windows."""
    if n_fragments < 2:
        raise InfeasibleConfig("mosaicking needs at least 2 fragments")
    rng = np.random.default_rng(seed)
    window = int(rng.integers(max(config.min_nodes, 2), max(config.max_nodes, 2) + 1))
    fraction = rng.uniform(config.min_overlap, config.max_overlap)
    shared = min(max(_round_half_up(fraction * window), 1), window - 1)
    step = window - shared
    m_full = window + (n_fragments - 1) * step

    objects = _build_objects(config, rng, m_full, window, window)
    for obj in objects:
        count = int(rng.integers(config.min_points, config.max_points + 1))
        obj.points = _object_points(obj, count, rng)
    relations = _scene_relations(objects, config.near_radius)

    fragments, gt_transforms, node_ranges = [], [], []
    for k in range(n_fragments):
        if k == 0:
            transform = RigidTransform.identity()
        else:
            transform = RigidTransform.random(rng, config.max_rotation_deg,
                                              config.max_translation)
        indices = np.arange(k * step, k * step + window)
        graph, cloud, _ = _build_fragment(objects, indices, relations,
                                          transform, config, rng)
        fragments.append((graph, cloud))
        gt_transforms.append(transform.inverse())
        node_ranges.append((int(indices[0]), int(indices[-1]) + 1))

    full_points = np.concatenate([obj.points for obj in objects], axis=0)
    full_labels = np.concatenate([np.full(len(obj.points), g)
                                  for g, obj in enumerate(objects)])
    return SceneFragments(fragments, gt_transforms,
                          PointCloud(full_points, full_labels), node_ranges)
