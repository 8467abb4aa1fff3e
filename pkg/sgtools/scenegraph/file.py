"""Scene and scene-pair JSON files.

Scene document keys: schema_version, n_classes, n_relations, nodes (id, class,
attributes, centroid), edges (src, dst, relation; node ids), points (flat,
length 3N) and object_ids (node ids, length N). A scene-pair document holds
``src`` and ``ref`` scene documents plus gt_alignment (list of [src id,
ref id]), gt_transform (row-major 4x4) and overlap_fraction.
"""
import logging
import os

import numpy as np

from sgtools.cli.file import read_schema_file, write_schema_file
from sgtools.errors import ParseError, SchemaVersionMismatch
from sgtools.geometry.data import PointCloud, RigidTransform
from sgtools.scenegraph.data import SCHEMA_VERSION, SceneGraph, ScenePair

logger = logging.getLogger(__name__)

FRAGMENTS_MANIFEST = 'fragments.json'


def scene_to_schema(graph, cloud):
    ids = graph.node_ids
    return {
        'schema_version': SCHEMA_VERSION,
        'n_classes': graph.n_classes,
        'n_relations': graph.n_relations,
        'nodes': [
            {
                'id': int(ids[i]),
                'class': int(graph.classes[i]),
                'attributes': [float(v) for v in graph.attributes[i]],
                'centroid': [float(v) for v in graph.centroids[i]]
            } for i in range(len(graph))
        ],
        'edges': [
            {'src': int(ids[i]), 'dst': int(ids[j]), 'relation': int(r)}
            for (i, j), r in zip(graph.edges, graph.relations)
        ],
        'points': [float(v) for v in cloud.points.reshape(-1)],
        'object_ids': [int(ids[i]) for i in cloud.object_ids]
    }


def _field(document, key, where):
    if not isinstance(document, dict) or key not in document:
        raise ParseError("{}: missing field '{}'".format(where, key))
    return document[key]


def _floats(values, where, length=None):
    if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in values):
        raise ParseError("{}: expected a list of numbers".format(where))
    if length is not None and len(values) != length:
        raise ParseError("{}: expected {} values, got {}".format(
            where, length, len(values)))
    return np.asarray(values, dtype=np.float64)


def _integer(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError("{}: expected an integer, got {!r}".format(
            where, value))
    return value


def scene_from_schema(document, where='scene'):
    version = _field(document, 'schema_version', where)
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            "{}: schema_version {} is not supported (expected {})".format(
                where, version, SCHEMA_VERSION))
    n_classes = _integer(_field(document, 'n_classes', where),
                         where + '.n_classes')
    n_relations = _integer(_field(document, 'n_relations', where),
                           where + '.n_relations')

    nodes = _field(document, 'nodes', where)
    if not isinstance(nodes, list):
        raise ParseError("{}.nodes: expected a list".format(where))
    ids, classes, attributes, centroids = [], [], [], []
    for k, node in enumerate(nodes):
        node_where = "{}.nodes[{}]".format(where, k)
        ids.append(_integer(_field(node, 'id', node_where),
                            node_where + '.id'))
        classes.append(_integer(_field(node, 'class', node_where),
                                node_where + '.class'))
        attributes.append(_floats(_field(node, 'attributes', node_where),
                                  node_where + '.attributes'))
        centroids.append(_floats(_field(node, 'centroid', node_where),
                                 node_where + '.centroid', 3))
    if len(set(ids)) != len(ids):
        raise ParseError("{}.nodes: duplicate node ids".format(where))
    index = {node_id: i for i, node_id in enumerate(ids)}
    widths = {len(a) for a in attributes}
    if len(widths) > 1:
        raise ParseError("{}.nodes: attribute vectors differ in width".format(
            where))

    edges, relations = [], []
    for k, edge in enumerate(_field(document, 'edges', where)):
        edge_where = "{}.edges[{}]".format(where, k)
        pair = []
        for key in ('src', 'dst'):
            node_id = _integer(_field(edge, key, edge_where),
                               "{}.{}".format(edge_where, key))
            if node_id not in index:
                raise ParseError("{}.{}: node id {} does not exist".format(
                    edge_where, key, node_id))
            pair.append(index[node_id])
        edges.append(pair)
        relations.append(_integer(_field(edge, 'relation', edge_where),
                                  edge_where + '.relation'))

    points = _floats(_field(document, 'points', where), where + '.points')
    if len(points) % 3:
        raise ParseError("{}.points: length {} is not a multiple of 3".format(
            where, len(points)))
    object_ids = _field(document, 'object_ids', where)
    if not isinstance(object_ids, list) or len(object_ids) != len(points) // 3:
        raise ParseError("{}.object_ids: expected {} entries".format(
            where, len(points) // 3))
    labels = np.empty(len(object_ids), dtype=np.int64)
    for k, node_id in enumerate(object_ids):
        if node_id not in index:
            raise ParseError(
                "{}.object_ids[{}]: object id {} references a missing node"
                .format(where, k, node_id))
        labels[k] = index[node_id]

    width = widths.pop() if widths else n_classes
    try:
        graph = SceneGraph(
            ids, classes, np.asarray(attributes).reshape(len(ids), width),
            np.asarray(centroids).reshape(-1, 3),
            np.asarray(edges, dtype=np.int64).reshape(-1, 2),
            np.asarray(relations, dtype=np.int64), n_classes, n_relations)
    except ValueError as e:
        raise ParseError("{}: {}".format(where, e))
    return graph, PointCloud(points.reshape(-1, 3), labels)


def save_scene(file_path, graph, cloud):
    write_schema_file(file_path, scene_to_schema(graph, cloud))


def load_scene(file_path):
    return scene_from_schema(read_schema_file(file_path), where=str(file_path))


def pair_to_schema(pair):
    src_ids, ref_ids = pair.src_graph.node_ids, pair.ref_graph.node_ids
    return {
        'schema_version': SCHEMA_VERSION,
        'seed': pair.seed,
        'src': scene_to_schema(pair.src_graph, pair.src_cloud),
        'ref': scene_to_schema(pair.ref_graph, pair.ref_cloud),
        'gt_alignment': [[int(src_ids[i]), int(ref_ids[j])]
                         for i, j in pair.gt_pairs],
        'gt_transform': pair.gt_transform.to_list(),
        'overlap_fraction': float(pair.overlap_fraction)
    }


def pair_from_schema(document, where='pair'):
    version = _field(document, 'schema_version', where)
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            "{}: schema_version {} is not supported (expected {})".format(
                where, version, SCHEMA_VERSION))
    src_graph, src_cloud = scene_from_schema(_field(document, 'src', where),
                                             where + '.src')
    ref_graph, ref_cloud = scene_from_schema(_field(document, 'ref', where),
                                             where + '.ref')
    gt = np.zeros((len(src_graph), len(ref_graph)), dtype=np.int64)
    for k, link in enumerate(_field(document, 'gt_alignment', where)):
        link_where = "{}.gt_alignment[{}]".format(where, k)
        if not isinstance(link, list) or len(link) != 2:
            raise ParseError("{}: expected [src id, ref id]".format(
                link_where))
        try:
            gt[src_graph.index_of(link[0]), ref_graph.index_of(link[1])] = 1
        except KeyError as e:
            raise ParseError("{}: node id {} does not exist".format(
                link_where, e.args[0]))
    transform = _floats(_field(document, 'gt_transform', where),
                        where + '.gt_transform', 16)
    try:
        gt_transform = RigidTransform.from_list(list(transform))
        return ScenePair(src_graph, src_cloud, ref_graph, ref_cloud, gt,
                         gt_transform,
                         float(_field(document, 'overlap_fraction', where)),
                         seed=document.get('seed'))
    except ValueError as e:
        raise ParseError("{}: {}".format(where, e))


def save_scene_pair(file_path, pair):
    write_schema_file(file_path, pair_to_schema(pair))


def load_scene_pair(file_path):
    return pair_from_schema(read_schema_file(file_path), where=str(file_path))


def save_fragments(directory, fragments, seed=None):
    """Writes one scene file per fragment and a ``fragments.json`` manifest.

    The manifest lists each fragment file with its gt transform into the
    first fragment's frame, plus the uncut scene points in that frame.
    Returns the manifest path.
    """
    entries = []
    for k, (graph, cloud) in enumerate(fragments.fragments):
        name = 'fragment_{:02d}.json'.format(k)
        save_scene(os.path.join(directory, name), graph, cloud)
        entries.append({'file': name,
                        'gt_transform': fragments.gt_transforms[k].to_list()})
    manifest = {
        'schema_version': SCHEMA_VERSION,
        'seed': seed,
        'fragments': entries,
        'full_points': [float(v)
                        for v in fragments.full_cloud.points.reshape(-1)]
    }
    manifest_path = os.path.join(directory, FRAGMENTS_MANIFEST)
    write_schema_file(manifest_path, manifest)
    return manifest_path


def load_fragments(manifest_path):
    """Returns (scenes, gt transforms, uncut cloud or None)."""
    where = str(manifest_path)
    document = read_schema_file(manifest_path)
    version = _field(document, 'schema_version', where)
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            "{}: schema_version {} is not supported (expected {})".format(
                where, version, SCHEMA_VERSION))
    directory = os.path.dirname(os.path.abspath(manifest_path))
    scenes, transforms = [], []
    for k, entry in enumerate(_field(document, 'fragments', where)):
        entry_where = "{}.fragments[{}]".format(where, k)
        scenes.append(load_scene(os.path.join(
            directory, _field(entry, 'file', entry_where))))
        values = _floats(_field(entry, 'gt_transform', entry_where),
                         entry_where + '.gt_transform', 16)
        try:
            transforms.append(RigidTransform.from_list(list(values)))
        except ValueError as e:
            raise ParseError("{}: {}".format(entry_where, e))
    full_cloud = None
    if document.get('full_points') is not None:
        points = _floats(document['full_points'], where + '.full_points')
        if len(points) % 3:
            raise ParseError("{}.full_points: length is not a multiple of 3"
                             .format(where))
        points = points.reshape(-1, 3)
        full_cloud = PointCloud(points, np.zeros(len(points), dtype=np.int64))
    return scenes, transforms, full_cloud


def pair_manifest(entries, seed):
    """Manifest document; entries hold file, seed, overlap_fraction, bucket."""
    return {'schema_version': SCHEMA_VERSION, 'seed': seed,
            'pairs': list(entries)}


def load_pair_manifest(manifest_path):
    """Returns [(file name, ScenePair)] in manifest order."""
    where = str(manifest_path)
    document = read_schema_file(manifest_path)
    version = _field(document, 'schema_version', where)
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            "{}: schema_version {} is not supported (expected {})".format(
                where, version, SCHEMA_VERSION))
    entries = _field(document, 'pairs', where)
    if not isinstance(entries, list):
        raise ParseError("{}.pairs: expected a list".format(where))
    directory = os.path.dirname(os.path.abspath(manifest_path))
    pairs = []
    for k, entry in enumerate(entries):
        name = _field(entry, 'file', "{}.pairs[{}]".format(where, k))
        pairs.append((name, load_scene_pair(os.path.join(directory, name))))
    return pairs
