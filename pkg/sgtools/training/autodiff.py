"""Minimal reverse-mode automatic differentiation over numpy arrays.

A ``Tape`` records every operation as a ``Node`` in creation order, which is
a topological order of the computation graph. ``Tape.gradients`` walks the
nodes once in reverse and accumulates vector-Jacobian products.

Forward code in the encoder and matcher is written against these ops, so one
implementation serves both inference (values only) and training.
"""
import logging

import numpy as np
from scipy.special import expit, logsumexp as _logsumexp

logger = logging.getLogger(__name__)

LEAKY_SLOPE = 0.2


class Node:
    __array_priority__ = 1000

    def __init__(self, tape, value, parents=(), backward=None,
                 requires_grad=False, name=None):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.backward = backward
        self.requires_grad = requires_grad
        self.name = name
        self.index = len(tape.nodes)
        tape.nodes.append(self)

    def __repr__(self):
        return "Node({}shape={})".format(
            self.name + ', ' if self.name else '', self.value.shape)

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    @property
    def T(self):
        return transpose(self)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, key):
        return take(self, key)


class Tape:

    def __init__(self):
        self.nodes = []

    def variable(self, value, name=None):
        """Leaf whose gradient is wanted."""
        return Node(self, np.array(value, dtype=np.float64), requires_grad=True,
                    name=name)

    def constant(self, value):
        return Node(self, np.asarray(value, dtype=np.float64))

    def lift(self, value):
        if isinstance(value, Node):
            if value.tape is not self:
                raise ValueError("node belongs to a different tape")
            return value
        return self.constant(value)

    def record(self, value, parents, backward):
        requires_grad = any(p.requires_grad for p in parents)
        return Node(self, value, parents, backward if requires_grad else None,
                    requires_grad)

    def gradients(self, output, wrt):
        """d output / d node for every node in wrt (output must be a scalar)."""
        if output.value.size != 1:
            raise ValueError("gradients need a scalar output, got shape {}"
                             .format(output.value.shape))
        grads = {output.index: np.ones_like(output.value)}
        for node in reversed(self.nodes[:output.index + 1]):
            grad = grads.pop(node.index, None)
            if grad is None or node.backward is None:
                if grad is not None:
                    grads[node.index] = grad
                continue
            for parent, parent_grad in zip(node.parents, node.backward(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent.index in grads:
                    grads[parent.index] = grads[parent.index] + parent_grad
                else:
                    grads[parent.index] = parent_grad
        return [grads.get(node.index, np.zeros_like(node.value))
                for node in wrt]


def _tape_of(*values):
    for value in values:
        if isinstance(value, Node):
            return value.tape
    raise ValueError("at least one operand must be a Node")


def _lift(*values):
    tape = _tape_of(*values)
    return [tape.lift(v) for v in values]


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a, b):
    a, b = _lift(a, b)
    return a.tape.record(
        a.value + b.value, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    a, b = _lift(a, b)
    return a.tape.record(
        a.value - b.value, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b):
    a, b = _lift(a, b)
    return a.tape.record(
        a.value * b.value, (a, b),
        lambda g: (_unbroadcast(g * b.value, a.shape),
                   _unbroadcast(g * a.value, b.shape)))


def div(a, b):
    a, b = _lift(a, b)
    return a.tape.record(
        a.value / b.value, (a, b),
        lambda g: (_unbroadcast(g / b.value, a.shape),
                   _unbroadcast(-g * a.value / b.value ** 2, b.shape)))


def matmul(a, b):
    a, b = _lift(a, b)
    av, bv = a.value, b.value

    def backward(g):
        a2 = av if av.ndim == 2 else av[None, :]
        b2 = bv if bv.ndim == 2 else bv[:, None]
        g2 = np.reshape(g, (a2.shape[0], b2.shape[1]))
        return (g2 @ b2.T).reshape(av.shape), (a2.T @ g2).reshape(bv.shape)

    return a.tape.record(av @ bv, (a, b), backward)


def transpose(a):
    return a.tape.record(a.value.T, (a,), lambda g: (g.T,))


def reshape(a, shape):
    return a.tape.record(a.value.reshape(shape), (a,),
                         lambda g: (g.reshape(a.shape),))


def exp(a):
    out = np.exp(a.value)
    return a.tape.record(out, (a,), lambda g: (g * out,))


def log(a):
    return a.tape.record(np.log(a.value), (a,), lambda g: (g / a.value,))


def sqrt(a):
    out = np.sqrt(a.value)
    return a.tape.record(out, (a,), lambda g: (g * 0.5 / out,))


def square(a):
    return a.tape.record(a.value ** 2, (a,), lambda g: (2.0 * g * a.value,))


def sigmoid(a):
    out = expit(a.value)
    return a.tape.record(out, (a,), lambda g: (g * out * (1.0 - out),))


def leaky_relu(a, slope=LEAKY_SLOPE):
    scale = np.where(a.value > 0, 1.0, slope)
    return a.tape.record(a.value * scale, (a,), lambda g: (g * scale,))


def sum(a, axis=None, keepdims=False):
    out = np.sum(a.value, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return a.tape.record(out, (a,), backward)


def mean(a, axis=None, keepdims=False):
    count = a.value.size if axis is None else a.value.shape[axis]
    return mul(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def logsumexp(a, axis, keepdims=True):
    out = _logsumexp(a.value, axis=axis, keepdims=True)
    weights = np.exp(a.value - out)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (g * weights,)

    value = out if keepdims else np.squeeze(out, axis=axis)
    return a.tape.record(value, (a,), backward)


def concat(values, axis=0):
    values = _lift(*values)
    sizes = [v.shape[axis] for v in values]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return values[0].tape.record(
        np.concatenate([v.value for v in values], axis=axis),
        tuple(values), backward)


def take(a, key):
    """Indexing (slices or integer arrays) with scatter-add backward."""
    def backward(g):
        full = np.zeros_like(a.value)
        np.add.at(full, key, g)
        return (full,)

    return a.tape.record(a.value[key], (a,), backward)


def segment_sum(a, segment_ids, num_segments):
    """Sums rows of a into num_segments buckets."""
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    out = np.zeros((num_segments,) + a.shape[1:])
    np.add.at(out, segment_ids, a.value)
    return a.tape.record(out, (a,), lambda g: (g[segment_ids],))


def segment_max(a, segment_ids, num_segments):
    """Column-wise max of the rows of a in each bucket.

    Tied maxima share the gradient equally.
    """
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    out = np.full((num_segments,) + a.shape[1:], -np.inf)
    np.maximum.at(out, segment_ids, a.value)
    winners = (a.value == out[segment_ids]).astype(np.float64)
    counts = np.zeros_like(out)
    np.add.at(counts, segment_ids, winners)
    share = winners / np.maximum(counts[segment_ids], 1.0)
    return a.tape.record(out, (a,), lambda g: (g[segment_ids] * share,))


def segment_softmax(scores, segment_ids, num_segments):
    """Softmax of a score vector within each bucket."""
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    peak = np.full(num_segments, -np.inf)
    np.maximum.at(peak, segment_ids, scores.value)
    # The shift is a constant; softmax is invariant to it
    shifted = exp(scores - peak[segment_ids])
    totals = segment_sum(shifted, segment_ids, num_segments)
    return shifted / take(totals, segment_ids)


def values(nodes):
    return {name: node.value for name, node in nodes.items()}
