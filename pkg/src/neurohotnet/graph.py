"""Weighted structural graphs, degree normalisation and connected components.

Matrices are dense ``float64`` arrays throughout; the graphs handled here have
at most a few thousand nodes.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import StructureError

SYMMETRY_RTOL = 1e-9


def _readonly(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def check_symmetric(a, name="matrix", rtol=SYMMETRY_RTOL):
    """Raise :class:`StructureError` unless ``a`` is square and symmetric.

    The tolerance is relative to the largest absolute entry.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructureError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise StructureError(f"{name} contains NaN or infinite entries")
    scale = max(float(np.max(np.abs(a), initial=0.0)), 1.0)
    gap = float(np.max(np.abs(a - a.T), initial=0.0))
    if gap > rtol * scale:
        raise StructureError(
            f"{name} is not symmetric (max |A - A^T| = {gap:.3g})")
    return a


@dataclass(frozen=True)
class NodeSet:
    """Sorted set of node indices into a graph's label order."""

    members: tuple

    def __post_init__(self):
        m = tuple(sorted({int(i) for i in self.members}))
        if len(m) != len(tuple(self.members)):
            raise StructureError("NodeSet members must be unique")
        if m and m[0] < 0:
            raise StructureError("NodeSet members must be nonnegative")
        object.__setattr__(self, "members", m)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return item in set(self.members)

    @property
    def indices(self):
        return np.asarray(self.members, dtype=np.intp)

    def symmetric_difference(self, other):
        return len(set(self.members) ^ set(other.members))

    def labels(self, labels):
        return [labels[i] for i in self.members]

    def check_bounds(self, n):
        if self.members and self.members[-1] >= n:
            raise StructureError(
                f"NodeSet index {self.members[-1]} out of range for {n} nodes")


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted graph stored as a symmetric adjacency matrix.

    Parameters
    ----------
    labels : sequence of str
        Region identifiers, one per node, all distinct.
    weights : array_like, shape (R, R)
        Nonnegative symmetric edge weights with zero diagonal.
    repair : bool
        Symmetrise ``(W + W.T) / 2`` before validation instead of rejecting
        a mildly asymmetric input.
    """

    labels: tuple
    weights: np.ndarray = field(repr=False)

    def __init__(self, labels, weights, repair=False):
        w = np.array(weights, dtype=np.float64, copy=True)
        if repair and w.ndim == 2 and w.shape[0] == w.shape[1]:
            w = (w + w.T) / 2
        check_symmetric(w, "weights")
        if np.any(w < 0):
            raise StructureError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise StructureError("weights must have a zero diagonal")
        # exact symmetry downstream
        w = (w + w.T) / 2
        labels = tuple(str(x) for x in labels)
        if len(labels) != w.shape[0]:
            raise StructureError(
                f"{len(labels)} labels for a {w.shape[0]}-node matrix")
        if len(set(labels)) != len(labels):
            raise StructureError("labels must be distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def from_matrix(cls, weights, labels=None, repair=False):
        n = np.shape(weights)[0]
        if labels is None:
            labels = [str(i) for i in range(n)]
        return cls(labels, weights, repair=repair)

    @property
    def n_nodes(self):
        return self.weights.shape[0]

    def degrees(self):
        return weighted_degrees(self)

    def to_csv(self, path):
        write_matrix(path, self.labels, self.weights)

    @classmethod
    def from_csv(cls, path, repair=False):
        labels, m = read_matrix(path)
        if m.shape[0] != m.shape[1]:
            raise StructureError(
                f"{path}: expected {len(labels)} data rows, got {m.shape[0]}")
        if np.any(m < 0):
            raise StructureError(f"{path}: negative weights")
        return cls(labels, m, repair=repair)


def weighted_degrees(g):
    """Row sums of the weight matrix (the diagonal of the degree matrix)."""
    return g.weights.sum(axis=1)


def normalize_symmetric(g):
    """Degree-normalised adjacency ``D^{-1/2} W D^{-1/2}``.

    Rows and columns of zero-degree nodes are left at zero.
    """
    d = weighted_degrees(g)
    inv_sqrt = np.zeros_like(d)
    nz = d > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(d[nz])
    return g.weights * inv_sqrt[:, None] * inv_sqrt[None, :]


def connected_components(adjacency, min_size=1):
    """Connected components of the graph with an edge wherever an entry is nonzero.

    Parameters
    ----------
    adjacency : array_like, shape (R, R)
        Symmetric matrix; the diagonal is ignored.
    min_size : int
        Components with fewer nodes are discarded.

    Returns
    -------
    list of NodeSet
        Ordered by smallest member index. Isolated nodes never form a
        component.
    """
    if int(min_size) < 1:
        raise StructureError("min_size must be >= 1")
    a = check_symmetric(adjacency, "adjacency")
    edges = a != 0
    np.fill_diagonal(edges, False)
    _, lab = csgraph.connected_components(edges, directed=False)
    connected = edges.any(axis=1)
    groups = {}
    for node in np.flatnonzero(connected):
        groups.setdefault(lab[node], []).append(int(node))
    comps = [NodeSet(tuple(m)) for m in groups.values() if len(m) >= min_size]
    comps.sort(key=lambda c: c.members[0])
    return comps


def read_matrix(path):
    """Read a labelled CSV matrix: header of labels, then numeric rows.

    Returns
    -------
    labels : list of str
    values : ndarray, shape (n_rows, len(labels))
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise StructureError(f"{path}: empty file")
    labels = [s.strip() for s in rows[0]]
    for k, r in enumerate(rows[1:], start=2):
        if len(r) != len(labels):
            raise StructureError(
                f"{path}: line {k} has {len(r)} fields, header has {len(labels)}")
    try:
        values = np.array([[float(x) for x in r] for r in rows[1:]],
                          dtype=np.float64)
    except ValueError as exc:
        raise StructureError(f"{path}: non-numeric entry ({exc})") from None
    if values.size == 0:
        values = values.reshape(0, len(labels))
    if values.ndim != 2 or values.shape[1] != len(labels):
        raise StructureError(f"{path}: ragged rows or header mismatch")
    if not np.all(np.isfinite(values)):
        raise StructureError(f"{path}: NaN or infinite entries")
    return labels, values


def write_matrix(path, labels, values):
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(labels)
        for row in values:
            w.writerow([repr(float(x)) for x in row])
