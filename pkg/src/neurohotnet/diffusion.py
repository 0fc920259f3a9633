"""Equilibrium heat diffusion on a degree-normalised structural graph.

For a structural graph with adjacency ``W`` the influence graph is built as::

    M' = D^{-1/2} W D^{-1/2}
    L  = diag(M' 1) - M' + gamma I
    f  = (L^{-1})^T
    G[a, b] = (f[a, b] / f[a, :].sum() + f[b, a] / f[b, :].sum()) / 2

``L`` is block diagonal over the structural components and symmetric
positive definite for ``gamma > 0``, so each block is Cholesky-factorised and
inverted on its own. Entries between different components are therefore
exactly zero.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import NumericalError, ParameterError
from .graph import (check_symmetric, connected_components,
                    normalize_symmetric, read_matrix, weighted_degrees,
                    write_matrix)


@dataclass(frozen=True, eq=False)
class InfluenceGraph:
    """Symmetric matrix of pairwise diffusion influences.

    The diagonal (self-influence) is kept for completeness but every
    consumer in this package ignores it.
    """

    labels: tuple
    influence: np.ndarray = field(repr=False)
    gamma: float = float("nan")

    def __post_init__(self):
        g = check_symmetric(self.influence, "influence")
        if np.any(g < 0):
            raise ParameterError("influence entries must be nonnegative")
        g = np.array(g, dtype=np.float64, copy=True)
        g.setflags(write=False)
        object.__setattr__(self, "influence", g)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(self.labels) != g.shape[0]:
            raise ParameterError("labels do not match influence dimension")

    @property
    def n_nodes(self):
        return self.influence.shape[0]

    def to_csv(self, path):
        write_matrix(path, self.labels, self.influence)

    @classmethod
    def from_csv(cls, path, gamma=float("nan")):
        labels, m = read_matrix(path)
        return cls(tuple(labels), m, gamma)


def _block_inverse(block, nodes):
    try:
        factor = linalg.cho_factor(block, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(
            f"Cholesky factorisation failed on component {nodes[:8]}..."
            f" (size {len(nodes)}, min diagonal {block.diagonal().min():.3g}):"
            f" {exc}") from None
    return linalg.cho_solve(factor, np.eye(block.shape[0]),
                            check_finite=False)


def diffuse(g, gamma):
    """Influence graph of ``g`` at restart rate ``gamma``.

    Parameters
    ----------
    g : WeightedGraph
    gamma : float
        Positive flow-rate parameter. Larger values keep heat closer to its
        source.

    Returns
    -------
    InfluenceGraph
        Isolated nodes get all-zero rows and columns, diagonal included.
    """
    gamma = float(gamma)
    if not gamma > 0 or not np.isfinite(gamma):
        raise ParameterError(f"gamma must be positive, got {gamma}")
    m = normalize_symmetric(g)
    n = m.shape[0]
    lap = np.diag(m.sum(axis=1)) - m + gamma * np.eye(n)
    out = np.zeros((n, n))
    for comp in connected_components(g.weights, min_size=2):
        idx = comp.indices
        f = _block_inverse(lap[np.ix_(idx, idx)], idx).T
        # row sums include the diagonal of f
        p = f / f.sum(axis=1, keepdims=True)
        out[np.ix_(idx, idx)] = (p + p.T) / 2
    return InfluenceGraph(g.labels, out, gamma)


def suggest_gamma(g):
    """Mean weighted degree over nodes with at least one edge."""
    d = weighted_degrees(g)
    d = d[d > 0]
    if d.size == 0:
        raise ParameterError("cannot suggest gamma for an edgeless graph")
    return float(d.mean())
