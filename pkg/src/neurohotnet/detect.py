"""Candidate subnetworks from a thresholded influence graph."""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graph import connected_components

MIN_COMPONENT = 3


@dataclass(frozen=True)
class CandidateSet:
    """Components of size >= 3 found at one threshold.

    ``delta`` is the threshold that produced the edge set: an influence cut
    for :func:`candidates`, a p-value cut for the correlation-only detector.
    """

    delta: float
    components: tuple
    source_labels: tuple

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def member_labels(self):
        return [c.labels(self.source_labels) for c in self.components]


def threshold(g, delta):
    """Copy of the influence matrix with entries below ``delta`` and the diagonal zeroed."""
    delta = float(delta)
    if not delta >= 0:
        raise ParameterError(f"delta must be nonnegative, got {delta}")
    h = np.where(g.influence >= delta, g.influence, 0.0)
    np.fill_diagonal(h, 0.0)
    return h


def candidates(g, delta):
    """Connected components of the thresholded influence graph with at least 3 nodes."""
    comps = connected_components(threshold(g, delta), min_size=MIN_COMPONENT)
    return CandidateSet(float(delta), tuple(comps), tuple(g.labels))


def component_profile(g, deltas):
    """Component counts and sizes across a grid of thresholds.

    Returns a list of dicts with keys ``delta``, ``n_components`` and
    ``sizes`` (descending), one per grid value, in grid order.
    """
    rows = []
    for d in deltas:
        cs = candidates(g, d)
        rows.append({
            "delta": float(d),
            "n_components": len(cs),
            "sizes": sorted((len(c) for c in cs), reverse=True),
        })
    return rows
