from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from neurohotnet import SubjectSample, WeightedGraph

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TOY = Path(__file__).resolve().parents[1] / "src" / "neurohotnet" / "data" / "toy"


@pytest.fixture
def toy_graph():
    return WeightedGraph.from_csv(TOY / "structure.csv")


@pytest.fixture
def toy_dir():
    return TOY


def random_graph(rng, n, density=0.5, low=0.1, high=3.0):
    w = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < density
    w[iu[keep], ju[keep]] = rng.uniform(low, high, keep.sum())
    return WeightedGraph.from_matrix(w + w.T)


def planted_subjects(rng, n_nodes, members, rho, n_subjects, frames=100):
    """Subjects with correlation ``rho`` inside ``members`` and 0 elsewhere."""
    c = np.eye(n_nodes)
    for a in members:
        for b in members:
            if a != b:
                c[a, b] = rho
    factor = np.linalg.cholesky(c)
    return [SubjectSample.from_signals(
        rng.standard_normal((frames, n_nodes)) @ factor.T)
        for _ in range(n_subjects)]


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
