"""End-to-end compositions of the four detection methods."""

from dataclasses import dataclass

import numpy as np

from .baselines import naive_detect
from .detect import candidates
from .diffusion import diffuse, suggest_gamma
from .errors import ParameterError
from .inference import permutation_tests, select, ttest_variant
from .precision import population_glasso, siggm_with_diffusion

LABEL_PREFIX = {
    "neurohotnet": "H",
    "siggm-diffusion": "S",
    "glasso": "G",
    "naive": "N",
}


@dataclass(frozen=True)
class NeuroHotnetRun:
    influence: object
    candidates: object
    results: tuple

    @property
    def selected(self):
        return [r for r in self.results if r.selected]


def _gamma(graph, gamma):
    return suggest_gamma(graph) if gamma == "auto" else float(gamma)


def neurohotnet(graph, samples, gamma, delta, alpha=0.05, permutations=10_000,
                seed=0, test_method="permutation", null="relabel", threads=1):
    """Diffuse, threshold, test every candidate and apply the ``alpha / |C|`` rule.

    Candidates come from ``graph`` alone; ``samples`` are used only for
    testing.
    """
    g = diffuse(graph, _gamma(graph, gamma))
    cs = candidates(g, delta)
    if test_method == "permutation":
        results = permutation_tests(samples, cs.components, permutations,
                                    seed, null=null, threads=threads)
    elif test_method == "ttest":
        results = [ttest_variant(samples, c, 1, seed) for c in cs.components]
    else:
        raise ParameterError(f"unknown test method {test_method!r}")
    return NeuroHotnetRun(g, cs, tuple(select(results, alpha)))


def siggm_diffusion(graph, samples, gamma, nu, eta, tol=1e-6, max_iter=500):
    g = diffuse(graph, _gamma(graph, gamma))
    return siggm_with_diffusion(samples, g, nu, eta, tol=tol,
                                max_iter=max_iter)


def glasso(samples, nu, tol=1e-6, max_iter=500):
    return population_glasso(samples, nu, tol=tol, max_iter=max_iter)


def naive(samples, epsilon, labels=None):
    return naive_detect(samples, epsilon, labels=labels)


def component_rows(method, components, labels, degrees=None, p_values=None):
    """Table rows: label, size, region names, p-value and mean weighted degree.

    ``degrees`` are structural weighted degrees per node; when omitted the
    degree column is ``None``.
    """
    prefix = LABEL_PREFIX.get(method, "C")
    rows = []
    for k, comp in enumerate(components, start=1):
        idx = list(comp.members)
        rows.append({
            "label": f"{prefix}{k}",
            "size": len(idx),
            "members": idx,
            "regions": [labels[i] for i in idx],
            "p_value": None if p_values is None else float(p_values[k - 1]),
            "degree": None if degrees is None
            else float(np.mean(np.asarray(degrees)[idx])),
        })
    return rows
