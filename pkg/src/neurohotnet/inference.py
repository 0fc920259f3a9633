"""Combined permutation tests of within-component functional connectivity.

Each candidate component ``V`` is tested for

    H0: C[a, b] = 0 for all a, b in V   vs   H1: C[a, b] != 0 for some pair

with the statistic ``S = mean_{i, {a,b} in V} atanh(C_i[a, b])``: the mean
Fisher z-score over subjects and unordered pairs. The null distribution is
built by relabelling the nodes of every subject's correlation matrix with an
independent uniform permutation, which keeps each matrix a valid correlation
matrix while breaking the link between values and regions.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import _random
from .errors import InputError, ParameterError, StructureError
from .graph import NodeSet, check_symmetric

FISHER_CLAMP = 1.0 - 1e-7
# |r| may overshoot 1 by floating-point noise in computed correlations
_R_SLACK = 1e-12
# relative slack when comparing null statistics to the observed one, so that
# exact ties (e.g. a component spanning every node) are not lost to
# summation-order rounding
_TIE_RTOL = 1e-10
MIN_PERMUTATIONS = 100
NULL_MODES = ("relabel", "rows-only")


def fisher_z(r):
    """Fisher z-transform with ``|r|`` clamped to ``1 - 1e-7``.

    Accepts scalars or arrays. Values with ``|r| > 1`` are rejected.
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(np.abs(r) > 1.0 + _R_SLACK) or np.any(np.isnan(r)):
        raise InputError("correlations must lie in [-1, 1]")
    z = np.arctanh(np.clip(r, -FISHER_CLAMP, FISHER_CLAMP))
    return float(z) if z.ndim == 0 else z


def pearson(signals):
    """Pearson correlations between the columns of a (T, R) signal matrix."""
    x = np.asarray(signals, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InputError("signals must be a (T, R) matrix with T >= 2")
    x = x - x.mean(axis=0)
    norm = np.sqrt(np.einsum("tr,tr->r", x, x))
    if np.any(norm == 0):
        bad = np.flatnonzero(norm == 0)[:5].tolist()
        raise InputError(f"constant signal in columns {bad}")
    x = x / norm
    c = x.T @ x
    c = (c + c.T) / 2
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return c


@dataclass(frozen=True, eq=False)
class SubjectSample:
    """One participant's correlation matrix, optionally with its signals."""

    correlations: np.ndarray = field(repr=False)
    signals: np.ndarray = field(default=None, repr=False)
    subject_id: str = ""

    def __post_init__(self):
        c = np.array(check_symmetric(self.correlations, "correlations"),
                     dtype=np.float64)
        if np.any(np.abs(c) > 1.0 + _R_SLACK):
            raise InputError(f"subject {self.subject_id!r}: |correlation| > 1")
        if np.any(np.abs(np.diag(c) - 1.0) > 1e-9):
            raise InputError(f"subject {self.subject_id!r}: diagonal is not 1")
        np.clip(c, -1.0, 1.0, out=c)
        np.fill_diagonal(c, 1.0)
        c.setflags(write=False)
        object.__setattr__(self, "correlations", c)
        if self.signals is not None:
            s = np.array(self.signals, dtype=np.float64)
            if s.ndim != 2 or s.shape[1] != c.shape[0]:
                raise InputError("signals do not match correlation dimension")
            s.setflags(write=False)
            object.__setattr__(self, "signals", s)

    @classmethod
    def from_signals(cls, signals, subject_id=""):
        return cls(pearson(signals), signals, subject_id)

    @property
    def n_nodes(self):
        return self.correlations.shape[0]


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    component: NodeSet
    statistic: float
    p_value: float
    permutations: int
    selected: bool = False
    method: str = "permutation"


def _stack(samples):
    if len(samples) == 0:
        raise InputError("at least one subject is required")
    n = samples[0].n_nodes
    for s in samples:
        if s.n_nodes != n:
            raise StructureError(
                f"subject {s.subject_id!r} has {s.n_nodes} nodes, expected {n}")
    return np.stack([s.correlations for s in samples])


def _zstack(samples):
    return fisher_z(_stack(samples))


def _check_component(component, n, min_size=2):
    if not isinstance(component, NodeSet):
        component = NodeSet(tuple(component))
    component.check_bounds(n)
    if len(component) < min_size:
        raise ParameterError(
            f"component needs at least {min_size} nodes, got {len(component)}")
    return component


def _canonical(x):
    """Relabel nodes into an order determined by the data values alone.

    Nodes are sorted by their row of the subject-averaged matrix, itself
    sorted, compared lexicographically (ties keep index order). Tests run in
    this order, so relabelling the nodes of every subject and of the
    components leaves statistics and p-values bitwise unchanged.

    Returns the relabelled stack and the map from node index to position.
    """
    keys = np.sort(x.mean(axis=0), axis=1)
    order = np.lexsort(keys.T[::-1])
    position = np.empty_like(order)
    position[order] = np.arange(len(order))
    return x[:, order[:, None], order[None, :]], position


class _Component:
    """Pair index arrays for one component, reused across replicates."""

    def __init__(self, component, position):
        self.component = component
        idx = np.sort(position[component.indices])
        iu, ju = np.triu_indices(len(idx), 1)
        self.a = idx[iu]
        self.b = idx[ju]
        self.count = len(iu)

    def mean(self, x):
        return x[:, self.a, self.b].sum() / (x.shape[0] * self.count)


def _prepare(x, components):
    x, position = _canonical(x)
    comps = [_Component(_check_component(c, x.shape[1]), position)
             for c in components]
    return x, comps


def component_statistic(samples, component):
    """Mean Fisher z over subjects and unordered node pairs of ``component``."""
    z, (comp,) = _prepare(_zstack(samples), [component])
    return float(comp.mean(z))


def _null_block(z, comps, seed, start, stop, null):
    n_sub, n = z.shape[:2]
    rows = np.arange(n_sub)[:, None]
    base = np.broadcast_to(np.arange(n), (n_sub, n))
    out = np.empty((stop - start, len(comps)))
    for j, b in enumerate(range(start, stop)):
        perm = _random.substream(seed, _random.PERMUTATION, b).permuted(
            base, axis=1)
        for k, c in enumerate(comps):
            if null == "relabel":
                vals = z[rows, perm[:, c.a], perm[:, c.b]]
            else:
                vals = z[rows, perm[:, c.a], c.b[None, :]]
            out[j, k] = vals.sum() / (n_sub * c.count)
    return out


def _null_stats(z, comps, B, seed, null, threads):
    if null not in NULL_MODES:
        raise ParameterError(f"null must be one of {NULL_MODES}, got {null!r}")
    threads = max(1, int(threads))
    if not comps or B == 0:
        return np.empty((B, len(comps)))
    bounds = np.linspace(0, B, min(threads, B) + 1).astype(int)
    blocks = list(zip(bounds[:-1], bounds[1:]))
    if len(blocks) == 1:
        return _null_block(z, comps, seed, 0, B, null)
    with ThreadPoolExecutor(len(blocks)) as ex:
        parts = list(ex.map(
            lambda se: _null_block(z, comps, seed, se[0], se[1], null),
            blocks))
    return np.concatenate(parts, axis=0)


def null_statistics(samples, components, permutations, seed, null="relabel",
                    threads=1):
    """Null statistics for several components from shared relabellings.

    Returns an array of shape ``(permutations, len(components))``. Replicate
    ``b`` uses substream ``b`` of the master seed, so the result does not
    depend on ``threads``. Node relabellings are drawn in the data-determined
    order of :func:`_canonical`.
    """
    z, comps = _prepare(_zstack(samples), components)
    return _null_stats(z, comps, int(permutations), seed, null, threads)


def permutation_tests(samples, components, permutations=10_000, seed=0,
                      null="relabel", threads=1):
    """Permutation test for every component, sharing the null relabellings.

    Parameters
    ----------
    samples : list of SubjectSample
    components : iterable of NodeSet
        Candidate components, selected without looking at ``samples``.
    permutations : int
        Number of replicates ``B`` (at least 100).
    seed : int
        Unsigned 64-bit master seed.
    null : {"relabel", "rows-only"}
        ``"relabel"`` permutes rows and columns together; ``"rows-only"``
        permutes rows alone and is kept only for comparison.
    threads : int
        Worker threads for the replicate loop.

    Returns
    -------
    list of TestResult
        ``p = (1 + #{|S0| >= |S_obs|}) / (B + 1)``; nothing is selected yet.
    """
    B = int(permutations)
    if B < MIN_PERMUTATIONS:
        raise ParameterError(
            f"need at least {MIN_PERMUTATIONS} permutations, got {B}")
    components = list(components)
    if not components:
        return []
    z, comps = _prepare(_zstack(samples), components)
    observed = np.array([c.mean(z) for c in comps])
    null_stats = _null_stats(z, comps, B, seed, null, threads)
    cut = np.abs(observed) * (1.0 - _TIE_RTOL)
    exceed = (np.abs(null_stats) >= cut[None, :]).sum(axis=0)
    return [
        TestResult(c.component, float(s), float((1 + int(e)) / (B + 1)), B)
        for c, s, e in zip(comps, observed, exceed)
    ]


def permutation_test(samples, component, permutations=10_000, seed=0,
                     null="relabel", threads=1):
    """Permutation test of one component; see :func:`permutation_tests`."""
    return permutation_tests(samples, [component], permutations, seed, null,
                             threads)[0]


def select(results, alpha=0.05):
    """Flag results with ``p < alpha / len(results)``."""
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    results = list(results)
    if not results:
        return []
    cut = alpha / len(results)
    return [replace(r, selected=bool(r.p_value < cut)) for r in results]


def paired_t_pvalue(observed, null):
    """Two-sided paired t-test p-value and statistic.

    Identical samples give ``t = 0, p = 1``; a constant nonzero shift gives an
    infinite statistic and the smallest positive p-value.
    """
    d = np.asarray(observed, dtype=np.float64) - np.asarray(null, dtype=np.float64)
    n = d.size
    if n < 3:
        raise ParameterError(f"paired t-test needs at least 3 subjects, got {n}")
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0:
        if mean == 0:
            return 0.0, 1.0
        return float(np.sign(mean) * np.inf), float(np.finfo(float).tiny)
    t = mean / (sd / np.sqrt(n))
    p = 2 * stats.t.sf(abs(t), n - 1)
    return float(t), float(min(1.0, max(p, np.finfo(float).tiny)))


def ttest_variant(samples, component, permutations=1, seed=0):
    """Paired t-test of observed against relabelled within-component correlation.

    For each subject the mean absolute correlation over unordered pairs of
    ``component`` is compared with the same quantity after a random node
    relabelling. ``permutations`` relabellings are averaged per subject; the
    default is a single relabelled replicate.

    The test is two-sided, so a component whose correlations are weaker than
    those of a random node set can also reach a small p-value; its
    ``statistic`` (the t value) is then negative.
    """
    c = _stack(samples)
    n_sub, n = c.shape[:2]
    if n_sub < 3:
        raise ParameterError(f"t-test variant needs at least 3 subjects, got {n_sub}")
    B = int(permutations)
    if B < 1:
        raise ParameterError("permutations must be >= 1")
    a, (comp,) = _prepare(np.abs(c), [component])
    observed = a[:, comp.a, comp.b].mean(axis=1)
    rows = np.arange(n_sub)[:, None]
    base = np.broadcast_to(np.arange(n), (n_sub, n))
    null = np.zeros(n_sub)
    for b in range(B):
        perm = _random.substream(seed, _random.TTEST, b).permuted(base, axis=1)
        null += a[rows, perm[:, comp.a], perm[:, comp.b]].mean(axis=1)
    null /= B
    t, p = paired_t_pvalue(observed, null)
    return TestResult(comp.component, t, p, B, method="ttest")
