"""Correlation-only subnetwork detection that ignores structural data."""

import warnings

import numpy as np
from scipy import stats

from .detect import MIN_COMPONENT, CandidateSet
from .errors import ParameterError
from .graph import connected_components
from .inference import _zstack


def pair_pvalues(samples):
    """Two-sided one-sample t-test p-values of each pair's z-scores against the grand mean.

    The reference value is the mean Fisher z over all unordered pairs and all
    subjects. Pairs whose z-scores have zero variance across subjects get
    ``p = 1``.

    Returns
    -------
    ndarray, shape (R, R)
        Symmetric, with ones on the diagonal.
    """
    z = _zstack(samples)
    n_sub, n = z.shape[:2]
    if n_sub < 3:
        raise ParameterError(f"need at least 3 subjects, got {n_sub}")
    iu, ju = np.triu_indices(n, 1)
    pairs = z[:, iu, ju]
    grand = pairs.mean()
    mean = pairs.mean(axis=0)
    sd = pairs.std(axis=0, ddof=1)
    p = np.ones(len(iu))
    ok = sd > 0
    if not np.all(ok):
        warnings.warn(f"{int((~ok).sum())} node pairs have zero variance "
                      "across subjects; their p-values are set to 1",
                      RuntimeWarning, stacklevel=2)
    t = (mean[ok] - grand) / (sd[ok] / np.sqrt(n_sub))
    p[ok] = 2 * stats.t.sf(np.abs(t), n_sub - 1)
    out = np.ones((n, n))
    out[iu, ju] = p
    out[ju, iu] = p
    return out


def naive_detect(samples, epsilon, labels=None):
    """Components of the graph linking pairs whose correlation departs from the average.

    Parameters
    ----------
    samples : list of SubjectSample
        At least three subjects.
    epsilon : float
        P-value threshold in (0, 1); an edge is kept iff ``p < epsilon``.
    labels : sequence of str, optional
        Region names carried into the result; defaults to index strings.

    Returns
    -------
    CandidateSet
        Components with at least 3 nodes. ``delta`` holds ``epsilon``.
    """
    epsilon = float(epsilon)
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    p = pair_pvalues(samples)
    adj = (p < epsilon).astype(float)
    np.fill_diagonal(adj, 0.0)
    comps = connected_components(adj, min_size=MIN_COMPONENT)
    if labels is None:
        labels = [str(i) for i in range(p.shape[0])]
    labels = tuple(str(x) for x in labels)
    return CandidateSet(epsilon, tuple(comps), labels)
