"""Seeded simulation laboratory: ground-truth graphs, subject data, benchmarks.

Study 1 compares how often each method recovers the components of a random
structural graph from noisy multi-subject signals. Study 2 times the two
diffusion-based pipelines across graph sizes.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _random
from .errors import ConvergenceError, NeuroHotnetError, ParameterError
from .graph import WeightedGraph, check_symmetric, connected_components
from .inference import SubjectSample, pearson

METHODS = ("neurohotnet", "siggm-diffusion", "glasso", "naive")
STRUCTURE_INFORMED = ("neurohotnet", "siggm-diffusion")


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one simulation run.

    ``signal_sd`` has no published value and defaults to a stand-in.
    ``gamma`` may be ``"auto"`` to use the mean weighted degree of each
    generated graph.
    """

    R: int = 120
    density: float = 0.3
    min_component: int = 8
    subjects: int = 308
    frames: int = 284
    signal_mean: float = 9600.0
    signal_sd: float = 400.0
    noise_sd: float = 120.0
    trials: int = 200
    seed: int = 0
    gamma: object = 30.0
    delta: float = 1.8e-3
    nu: float = 2.5e-4
    eta: float = 1.0
    epsilon: float = 8e-4
    alpha: float = 0.05
    permutations: int = 1000
    test_method: str = "permutation"
    glasso_tol: float = 1e-6
    glasso_max_iter: int = 500

    def __post_init__(self):
        if not 0 < self.density < 1:
            raise ParameterError(f"density must lie in (0, 1), got {self.density}")
        for name in ("R", "min_component", "subjects", "frames", "trials"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if self.signal_sd < 0 or self.noise_sd < 0:
            raise ParameterError("standard deviations must be nonnegative")
        if not (self.gamma == "auto" or float(self.gamma) > 0):
            raise ParameterError(f"gamma must be positive or 'auto', got {self.gamma}")

    def to_dict(self):
        return asdict(self)


@dataclass
class SimResult:
    """Outcome of a simulation study.

    ``recovery`` maps method name to ``{"mean", "half_width", "n"}``;
    ``timings`` maps method name to mean seconds (per trial, or per size for
    Study 2); ``trials`` holds per-trial component lists.
    """

    config: dict
    recovery: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    trials: list = field(default_factory=list)
    failed: dict = field(default_factory=dict)
    sizes: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def to_dict(self, timings=True):
        d = {
            "config": self.config,
            "recovery": self.recovery,
            "failed": self.failed,
            "trials": self.trials,
        }
        if self.sizes:
            d["sizes"] = self.sizes
        if timings:
            d["timings"] = self.timings
            d["slopes"] = self.slopes
        return d


def generate_truth(R, density, min_component, seed):
    """Random symmetric graph with Bernoulli(density) edges and Uniform(0, 1) weights.

    Edges of components smaller than ``min_component`` are removed, leaving
    those nodes isolated. ``seed`` may be an int or a numpy Generator.
    """
    R = int(R)
    if not 0 <= density <= 1:
        raise ParameterError(f"density must lie in [0, 1], got {density}")
    rng = seed if isinstance(seed, np.random.Generator) else \
        np.random.default_rng(seed)
    iu, ju = np.triu_indices(R, 1)
    present = rng.random(len(iu)) < density
    weights = rng.uniform(0.0, 1.0, len(iu))
    # Uniform(0, 1) can return exactly 0; keep every drawn edge present
    weights = np.where(weights > 0, weights, np.nextafter(0.0, 1.0))
    w = np.zeros((R, R))
    w[iu[present], ju[present]] = weights[present]
    w = w + w.T
    keep = np.zeros(R, dtype=bool)
    for c in connected_components(w, min_size=max(1, int(min_component))):
        keep[c.indices] = True
    w[~keep, :] = 0.0
    w[:, ~keep] = 0.0
    labels = [f"n{i:0{len(str(R - 1))}d}" for i in range(R)]
    return WeightedGraph(labels, w)


def nearest_correlation(A, tol=1e-8, max_iter=200):
    """Nearest correlation matrix in the Frobenius norm.

    Alternating projections onto the positive semidefinite cone and the
    unit-diagonal affine set, with Dykstra's correction on the cone step.
    Iteration stops once the relative changes of both iterates and their
    relative gap all fall below ``tol``. The result has its eigenvalues
    floored at 1e-12 and is rescaled to an exactly unit diagonal.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations do not reach ``tol``.
    """
    a = np.array(check_symmetric(A, "A"), dtype=np.float64)
    a = (a + a.T) / 2
    y = a.copy()
    x = a.copy()
    ds = np.zeros_like(a)
    resid = np.inf
    for it in range(1, int(max_iter) + 1):
        r = y - ds
        w, v = np.linalg.eigh(r)
        x_new = (v * np.maximum(w, 0.0)) @ v.T
        x_new = (x_new + x_new.T) / 2
        ds = x_new - r
        y_new = x_new.copy()
        np.fill_diagonal(y_new, 1.0)
        resid = max(
            np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300),
            np.linalg.norm(y_new - y) / max(np.linalg.norm(y_new), 1e-300),
            np.linalg.norm(y_new - x_new) / max(np.linalg.norm(y_new), 1e-300),
        )
        x, y = x_new, y_new
        if resid <= tol:
            break
    else:
        raise ConvergenceError(
            f"nearest correlation did not converge in {max_iter} iterations "
            f"(residual {resid:.3g})", iterate=y, residual=float(resid),
            iterations=int(max_iter))
    w, v = np.linalg.eigh(y)
    y = (v * np.maximum(w, 1e-12)) @ v.T
    d = 1.0 / np.sqrt(np.diag(y))
    y = y * d[:, None] * d[None, :]
    y = (y + y.T) / 2
    np.fill_diagonal(y, 1.0)
    return y


def truth_correlation(truth, tol=1e-8, max_iter=1000):
    """Weights scaled by their maximum, unit diagonal, projected to a correlation matrix."""
    w = np.asarray(truth.weights)
    top = np.max(np.abs(w))
    rho = w / top if top > 0 else np.zeros_like(w)
    np.fill_diagonal(rho, 1.0)
    return nearest_correlation(rho, tol=tol, max_iter=max_iter)


def _sqrt_psd(c):
    w, v = np.linalg.eigh(c)
    return v * np.sqrt(np.maximum(w, 0.0))


def generate_subjects(truth, cfg, seed=None):
    """Simulated subjects whose signal correlations follow the truth graph.

    The scaled truth weights are projected to the nearest correlation matrix
    ``c``; the signal covariance is ``sigma sigma^T * c`` with a common
    per-region standard deviation ``cfg.signal_sd``. Each subject gets
    ``cfg.frames`` frames of Gaussian signal with mean ``cfg.signal_mean``
    plus independent N(0, noise_sd^2) noise per region and frame.

    ``seed`` (int or Generator) defaults to ``cfg.seed``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else \
        np.random.default_rng(cfg.seed if seed is None else seed)
    c = truth_correlation(truth)
    R = c.shape[0]
    sigma = np.full(R, float(cfg.signal_sd))
    factor = _sqrt_psd(np.outer(sigma, sigma) * c)
    out = []
    for i in range(int(cfg.subjects)):
        z = rng.standard_normal((int(cfg.frames), R))
        x = cfg.signal_mean + z @ factor.T
        if cfg.noise_sd > 0:
            x = x + cfg.noise_sd * rng.standard_normal(x.shape)
        out.append(SubjectSample(pearson(x), x, f"sim{i:04d}"))
    return out


def recovery_rate(truth_components, estimated):
    """Fraction of truth components matched by an estimate within 2 differing nodes.

    Pairs are matched greedily by smallest symmetric difference (ties by
    smallest member index of the truth, then of the estimate), and each
    estimated component is used at most once. Returns NaN when there are no
    truth components.
    """
    truth_components = list(truth_components)
    estimated = list(estimated)
    if not truth_components:
        return float("nan")
    cand = []
    for i, t in enumerate(truth_components):
        for j, e in enumerate(estimated):
            d = t.symmetric_difference(e)
            if d <= 2:
                cand.append((d, min(t.members, default=-1),
                             min(e.members, default=-1), i, j))
    cand.sort()
    used_t, used_e = set(), set()
    for _, _, _, i, j in cand:
        if i in used_t or j in used_e:
            continue
        used_t.add(i)
        used_e.add(j)
    return len(used_t) / len(truth_components)


def _components_for(method, truth, samples, cfg, gamma, seed):
    from . import pipelines

    if method == "neurohotnet":
        rep = pipelines.neurohotnet(
            truth, samples, gamma=gamma, delta=cfg.delta, alpha=cfg.alpha,
            permutations=cfg.permutations, seed=seed,
            test_method=cfg.test_method)
        return [r.component for r in rep.results if r.selected]
    if method == "siggm-diffusion":
        est = pipelines.siggm_diffusion(
            truth, samples, gamma=gamma, nu=cfg.nu, eta=cfg.eta,
            tol=cfg.glasso_tol, max_iter=cfg.glasso_max_iter)
        return list(est.components)
    if method == "glasso":
        from .precision import population_glasso
        est = population_glasso(samples, cfg.nu, tol=cfg.glasso_tol,
                                max_iter=cfg.glasso_max_iter)
        return list(est.components)
    if method == "naive":
        from .baselines import naive_detect
        return list(naive_detect(samples, cfg.epsilon))
    raise ParameterError(f"unknown method {method!r}")


def _resolve_gamma(cfg, truth):
    from .diffusion import suggest_gamma

    if cfg.gamma == "auto":
        return suggest_gamma(truth)
    return float(cfg.gamma)


def _trial(cfg, t, methods):
    rng = _random.substream(cfg.seed, _random.TRIAL, t)
    truth = generate_truth(cfg.R, cfg.density, cfg.min_component, rng)
    samples = generate_subjects(truth, cfg, rng)
    truth_comps = connected_components(truth.weights, cfg.min_component)
    perm_seed = int(rng.integers(0, 2**63))
    gamma = _resolve_gamma(cfg, truth)
    record = {"trial": t, "gamma": gamma,
              "truth": [list(c.members) for c in truth_comps],
              "methods": {}}
    times = {}
    for m in methods:
        start = time.perf_counter()
        try:
            est = _components_for(m, truth, samples, cfg, gamma, perm_seed)
        except NeuroHotnetError as exc:
            record["methods"][m] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        finally:
            times[m] = time.perf_counter() - start
        rate = recovery_rate(truth_comps, est)
        matched = [list(e.members) for e in est
                   if any(e.symmetric_difference(c) <= 2 for c in truth_comps)]
        record["methods"][m] = {
            "recovery": rate,
            "estimated": [list(e.members) for e in est],
            "matched": matched,
        }
    return record, times


def _summarise(values):
    v = np.asarray([x for x in values if np.isfinite(x)], dtype=float)
    if v.size == 0:
        return {"mean": float("nan"), "half_width": float("nan"), "n": 0}
    half = 1.96 * v.std(ddof=1) / np.sqrt(v.size) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "half_width": float(half),
            "n": int(v.size)}


def run_study1(cfg, methods=METHODS, threads=1):
    """Recovery-rate comparison over ``cfg.trials`` independent trials.

    Each trial draws a fresh truth graph and subject set from its own
    substream of ``cfg.seed``, so results do not depend on ``threads``.
    Trials in which a method raises are excluded for that method and counted
    in ``failed``.
    """
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}")
    n = int(cfg.trials)
    threads = max(1, int(threads))
    if threads == 1:
        out = [_trial(cfg, t, methods) for t in range(n)]
    else:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(lambda t: _trial(cfg, t, methods), range(n)))
    result = SimResult(config=cfg.to_dict())
    for m in methods:
        rates = [rec["methods"][m].get("recovery", np.nan) for rec, _ in out]
        result.failed[m] = sum("error" in rec["methods"][m] for rec, _ in out)
        result.recovery[m] = _summarise(rates)
        result.timings[m] = float(np.mean([tm[m] for _, tm in out]))
    result.trials = [rec for rec, _ in out]
    return result


def loglog_slope(sizes, times):
    """Least-squares slope of log(time) against log(size)."""
    sizes = np.asarray(sizes, dtype=float)
    times = np.asarray(times, dtype=float)
    ok = (sizes > 0) & (times > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(sizes[ok]), np.log(times[ok]), 1)[0])


def run_study2(sizes, repeats, cfg):
    """Mean wall-clock time of the two diffusion pipelines for each graph size.

    One truth graph and subject set is generated per size; each pipeline is
    then run ``repeats`` times, serially. ``timings[method]`` holds lists of
    per-size ``mean`` seconds and 95% ``half_width``; ``slopes`` are the
    log-log slopes of the means against size.
    """
    from . import pipelines

    sizes = [int(s) for s in sizes]
    repeats = int(repeats)
    if repeats < 1 or not sizes:
        raise ParameterError("need at least one size and one repeat")
    result = SimResult(config=dict(cfg.to_dict(), sizes=sizes,
                                   repeats=repeats))
    timings = {m: {"mean": [], "half_width": []} for m in STRUCTURE_INFORMED}
    for k, R in enumerate(sizes):
        c = replace(cfg, R=R)
        rng = _random.substream(cfg.seed, _random.TRIAL, k)
        truth = generate_truth(R, c.density, c.min_component, rng)
        samples = generate_subjects(truth, c, rng)
        perm_seed = int(rng.integers(0, 2**63))
        gamma = _resolve_gamma(c, truth)
        nh, sg = [], []
        for _ in range(repeats):
            start = time.perf_counter()
            rep = pipelines.neurohotnet(
                truth, samples, gamma=gamma, delta=c.delta, alpha=c.alpha,
                permutations=c.permutations, seed=perm_seed,
                test_method=c.test_method)
            nh.append(time.perf_counter() - start)
            start = time.perf_counter()
            est = pipelines.siggm_diffusion(
                truth, samples, gamma=gamma, nu=c.nu, eta=c.eta,
                tol=c.glasso_tol, max_iter=c.glasso_max_iter)
            sg.append(time.perf_counter() - start)
        for m, t in zip(STRUCTURE_INFORMED, (nh, sg)):
            stat = _summarise(t)
            timings[m]["mean"].append(stat["mean"])
            timings[m]["half_width"].append(stat["half_width"])
        result.trials.append({
            "R": R,
            "gamma": gamma,
            "neurohotnet": [list(r.component.members) for r in rep.results
                            if r.selected],
            "siggm-diffusion": [list(x.members) for x in est.components],
        })
    result.sizes = sizes
    result.timings = timings
    result.slopes = {m: loglog_slope(sizes, t["mean"])
                     for m, t in timings.items()}
    return result
