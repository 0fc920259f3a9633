import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from neurohotnet import (ConvergenceError, InfluenceGraph, InputError,
                         NumericalError, ParameterError, SubjectSample, glasso,
                         penalty_from_influence, pooled_covariance,
                         population_glasso, siggm_with_diffusion)
from neurohotnet.graph import connected_components
from neurohotnet.precision import objective

# exp(-0.5) to 30 significant digits
EXP_MINUS_HALF = 0.606530659712633423603799534991


def sample_covariance(rng, n, frames):
    x = rng.standard_normal((frames, n)) @ rng.normal(size=(n, n)) * 0.5
    x += rng.standard_normal((frames, n))
    return np.cov(x, rowvar=False)


def kkt_residual(S, K, P):
    W = np.linalg.inv(K)
    G = W - S
    off = ~np.eye(len(S), dtype=bool)
    active = off & (np.abs(K) >= 1e-8)
    zero = off & ~active
    r_active = np.abs(G - P * np.sign(K))[active]
    r_zero = np.maximum(np.abs(G) - P, 0)[zero]
    r_diag = np.abs(np.diag(G))
    return max(r_active.max(initial=0), r_zero.max(initial=0), r_diag.max())


def soft(x, t):
    return math.copysign(max(abs(x) - t, 0.0), x)


# pooled_covariance -------------------------------------------------------------

def test_single_subject_is_its_correlation():
    x = np.random.default_rng(0).normal(3, 2, (50, 4))
    S = pooled_covariance([SubjectSample.from_signals(x)])
    assert np.allclose(S, np.corrcoef(x, rowvar=False), atol=1e-12)


def test_two_subjects_average():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(40, 5)), rng.normal(size=(40, 5))
    S = pooled_covariance([SubjectSample.from_signals(x),
                           SubjectSample.from_signals(y)])
    ref = (np.corrcoef(x, rowvar=False) + np.corrcoef(y, rowvar=False)) / 2
    assert np.allclose(S, ref, atol=1e-12)
    assert np.allclose(np.diag(S), 1.0, atol=1e-12)
    assert np.linalg.eigvalsh(S).min() > -1e-10


def test_pooled_covariance_needs_signals():
    with pytest.raises(InputError):
        pooled_covariance([SubjectSample(np.eye(3))])
    with pytest.raises(InputError):
        pooled_covariance([])


# penalty_from_influence ------------------------------------------------------------

def influence(m):
    m = np.asarray(m, dtype=float)
    return InfluenceGraph(tuple(str(i) for i in range(len(m))), m)


def test_eta_zero_is_uniform():
    g = influence([[0, 0.2, 0.1], [0.2, 0, 0.4], [0.1, 0.4, 0]])
    pen = penalty_from_influence(g, 0.3, 0.0)
    assert np.all(pen[~np.eye(3, dtype=bool)] == 0.3)
    assert np.all(np.diag(pen) == 0)


def test_penalty_extremes_and_midpoint():
    g = influence([[0, 0.1, 0.3], [0.1, 0, 0.2], [0.3, 0.2, 0]])
    pen = penalty_from_influence(g, 2.0, 1.0)
    assert pen[0, 2] == pytest.approx(2.0 * math.exp(-1.0), rel=1e-15)
    assert pen[0, 1] == 2.0
    assert pen[1, 2] == pytest.approx(2.0 * EXP_MINUS_HALF, rel=1e-15)


def test_constant_influence_gives_uniform_penalty():
    g = influence(np.full((3, 3), 0.2) - 0.2 * np.eye(3))
    pen = penalty_from_influence(g, 0.4, 3.0)
    assert np.all(pen[~np.eye(3, dtype=bool)] == 0.4)


@pytest.mark.parametrize("nu, eta", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_penalty_parameter_errors(nu, eta):
    with pytest.raises(ParameterError):
        penalty_from_influence(influence(np.zeros((2, 2))), nu, eta)


# glasso -----------------------------------------------------------------------

def test_diagonal_covariance():
    S = np.diag([0.5, 2.0, 4.0])
    est = glasso(S, 0.1)
    assert np.allclose(est.K, np.diag([2.0, 0.5, 0.25]), atol=1e-12)
    assert est.components == () and est.n_edges() == 0


@pytest.mark.parametrize("method", ["newton", "bcd"])
@pytest.mark.parametrize("rho, lam", [(0.5, 0.1), (-0.7, 0.3), (0.4, 0.4),
                                      (0.2, 0.35), (0.9, 0.05)])
def test_two_by_two_soft_threshold(method, rho, lam):
    S = np.array([[1.0, rho], [rho, 1.0]])
    w12 = soft(rho, lam)
    K_ref = np.linalg.inv([[1.0, w12], [w12, 1.0]])
    K = glasso(S, lam, tol=1e-10, method=method).K
    assert np.allclose(K, K_ref, atol=1e-6, rtol=0)
    if lam >= abs(rho):
        assert K[0, 1] == 0.0


def test_two_by_two_closed_form_is_the_maximiser():
    rho, lam = 0.6, 0.15
    S = np.array([[1.0, rho], [rho, 1.0]])
    P = np.full((2, 2), lam)

    def neg(v):
        K = np.array([[v[0], v[2]], [v[2], v[1]]])
        return -objective(K, S, P) if np.all(np.linalg.eigvalsh(K) > 0) else 1e9

    best = optimize.minimize(neg, [1.0, 1.0, 0.0], method="Nelder-Mead",
                             options={"xatol": 1e-10, "fatol": 1e-14,
                                      "maxiter": 20000})
    w12 = soft(rho, lam)
    K_ref = np.linalg.inv([[1.0, w12], [w12, 1.0]])
    assert np.allclose(best.x, [K_ref[0, 0], K_ref[1, 1], K_ref[0, 1]],
                       atol=1e-5)


def test_large_penalty_gives_diagonal():
    rng = np.random.default_rng(2)
    S = sample_covariance(rng, 8, 40)
    est = glasso(S, 1e3)
    assert est.n_edges() == 0 and est.components == ()
    assert np.allclose(np.diag(est.K), 1 / np.diag(S), rtol=1e-10)


@pytest.mark.parametrize("method", ["newton", "bcd"])
@pytest.mark.parametrize("seed", range(20))
def test_kkt_and_monotone_ascent(method, seed):
    rng = np.random.default_rng(seed)
    S = sample_covariance(rng, 15, 30 + seed)
    P = rng.uniform(0.02, 0.4, (15, 15))
    P = (P + P.T) / 2
    est = glasso(S, P, tol=1e-7, method=method)
    assert kkt_residual(S, est.K, est.penalty) <= 1e-5
    trace = np.array(est.objective)
    assert np.all(np.diff(trace) >= -1e-10 * np.maximum(1, np.abs(trace[1:])))
    assert np.linalg.eigvalsh(est.K).min() > 0
    assert np.array_equal(est.K, est.K.T) or np.allclose(est.K, est.K.T, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5))
@settings(max_examples=20)
def test_support_is_symmetric(seed, lam):
    S = sample_covariance(np.random.default_rng(seed), 10, 25)
    s = glasso(S, lam).support()
    assert np.array_equal(s, s.T)


def screened_partition(S, nu, min_size=1):
    adj = (np.abs(S) > nu).astype(float)
    np.fill_diagonal(adj, 0)
    return [c.members for c in connected_components(adj, min_size)]


@pytest.mark.parametrize("seed", range(5))
def test_components_follow_covariance_screening(seed):
    # the support's components are those of the graph |S[j, k]| > nu, so
    # they merge monotonically as nu decreases
    S = sample_covariance(np.random.default_rng(seed), 12, 40)
    top = np.abs(S[~np.eye(12, dtype=bool)]).max()
    previous = None
    for nu in np.linspace(1.05, 0.02, 12) * top:
        est = glasso(S, nu, tol=1e-9, min_component=1)
        parts = [c.members for c in est.components]
        assert parts == screened_partition(S, nu)
        if previous is not None:
            for c in previous:
                assert any(set(c) <= set(d) for d in parts)
        previous = parts
    assert glasso(S, 1.05 * top).n_edges() == 0


def test_edge_count_can_grow_with_nu():
    # the penalised path is not monotone edge by edge: three pairs enter
    # between these two values although both solutions are exact
    S = sample_covariance(np.random.default_rng(1), 12, 40)
    a = glasso(S, 0.03, tol=1e-10)
    b = glasso(S, 0.1, tol=1e-10)
    assert kkt_residual(S, a.K, a.penalty) < 1e-9
    assert kkt_residual(S, b.K, b.penalty) < 1e-9
    assert b.n_edges() > a.n_edges()
    assert (b.support() & ~a.support()).sum() == 6


def test_methods_agree():
    rng = np.random.default_rng(3)
    S = sample_covariance(rng, 15, 40)
    for diag in (False, True):
        a = glasso(S, 0.05, tol=1e-9, penalize_diagonal=diag, method="newton").K
        b = glasso(S, 0.05, tol=1e-9, penalize_diagonal=diag, method="bcd").K
        assert np.allclose(a, b, atol=1e-6)


def test_penalised_diagonal_shrinks_precision():
    S = sample_covariance(np.random.default_rng(4), 6, 30)
    a = glasso(S, 0.1).K
    b = glasso(S, 0.1, penalize_diagonal=True).K
    assert np.all(np.diag(b) < np.diag(a))
    # with the diagonal penalised the stationarity condition moves S to S + P
    W = np.linalg.inv(b)
    assert np.allclose(np.diag(W), np.diag(S) + 0.1, atol=1e-5)


def test_support_components():
    S = np.eye(7)
    for a, b in [(0, 1), (1, 2), (0, 2), (4, 5)]:
        S[a, b] = S[b, a] = 0.4
    est = glasso(S, 0.05, min_component=3)
    assert [c.members for c in est.components] == [(0, 1, 2)]


def test_non_psd_covariance_rejected():
    S = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NumericalError):
        glasso(S, 0.1)


def test_singular_covariance_is_jittered():
    x = np.random.default_rng(5).normal(size=(3, 5))
    S = np.cov(x, rowvar=False)
    est = glasso(S, 0.2)
    assert np.all(np.isfinite(est.K))


@pytest.mark.parametrize("S", [np.array([[0.0, 0], [0, 1]]),
                               np.array([[1.0, 0.2], [0.3, 1]])])
def test_invalid_covariance(S):
    with pytest.raises((InputError, ValueError)):
        glasso(S, 0.1)


def test_invalid_penalty_and_method():
    S = np.eye(3)
    with pytest.raises(ParameterError):
        glasso(S, -0.1)
    with pytest.raises(ParameterError):
        glasso(S, np.ones((2, 2)))
    with pytest.raises(ParameterError):
        glasso(S, 0.1, method="admm")


def test_non_convergence_carries_iterate():
    S = sample_covariance(np.random.default_rng(6), 15, 20)
    with pytest.raises(ConvergenceError) as info:
        glasso(S, 1e-3, tol=1e-12, max_iter=1, method="bcd")
    err = info.value
    assert err.iterate.shape == (15, 15) and err.iterations == 1
    assert err.residual > 0


# population pipelines ------------------------------------------------------------

def subjects(seed, n=8, count=5, frames=50):
    rng = np.random.default_rng(seed)
    mix = np.eye(n) + 0.4 * np.diag(np.ones(n - 1), 1)
    return [SubjectSample.from_signals(rng.standard_normal((frames, n)) @ mix)
            for _ in range(count)]


def test_eta_zero_reduces_to_population_glasso():
    samples = subjects(7)
    u = np.triu(np.random.default_rng(8).uniform(0, 1, (8, 8)), 1)
    g = influence(u + u.T)
    a = population_glasso(samples, 0.05).K
    b = siggm_with_diffusion(samples, g, 0.05, 0.0).K
    assert np.array_equal(a, b)


def test_structure_consistent_edge_survives():
    # two pairs with the same correlation; only one is backed by influence
    S = np.eye(4)
    S[0, 1] = S[1, 0] = S[2, 3] = S[3, 2] = 0.3
    g = influence([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
    pen = penalty_from_influence(g, 0.5, 2.0)
    K = glasso(S, pen).K
    assert abs(K[0, 1]) > 0.1 and K[2, 3] == 0.0
    assert glasso(S, 0.5).n_edges() == 0


def test_siggm_dimension_mismatch():
    with pytest.raises(InputError):
        siggm_with_diffusion(subjects(9), influence(np.zeros((3, 3))), 0.1, 1.0)


def test_population_glasso_invalid_nu():
    with pytest.raises(ParameterError):
        population_glasso(subjects(10), 0.0)
