import math

import numpy as np
import pytest

from robust_sysid.analysis import (
    BoundInputs,
    biquadratic_expectation,
    c_a,
    c_w,
    fourth_moment_sandwich,
    g_scalar,
    gramian,
    lambda_min,
    matrix_powers,
    scalar_fourth_moment_bound,
    steady_covariance,
    theorem_bound,
    variance_statistic,
)
from robust_sysid.errors import EtaTooLarge, JensenViolation
from robust_sysid.noise import NoiseSpec, make_rng
from robust_sysid.sim import LtiSystem, collect, random_stable_matrix

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])


def within_se(samples, expected, k):
    mean = samples.mean(axis=0)
    se = samples.std(axis=0) / math.sqrt(samples.shape[0])
    return np.all(np.abs(mean - expected) <= k * se + 1e-12)


@pytest.mark.parametrize("a,T,g", [(0.5, 3, 1.3125), (1.0, 5, 5.0), (0.0, 7, 1.0)])
def test_g_scalar(a, T, g):
    assert g_scalar(a, T) == g


def test_gramian_examples():
    np.testing.assert_allclose(gramian(0.5 * np.eye(2), 3), 1.3125 * np.eye(2))
    np.testing.assert_array_equal(gramian(NILPOTENT, 2), [[2.0, 0.0], [0.0, 1.0]])
    a = make_rng(1).standard_normal((3, 3))
    np.testing.assert_array_equal(gramian(a, 1), np.eye(3))


def test_steady_covariance():
    inputs = BoundInputs(np.zeros((2, 2)), 4, 1.0, 3.0, 10, 0.1)
    np.testing.assert_array_equal(steady_covariance(inputs), np.eye(2))
    inputs = BoundInputs(0.5 * np.eye(2), 3, 4.0, 48.0, 10, 0.1)
    np.testing.assert_allclose(steady_covariance(inputs), 5.25 * np.eye(2))


def test_c_a_examples():
    assert c_a(np.zeros((3, 3)), 4) == 1.0
    assert c_a(0.5 * np.eye(2), 3) == pytest.approx(1.0)
    assert c_a(NILPOTENT, 2) == pytest.approx(4.0)


def test_c_w_examples():
    assert c_w(1.0, 3.0) == 3.0
    spike = NoiseSpec.spike(0.04, 5.0)
    assert c_w(spike.variance(), spike.fourth_moment()) == pytest.approx(25.0)
    assert c_w(2.0, 4.0) == 1.0
    with pytest.raises(JensenViolation):
        c_w(2.0, 3.9)


def test_theorem_bound_examples():
    base = dict(a=[[0.7]], horizon=5, sigma2=1.0, sigma4t=3.0, n=1000)
    near_one = theorem_bound(BoundInputs(delta=1 - 1e-15, **base), "scalar_thm1")
    assert near_one.error_bound < 1e-6
    scalar = theorem_bound(BoundInputs(delta=0.05, **base), "scalar_thm1")
    vector = theorem_bound(BoundInputs(delta=0.05, **base), "vector_thm2")
    assert vector.error_bound == scalar.error_bound
    assert scalar.k_required == math.ceil(8 * math.log(20))
    assert vector.k_required == math.ceil(32 * math.log(20))

    inputs = BoundInputs(0.5 * np.eye(2), 10, 1.0, 25.0, 6000, 0.01, big_c=2.0)
    assert theorem_bound(inputs, "corrupted_thm3") == theorem_bound(inputs, "vector_thm2")


def test_theorem_bound_corrupted_terms():
    inputs = BoundInputs(0.5 * np.eye(2), 10, 1.0, 3.0, 6000, 0.01, eta=0.01, big_c=1.0)
    lam = lambda_min(gramian(0.5 * np.eye(2), 10))
    thm2 = theorem_bound(BoundInputs(0.5 * np.eye(2), 10, 1.0, 3.0, 6000, 0.01), "vector_thm2")
    thm3 = theorem_bound(inputs, "corrupted_thm3")
    assert thm3.error_bound == pytest.approx(thm2.error_bound + 2**1.5 * math.sqrt(0.01 / lam))
    assert thm3.k_required == math.ceil(32 * math.log(100) + 16 * 0.01 * 6000)
    assert thm3.m_required == math.ceil(4 * c_a(0.5 * np.eye(2), 10) * 3.0)
    with pytest.raises(EtaTooLarge):
        theorem_bound(BoundInputs(0.5 * np.eye(2), 10, 1.0, 3.0, 6000, 0.01, eta=0.1), "corrupted_thm3")


def test_scalar_theorem_rejects_matrix_system():
    with pytest.raises(ValueError):
        theorem_bound(BoundInputs(np.eye(2), 3, 1.0, 3.0, 10, 0.1), "scalar_thm1")


def test_sandwich_examples():
    assert fourth_moment_sandwich([[1.0]], 2.0, 7.0)[0, 0] == pytest.approx(7.0)
    np.testing.assert_allclose(fourth_moment_sandwich(np.eye(2), 1.5, 3 * 1.5**2), 4 * 1.5**2 * np.eye(2))


@pytest.mark.parametrize(
    "spec",
    [NoiseSpec.gaussian(0.8), NoiseSpec.spike(0.1, 2.0), NoiseSpec.student(10.0, 1.2)],
    ids=lambda s: s.kind,
)
def test_sandwich_monte_carlo(spec):
    rng = make_rng(21)
    m = rng.standard_normal((3, 3))
    n = spec.sample((1_000_000, 3), rng)
    quad = np.einsum("ni,ij,nj->n", n, m, n)
    samples = quad[:, None, None] * np.einsum("ni,nj->nij", n, n)
    expected = fourth_moment_sandwich(m, spec.variance(), spec.fourth_moment())
    assert within_se(samples, expected, 5)


def test_biquadratic_scalar_reduction():
    a, T, s2, s4t = 0.8, 6, 1.7, 11.0
    got = biquadratic_expectation([[a]], T, s2, s4t)[0, 0]
    by_expansion = sum(a ** (4 * t) * s4t for t in range(T)) + 3 * s2**2 * sum(
        a ** (2 * (t + s)) for t in range(T) for s in range(T) if s != t
    )
    assert got == pytest.approx(by_expansion, rel=1e-12)
    assert biquadratic_expectation([[1.0]], 2, 1.0, 3.0)[0, 0] == pytest.approx(12.0)


def test_biquadratic_monte_carlo_spike():
    a = np.array([[0.6, 0.3], [-0.2, 0.5]])
    spec = NoiseSpec.spike(0.1, 3.0)
    data = collect(LtiSystem(a), spec, 3, 1_000_000, 31)
    x = data.states[:, 3, :]
    samples = np.sum(x * x, axis=1)[:, None, None] * np.einsum("ni,nj->nij", x, x)
    assert within_se(samples, biquadratic_expectation(a, 3, spec.variance(), spec.fourth_moment()), 5)


def test_scalar_fourth_moment_bound():
    assert scalar_fourth_moment_bound(0.4, 1, 5.0) == 15.0
    assert scalar_fourth_moment_bound(1.0, 2, 3.0) == 36.0
    assert scalar_fourth_moment_bound(1.0, 2, 3.0) >= biquadratic_expectation([[1.0]], 2, 1.0, 3.0)[0, 0]


def _random_stable(rng, d):
    return random_stable_matrix(d, rng.uniform(0.1, 0.99), rng)


def test_gramian_dominates_identity():
    rng = make_rng(40)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        g = gramian(_random_stable(rng, d), int(rng.integers(1, 20)))
        assert lambda_min(g) >= 1 - 1e-10


def test_biquadratic_symmetric_psd_and_trace_bound():
    rng = make_rng(41)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        a = _random_stable(rng, d)
        T = int(rng.integers(1, 8))
        s2 = rng.uniform(0.5, 2.0)
        s4t = s2**2 * rng.uniform(1.0, 30.0)
        e = biquadratic_expectation(a, T, s2, s4t)
        np.testing.assert_allclose(e, e.T, atol=1e-12)
        eig = np.linalg.eigvalsh(e)
        assert eig.min() >= -1e-9 * np.trace(e)
        powers_sq = sum(np.linalg.norm(p, 2) ** 2 for p in matrix_powers(a, T))
        assert np.trace(e) <= 3 * d**2 * s4t * powers_sq**2 * (1 + 1e-12)


def test_variance_statistic_matches_definition():
    x = np.arange(12.0).reshape(3, 2, 2)
    mean = x.mean(axis=0)
    expected = np.mean([np.sum((xi - mean) ** 2) for xi in x])
    assert variance_statistic(x) == pytest.approx(expected)


@pytest.mark.parametrize("spec", [NoiseSpec.gaussian(), NoiseSpec.spike(0.04, 5.0), NoiseSpec.student(10.0)],
                         ids=lambda s: s.kind)
def test_scalar_fourth_moment_bound_monte_carlo(spec):
    a, T = 0.9, 6
    data = collect(LtiSystem([[a]]), spec, T, 1_000_000, 50)
    assert np.mean(data.states[:, T, 0] ** 4) <= scalar_fourth_moment_bound(a, T, spec.fourth_moment())


def _random_psd(rng, d, rank=None):
    g = rng.standard_normal((d, rank or d))
    return g @ g.T


def test_trace_inequalities():
    rng = make_rng(60)
    slack = 1 + 1e-9
    for _ in range(200):
        d = int(rng.integers(1, 6))
        a, b = _random_psd(rng, d), _random_psd(rng, d)
        assert np.trace(a @ b) <= np.trace(a) * np.trace(b) * slack
        assert np.trace(a) <= d * np.linalg.eigvalsh(a).max() * slack
        r1 = _random_psd(rng, d, rank=1)
        assert np.trace(r1 @ b) <= np.trace(r1) * np.linalg.eigvalsh(b).max() * slack
        assert np.trace(r1) ** 2 == pytest.approx(np.trace(r1 @ r1), rel=1e-9)


def test_variance_statistic_additivity():
    rng = make_rng(61)
    n = 100_000
    x1 = rng.standard_normal((n, 2, 2)) * np.array([[1.0, 2.0], [0.5, 3.0]])
    x2 = rng.standard_t(6, size=(n, 2, 2))
    dev = lambda x: np.sum((x - x.mean(axis=0)) ** 2, axis=(1, 2))
    total = dev(x1 + x2)
    expected = variance_statistic(x1) + variance_statistic(x2)
    assert variance_statistic(x1 + x2) == pytest.approx(total.mean(), rel=1e-12)
    assert abs(total.mean() - expected) <= 4 * total.std() / math.sqrt(n)
