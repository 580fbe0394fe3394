"""Closed-form quantities behind the error guarantees.

These are exact evaluations (Gramians, moment identities, bound shapes) used
both as run-time diagnostics and as oracles in the statistical tests. The
absolute constant in front of every error bound is unknown, so bounds take it
as an input (``big_c``) and are only meaningful up to that factor.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EtaTooLarge, JensenViolation
from .estimator import CORRUPTION_SURCHARGE, DEFAULT_K_CONSTANT
from .matlib import as_mat, spectral_norm, sym_eig_spectrum

THEOREMS = ("scalar_thm1", "vector_thm2", "corrupted_thm3")


def matrix_powers(a, horizon):
    """``[A^0, A^1, ..., A^(horizon-1)]`` by repeated multiplication."""
    a = as_mat(a)
    out = [np.eye(a.shape[0])]
    for _ in range(horizon - 1):
        out.append(out[-1] @ a)
    return out


def g_scalar(a, horizon):
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    total, p = 0.0, 1.0
    for _ in range(horizon):
        total += p * p
        p *= a
    return total


def gramian(a, horizon):
    """``G_T = sum_{t<T} A^t (A^t)^T``."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    powers = matrix_powers(a, horizon)
    g = np.zeros_like(powers[0])
    for p in powers:
        g += p @ p.T
    return g


def lambda_min(m):
    return float(sym_eig_spectrum(m)[-1])


def c_a(a, horizon):
    num = sum(spectral_norm(p) ** 2 for p in matrix_powers(a, horizon))
    return (num / lambda_min(gramian(a, horizon))) ** 2


def c_w(sigma2, sigma4t):
    """Kurtosis ``sigma4t / sigma2**2``."""
    if sigma4t < sigma2**2:
        raise JensenViolation(f"fourth moment {sigma4t} below variance squared {sigma2**2}")
    return sigma4t / sigma2**2


@dataclass(frozen=True, eq=False)
class BoundInputs:
    """Everything the error bounds depend on.

    ``k_constant`` (default 8 for the scalar theorem, 32 otherwise) and
    ``m_constant`` scale the bucket-count and bucket-size requirements.
    """

    a: np.ndarray
    horizon: int
    sigma2: float
    sigma4t: float
    n: int
    delta: float
    eta: float = 0.0
    big_c: float = 1.0
    k_constant: float | None = None
    m_constant: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", as_mat(self.a))
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 0.5)")
        if self.sigma4t < self.sigma2**2:
            raise JensenViolation("sigma4t must be at least sigma2**2")

    @property
    def d(self):
        return self.a.shape[0]


class Bound(NamedTuple):
    error_bound: float
    k_required: int
    m_required: int


def steady_covariance(inputs):
    """``E[x_T x_T^T] = sigma^2 G_T``."""
    return inputs.sigma2 * gramian(inputs.a, inputs.horizon)


def theorem_bound(inputs, which):
    if which not in THEOREMS:
        raise ValueError(f"which must be one of {THEOREMS}")
    log_term = math.log(1.0 / inputs.delta)
    kurt = c_w(inputs.sigma2, inputs.sigma4t)
    d = inputs.d
    if which == "scalar_thm1":
        if d != 1:
            raise ValueError("the scalar bound needs a 1 x 1 system")
        kc = inputs.k_constant or DEFAULT_K_CONSTANT["scalar"]
        g = g_scalar(float(inputs.a[0, 0]), inputs.horizon)
        err = inputs.big_c * math.sqrt(log_term / (inputs.n * g))
        return Bound(err, math.ceil(kc * log_term), math.ceil(inputs.m_constant * kurt))

    kc = inputs.k_constant or DEFAULT_K_CONSTANT["vector"]
    lam = lambda_min(gramian(inputs.a, inputs.horizon))
    m_req = math.ceil(inputs.m_constant * d**2 * c_a(inputs.a, inputs.horizon) * kurt)
    err = inputs.big_c * d**1.5 * math.sqrt(log_term / (inputs.n * lam))
    k_req = kc * log_term
    if which == "corrupted_thm3":
        limit = 0.5 / (inputs.m_constant * d**2 * c_a(inputs.a, inputs.horizon) * kurt)
        if inputs.eta >= limit and inputs.eta > 0:
            raise EtaTooLarge(f"eta={inputs.eta} must stay below {limit:.3g}")
        if inputs.eta > 0:
            err += inputs.big_c * d**1.5 * math.sqrt(inputs.eta / lam)
            k_req += CORRUPTION_SURCHARGE * inputs.eta * inputs.n
    return Bound(err, math.ceil(k_req), m_req)


def fourth_moment_sandwich(m, sigma2, sigma4t):
    """``E[n n^T M n n^T]`` for a vector ``n`` with i.i.d. coordinates.

    Equals ``s4 (M + M^T + tr(M) I) + (sigma4t - 3 s4) diag(M)`` with
    ``s4 = sigma2**2``.
    """
    m = as_mat(m)
    s4 = sigma2**2
    d = m.shape[0]
    return s4 * (m + m.T + np.trace(m) * np.eye(d)) + (sigma4t - 3.0 * s4) * np.diag(np.diag(m))


def biquadratic_expectation(a, horizon, sigma2, sigma4t):
    """``E[(x_T x_T^T)^2]`` for roll-outs from the origin under i.i.d. noise."""
    powers = matrix_powers(a, horizon)
    s4 = sigma2**2
    outer = [p @ p.T for p in powers]
    frob2 = [float(np.sum(p * p)) for p in powers]
    out = np.zeros_like(outer[0])
    for t, p in enumerate(powers):
        out += p @ fourth_moment_sandwich(p.T @ p, sigma2, sigma4t) @ p.T
    total_outer = sum(outer)
    total_frob2 = sum(frob2)
    for t in range(horizon):
        others = total_outer - outer[t]
        out += 2.0 * s4 * outer[t] @ others
        out += s4 * (total_frob2 - frob2[t]) * outer[t]
    return 0.5 * (out + out.T)


def scalar_fourth_moment_bound(a, horizon, sigma4t):
    """Upper bound ``3 g_T^2 sigma4t`` on ``E[x_T^4]`` in the scalar case."""
    return 3.0 * g_scalar(a, horizon) ** 2 * sigma4t


def variance_statistic(samples):
    """``E ||X - E X||_F^2`` estimated from a stack of sample matrices."""
    x = np.asarray(samples, dtype=float)
    centred = x - x.mean(axis=0)
    return float(np.mean(np.sum(centred.reshape(x.shape[0], -1) ** 2, axis=1)))
