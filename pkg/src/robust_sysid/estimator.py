"""Robust-SysID: bucketed least squares fused by a Frobenius geometric median.

The pipeline splits the trajectories into ``K`` equal buckets, fits ordinary
least squares on the last two states ``(x_T, x_{T+1})`` of every trajectory in
a bucket, and returns the geometric median of the ``K`` bucket fits.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasiblePlan,
    NotPositiveDefinite,
    SingularCovariance,
    TooFewTrajectories,
)
from .matlib import solve_spd

MODES = ("scalar", "vector", "corrupted")
DEFAULT_K_CONSTANT = {"scalar": 8.0, "vector": 32.0, "corrupted": 32.0}
# K >= 32 (log(1/delta) + eta N / 2) contributes 16 eta N extra buckets
CORRUPTION_SURCHARGE = 16.0


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of ``robust_sysid``.

    Either ``bucket_count`` is given explicitly or it is derived from
    ``delta`` with ``choose_bucket_count``. ``k_constant`` defaults to 8 in
    scalar mode and 32 otherwise. ``ols_eps`` is the relative pivot threshold
    used when factoring bucket covariances.
    """

    bucket_count: int | None = None
    delta: float | None = None
    mode: str = "vector"
    eta: float = 0.0
    k_constant: float | None = None
    gm_tol: float = 1e-10
    gm_max_iter: int = 10000
    anchor_eps: float = 1e-12
    ols_eps: float = 1e-15

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.bucket_count is None and self.delta is None:
            raise ValueError("give either bucket_count or delta")
        if self.bucket_count is not None and self.bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 0.5)")

    @property
    def resolved_k_constant(self):
        if self.k_constant is not None:
            return self.k_constant
        return DEFAULT_K_CONSTANT[self.mode]


@dataclass(frozen=True)
class BucketPlan:
    k: int
    m: int
    n: int

    @property
    def used(self):
        return self.k * self.m

    @property
    def dropped(self):
        return self.n - self.used

    @property
    def assignments(self):
        return [range(j * self.m, (j + 1) * self.m) for j in range(self.k)]


class GeometricMedian(NamedTuple):
    point: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class RobustEstimate:
    a_hat: np.ndarray
    bucket_estimates: np.ndarray
    gm_iterations: int
    plan: BucketPlan
    min_bucket_eigs: np.ndarray = field(repr=False)
    converged: bool = True


def plan_buckets(n, k):
    """Contiguous buckets of ``floor(n / k)`` trajectories; the remainder is dropped."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise TooFewTrajectories(f"{k} buckets requested for {n} trajectories")
    return BucketPlan(k=k, m=n // k, n=n)


def choose_bucket_count(config, n):
    if config.delta is None:
        raise ValueError("choose_bucket_count needs delta")
    k = config.resolved_k_constant * math.log(1.0 / config.delta)
    if config.mode == "corrupted":
        k += CORRUPTION_SURCHARGE * config.eta * n
    k = math.ceil(k)
    if k > n:
        raise InfeasiblePlan(f"the bucket rule asks for K={k} > N={n}")
    return k


def resolve_bucket_count(config, n):
    if config.bucket_count is not None:
        if config.bucket_count > n:
            raise InfeasiblePlan(f"K={config.bucket_count} > N={n}")
        return config.bucket_count
    return choose_bucket_count(config, n)


def _ols_stack(x, y, eps):
    # x, y: (K, M, d) -> (K, d, d) estimates of theta with y ~ theta x
    if x.shape[1] < x.shape[2]:
        # rank(sum x x^T) <= M < d; rounding can hide this from the pivot test
        raise NotPositiveDefinite("fewer samples than dimensions", index=0)
    gram = np.einsum("kmi,kmj->kij", x, x)
    cross = np.einsum("kmi,kmj->kij", y, x)
    return solve_spd(gram, cross, eps), gram


def ols_bucket(pairs, eps=1e-15):
    """Least-squares ``theta`` minimising ``sum ||y - theta x||^2`` over ``pairs``.

    ``pairs`` is either a sequence of ``(x, y)`` vectors or a tuple of two
    ``(M, d)`` arrays.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 2:
        x, y = (np.asarray(p, dtype=float) for p in pairs)
    else:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("at least one pair is required")
        x = np.array([np.atleast_1d(p[0]) for p in pairs], dtype=float)
        y = np.array([np.atleast_1d(p[1]) for p in pairs], dtype=float)
    if x.shape != y.shape or x.ndim != 2:
        raise DimensionMismatch("all pairs must share one dimension")
    try:
        est, _ = _ols_stack(x[None], y[None], eps)
    except NotPositiveDefinite as exc:
        raise SingularCovariance("regressor covariance is singular") from exc
    return est[0]


def _frob_dist(points, theta):
    diff = points - theta
    return np.sqrt(np.sum(diff * diff, axis=(1, 2)))


def geometric_median_objective(points, theta):
    points = np.asarray(points, dtype=float)
    return float(np.sum(_frob_dist(points, np.asarray(theta, dtype=float))))


def geometric_median(points, gm_tol=1e-10, gm_max_iter=10000, anchor_eps=1e-12):
    """Frobenius geometric median by Weiszfeld iteration with the Vardi-Zhang fix.

    Starts from the entrywise mean and stops once an update moves the iterate
    by at most ``gm_tol`` times the spread of the points. When the iterate sits
    within ``anchor_eps`` of data points, those points are taken out of the
    weighted average and the step is shrunk so the iterate only leaves them if
    that lowers the objective.

    Returns a ``GeometricMedian``; on hitting ``gm_max_iter`` the last iterate
    is returned with ``converged=False``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 2:
        pts = pts[None]
    if pts.ndim != 3 or pts.shape[0] == 0:
        raise DimensionMismatch("points must be a non-empty sequence of equal-shape matrices")
    theta = pts.mean(axis=0)
    spread = float(np.max(_frob_dist(pts, theta)))
    if spread == 0.0:
        return GeometricMedian(theta, 1, True)
    step_tol = gm_tol * spread
    for it in range(1, gm_max_iter + 1):
        r = _frob_dist(pts, theta)
        anchored = r < anchor_eps
        free = ~anchored
        if not free.any():
            return GeometricMedian(theta, it, True)
        w = 1.0 / r[free]
        t_free = np.tensordot(w, pts[free], axes=1) / w.sum()
        n_anchor = int(anchored.sum())
        if n_anchor:
            pull = np.tensordot(w, pts[free] - theta, axes=1)
            gamma = np.sqrt(np.sum(pull * pull))
            if gamma <= n_anchor:
                return GeometricMedian(theta, it, True)
            frac = n_anchor / gamma
            new = (1.0 - frac) * t_free + frac * theta
        else:
            new = t_free
        moved = np.sqrt(np.sum((new - theta) ** 2))
        theta = new
        if moved <= step_tol:
            return GeometricMedian(theta, it, True)
    return GeometricMedian(theta, gm_max_iter, False)


def scalar_median(values):
    """Sample median; the lower of the two middle values for even counts."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("median of an empty sample")
    return float(v[(v.size - 1) // 2])


def robust_sysid(data, config):
    """Estimate ``A`` from a ``Dataset`` with the bucketed geometric-median scheme."""
    plan = plan_buckets(data.n, resolve_bucket_count(config, data.n))
    d = data.system_dim
    x, y = data.last_pairs()
    xb = x[: plan.used].reshape(plan.k, plan.m, d)
    yb = y[: plan.used].reshape(plan.k, plan.m, d)
    try:
        estimates, gram = _ols_stack(xb, yb, config.ols_eps)
    except NotPositiveDefinite as exc:
        raise SingularCovariance(
            f"bucket {exc.index} has a singular regressor covariance", index=exc.index
        ) from exc
    min_eigs = np.linalg.eigvalsh(gram / plan.m)[:, 0]
    if d == 1:
        a_hat = np.array([[scalar_median(estimates)]])
        return RobustEstimate(a_hat, estimates, 0, plan, min_eigs)
    gm = geometric_median(estimates, config.gm_tol, config.gm_max_iter, config.anchor_eps)
    return RobustEstimate(gm.point, estimates, gm.iterations, plan, min_eigs, gm.converged)


def pooled_ols(data, eps=1e-15):
    """Ordinary least squares over all ``N`` last-two-state pairs."""
    x, y = data.last_pairs()
    return ols_bucket((x, y), eps)
