"""Linear system identification from many trajectories under heavy-tailed noise."""

from .analysis import (
    BoundInputs,
    biquadratic_expectation,
    c_a,
    c_w,
    fourth_moment_sandwich,
    g_scalar,
    gramian,
    scalar_fourth_moment_bound,
    steady_covariance,
    theorem_bound,
)
from .estimator import (
    BucketPlan,
    EstimatorConfig,
    RobustEstimate,
    choose_bucket_count,
    geometric_median,
    ols_bucket,
    plan_buckets,
    pooled_ols,
    robust_sysid,
)
from .noise import NoiseSpec, make_rng
from .sim import CorruptionSpec, Dataset, LtiSystem, collect, corrupt, simulate_trajectory

__version__ = "0.1.0"
