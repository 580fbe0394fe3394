"""Roll-outs of ``x_{t+1} = A x_t + w_t`` from the origin, and adversarial corruption.

Noise consumption order is fixed: a trajectory of horizon ``T`` draws one
``(T + 1, d)`` block (time-major, coordinate-minor) for ``w_0 .. w_T``.
``collect`` draws a single ``(N, T + 1, d)`` block, so trajectory ``i`` uses
row ``i`` of the dataset stream, and ``collect(..., n=1)`` reproduces
``simulate_trajectory`` on the same generator.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matlib import as_mat
from .noise import make_rng

DATASET_FORMAT = "robust_sysid dataset v1"

CORRUPTION_STRATEGIES = ("gross_outlier", "sign_flip_scale", "targeted_fake_a")


@dataclass(frozen=True, eq=False)
class LtiSystem:
    a: np.ndarray

    def __post_init__(self):
        a = as_mat(self.a)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"state-transition matrix must be square, got {a.shape}")
        object.__setattr__(self, "a", a)

    @property
    def d(self):
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``x_0 .. x_{T+1}`` (``x_0 = 0``) and the noise that produced them."""

    states: np.ndarray
    noise: np.ndarray

    @property
    def horizon(self):
        return self.states.shape[0] - 2


@dataclass(frozen=True, eq=False)
class Dataset:
    """``N`` trajectories stored as one ``(N, T + 2, d)`` array.

    ``noise`` and ``corrupted_indices`` are bookkeeping for diagnostics and the
    adversary; estimators only read ``states``. ``noise`` is ``None`` for
    datasets loaded from disk.
    """

    states: np.ndarray
    noise: np.ndarray | None = None
    corrupted_indices: tuple = ()

    @property
    def n(self):
        return self.states.shape[0]

    @property
    def horizon(self):
        return self.states.shape[1] - 2

    @property
    def system_dim(self):
        return self.states.shape[2]

    def trajectory(self, i):
        noise = None if self.noise is None else self.noise[i]
        return Trajectory(self.states[i], noise)

    def last_pairs(self):
        """Regressor/target pairs ``(x_T, x_{T+1})``, each of shape ``(N, d)``."""
        return self.states[:, -2, :], self.states[:, -1, :]


@dataclass(frozen=True)
class CorruptionSpec:
    """Strong-contamination adversary replacing ``floor(eta * N)`` trajectories.

    ``gross_outlier`` sets ``x_t = magnitude * t * e_1`` for ``t >= 1``;
    ``sign_flip_scale`` maps every state to ``-gamma * x_t``;
    ``targeted_fake_a`` replays the recorded noise through ``a_bad``.
    """

    eta: float
    strategy: str = "gross_outlier"
    magnitude: float = 1e6
    gamma: float = 10.0
    a_bad: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 0.5)")
        if self.strategy not in CORRUPTION_STRATEGIES:
            raise ValueError(f"unknown corruption strategy {self.strategy!r}")
        if self.strategy == "targeted_fake_a":
            if self.a_bad is None:
                raise ValueError("targeted_fake_a needs a_bad")
            object.__setattr__(self, "a_bad", as_mat(self.a_bad))

    @classmethod
    def from_dict(cls, doc, eta):
        doc = dict(doc)
        strategy = doc.pop("strategy", "gross_outlier")
        if "a_bad" in doc:
            doc["a_bad"] = np.asarray(doc["a_bad"], dtype=float)
        return cls(eta=eta, strategy=strategy, **doc)

    def count(self, n):
        # round() guards against eta * n landing a hair below an integer
        return math.floor(round(self.eta * n, 9))


def random_stable_matrix(d, radius, rng):
    """Gaussian random ``d x d`` matrix rescaled to the given spectral radius."""
    g = rng.standard_normal((d, d))
    rho = np.max(np.abs(np.linalg.eigvals(g)))
    return g * (radius / rho)


def _rollout(a, noise):
    # noise: (..., T + 1, d) -> states (..., T + 2, d)
    shape = noise.shape[:-2] + (noise.shape[-2] + 1, noise.shape[-1])
    states = np.zeros(shape)
    at = a.T
    for t in range(noise.shape[-2]):
        states[..., t + 1, :] = states[..., t, :] @ at + noise[..., t, :]
    return states


def simulate_trajectory(system, noise, horizon, rng):
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    w = np.asarray(noise.sample((horizon + 1, system.d), rng), dtype=float)
    return Trajectory(_rollout(system.a, w), w)


def collect(system, noise, horizon, n, seed):
    """``n`` independent roll-outs driven by the stream ``make_rng(seed)``.

    ``seed`` is an integer or a tuple of integer keys.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    keys = seed if isinstance(seed, tuple) else (seed,)
    rng = make_rng(*keys)
    w = np.asarray(noise.sample((n, horizon + 1, system.d), rng), dtype=float)
    return Dataset(_rollout(system.a, w), w)


def corrupt(data, spec, rng):
    """Replace ``floor(eta * N)`` trajectories chosen uniformly without replacement."""
    if data.n < 1:
        raise ValueError("cannot corrupt an empty dataset")
    k = spec.count(data.n)
    if k == 0:
        return data
    idx = np.sort(rng.choice(data.n, size=k, replace=False))
    states = data.states.copy()
    horizon = data.horizon
    if spec.strategy == "gross_outlier":
        fake = np.zeros(states.shape[1:])
        fake[:, 0] = spec.magnitude * np.arange(horizon + 2)
        states[idx] = fake
    elif spec.strategy == "sign_flip_scale":
        states[idx] = -spec.gamma * states[idx]
    else:
        if data.noise is None:
            raise ValueError("targeted_fake_a needs the recorded noise")
        if spec.a_bad.shape != (data.system_dim, data.system_dim):
            raise ValueError("a_bad has the wrong shape")
        states[idx] = _rollout(spec.a_bad, data.noise[idx])
    merged = tuple(sorted(set(data.corrupted_indices) | set(int(i) for i in idx)))
    return replace(data, states=states, corrupted_indices=merged)


def save_dataset(data, path):
    """Write one CSV row per ``(trajectory, t)`` under a versioned comment line."""
    d = data.system_dim
    corrupted = set(data.corrupted_indices)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {DATASET_FORMAT} n={data.n} horizon={data.horizon} d={d}\n")
        writer = csv.writer(fh)
        writer.writerow(["trajectory", "t", "corrupted"] + [f"x{j}" for j in range(d)])
        for i in range(data.n):
            flag = int(i in corrupted)
            for t, x in enumerate(data.states[i]):
                writer.writerow([i, t, flag] + [repr(float(v)) for v in x])


def load_dataset(path):
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(f"# {DATASET_FORMAT}"):
            raise ValueError(f"{path}: not a {DATASET_FORMAT} file")
        meta = dict(tok.split("=") for tok in first.split()[4:])
        n, steps, d = int(meta["n"]), int(meta["horizon"]) + 2, int(meta["d"])
        reader = csv.reader(fh)
        next(reader)
        states = np.empty((n, steps, d))
        corrupted = set()
        for row in reader:
            i, t = int(row[0]), int(row[1])
            if int(row[2]):
                corrupted.add(i)
            states[i, t] = [float(v) for v in row[3:]]
    return Dataset(states, None, tuple(sorted(corrupted)))
