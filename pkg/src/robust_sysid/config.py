"""Experiment configuration: one flat JSON document describes one experiment."""

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .noise import NoiseSpec
from .sim import CorruptionSpec, LtiSystem

SWEEP_AXES = ("n_values", "delta_values", "eta_values", "kurtosis_values")
ESTIMATORS = ("robust", "pooled_ols")

_c, _s = math.cos(math.pi / 6), math.sin(math.pi / 6)
PRESETS = {
    "scalar_0.9": [[0.9]],
    "half_identity_2": [[0.5, 0.0], [0.0, 0.5]],
    "jordan_2": [[0.9, 0.5], [0.0, 0.9]],
    "rotation_2": [[0.9 * _c, -0.9 * _s], [0.9 * _s, 0.9 * _c]],
}


@dataclass
class ExperimentConfig:
    system: object
    horizon: int
    noise: dict
    trials: int = 1
    n: int = 1000
    delta: float = 0.01
    eta: float = 0.0
    corruption: dict = field(default_factory=lambda: {"strategy": "gross_outlier", "magnitude": 1e6})
    n_values: list | None = None
    delta_values: list | None = None
    eta_values: list | None = None
    kurtosis_values: list | None = None
    estimators: list = field(default_factory=lambda: list(ESTIMATORS))
    root_seed: int = 0
    output_path: str = "out"
    mode: str | None = None
    bucket_count: int | None = None
    k_constant: float | None = None
    m_constant: float = 1.0
    big_c: float = 1.0
    gm_tol: float = 1e-10
    dataset: str | None = None

    def __post_init__(self):
        try:
            self.lti()
            self.noise_spec()
            CorruptionSpec.from_dict(self.corruption, self.eta)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.horizon < 1 or self.trials < 1 or self.n < 1:
            raise ConfigError("horizon, trials and n must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        for axis in SWEEP_AXES:
            values = getattr(self, axis)
            if values is None:
                continue
            if not values or any(b <= a for a, b in zip(values, values[1:])):
                raise ConfigError(f"{axis} must be non-empty and strictly increasing")
        if len(self.sweep_axes()) > 1:
            raise ConfigError("at most one sweep axis may be given")

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return asdict(self)

    def lti(self):
        if isinstance(self.system, str):
            if self.system not in PRESETS:
                raise ValueError(f"unknown system preset {self.system!r}")
            return LtiSystem(np.array(PRESETS[self.system]))
        return LtiSystem(np.array(self.system, dtype=float))

    def noise_spec(self):
        return NoiseSpec.from_dict(self.noise)

    def sweep_axes(self):
        return [a for a in SWEEP_AXES if getattr(self, a) is not None]

    def sweep(self):
        """``(axis, values)``; without an axis the experiment has one point at ``n``."""
        axes = self.sweep_axes()
        if not axes:
            return "n_values", [self.n]
        return axes[0], list(getattr(self, axes[0]))

    def point(self, index):
        """Parameters ``(n, delta, eta, noise_spec)`` at one sweep point."""
        axis, values = self.sweep()
        value = values[index]
        n, delta, eta, noise = self.n, self.delta, self.eta, self.noise_spec()
        if axis == "n_values":
            n = int(value)
        elif axis == "delta_values":
            delta = float(value)
        elif axis == "eta_values":
            eta = float(value)
        else:
            noise = noise.with_kurtosis(float(value))
        return n, delta, eta, noise

    def resolved_mode(self, eta=None):
        if self.mode is not None:
            return self.mode
        if (self.eta if eta is None else eta) > 0 or self.eta_values is not None:
            return "corrupted"
        return "scalar" if self.lti().d == 1 else "vector"


def load_config(path, seed=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if seed is not None and isinstance(doc, dict):
        doc["root_seed"] = seed
    return ExperimentConfig.from_dict(doc)
