"""Process-noise families with exactly known second and fourth moments.

Every family draws coordinates independently, so ``E[w w^T] = variance * I``
and each coordinate has fourth moment ``fourth_moment``.

Random streams are ``numpy.random.Generator`` objects backed by the
counter-based Philox bit generator. Streams are derived from integer key
tuples through ``numpy.random.SeedSequence``; the same keys give the same
stream on every platform.
"""

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("gaussian", "spike", "student")


def make_rng(*keys):
    """Generator for the stream identified by the non-negative integers ``keys``."""
    if not keys:
        raise ValueError("at least one seed key is required")
    entropy = [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError("seed keys must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(*keys):
    """Collapse a key tuple into one 63-bit integer seed."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


@dataclass(frozen=True)
class NoiseSpec:
    """One coordinate-wise i.i.d. noise law.

    ``gaussian`` uses ``sigma``; ``spike`` puts mass ``q/2`` on each of ``+b``
    and ``-b`` and the rest on zero; ``student`` is a Student-t with ``nu``
    degrees of freedom rescaled to variance ``scale**2``.
    """

    kind: str
    sigma: float = 1.0
    q: float = 1.0
    b: float = 1.0
    nu: float = 5.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian noise needs sigma > 0")
        if self.kind == "spike" and not (0 < self.q <= 1 and self.b > 0):
            raise ValueError("spike noise needs q in (0, 1] and b > 0")
        if self.kind == "student" and not (self.nu > 4 and self.scale > 0):
            raise ValueError("student noise needs nu > 4 and scale > 0")

    @classmethod
    def gaussian(cls, sigma=1.0):
        return cls("gaussian", sigma=sigma)

    @classmethod
    def spike(cls, q, b):
        return cls("spike", q=q, b=b)

    @classmethod
    def student(cls, nu, scale=1.0):
        return cls("student", nu=nu, scale=scale)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        kind = doc.pop("kind", None)
        return cls(kind, **{k: float(v) for k, v in doc.items()})

    def to_dict(self):
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.sigma}
        if self.kind == "spike":
            return {"kind": "spike", "q": self.q, "b": self.b}
        return {"kind": "student", "nu": self.nu, "scale": self.scale}

    def variance(self):
        if self.kind == "gaussian":
            return self.sigma**2
        if self.kind == "spike":
            return self.q * self.b**2
        return self.scale**2

    def fourth_moment(self):
        if self.kind == "gaussian":
            return 3.0 * self.sigma**4
        if self.kind == "spike":
            return self.q * self.b**4
        return self.scale**4 * (3.0 + 6.0 / (self.nu - 4.0))

    def kurtosis(self):
        return self.fourth_moment() / self.variance() ** 2

    def with_kurtosis(self, kurtosis):
        """Same family and variance, retuned to the requested kurtosis."""
        var = self.variance()
        if self.kind == "spike":
            if kurtosis < 1:
                raise ValueError("spike kurtosis must be >= 1")
            q = 1.0 / kurtosis
            return NoiseSpec.spike(q, math.sqrt(var / q))
        if self.kind == "student":
            if kurtosis <= 3:
                raise ValueError("student kurtosis must exceed 3")
            return NoiseSpec.student(4.0 + 6.0 / (kurtosis - 3.0), math.sqrt(var))
        if kurtosis != 3:
            raise ValueError("gaussian kurtosis is fixed at 3")
        return self

    def sample(self, shape, rng):
        """Array of i.i.d. draws, filled in C order from ``rng``."""
        if self.kind == "gaussian":
            return self.sigma * rng.standard_normal(shape)
        if self.kind == "spike":
            u = rng.random(shape)
            half = 0.5 * self.q
            return np.where(u < half, -self.b, np.where(u < self.q, self.b, 0.0))
        factor = self.scale * math.sqrt((self.nu - 2.0) / self.nu)
        return factor * rng.standard_t(self.nu, shape)

    def sample_vector(self, d, rng):
        if d < 1:
            raise ValueError("d must be positive")
        return self.sample((d,), rng)
