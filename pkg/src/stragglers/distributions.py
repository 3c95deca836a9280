"""Task execution-time models: shifted exponential, Pareto, and empirical.

All models sample by inverse transform from uniforms on (0, 1], so U = 0
never occurs and Pareto variates stay finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ShiftedExp",
    "Pareto",
    "Empirical",
    "TaskTimeModel",
    "tail",
    "sample",
    "mean",
    "open_uniforms",
]


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform variates on (0, 1]."""
    return 1.0 - rng.random(size)


@dataclass(frozen=True)
class ShiftedExp:
    """SExp(shift, rate): shift + Exp(rate).  ``shift`` is per task."""

    shift: float
    rate: float

    def __post_init__(self):
        if not (self.shift > 0 and math.isfinite(self.shift)):
            raise ValueError(f"shift must be positive, got {self.shift!r}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate!r}")

    @property
    def minimum(self) -> float:
        return self.shift

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-self.rate * np.maximum(t - self.shift, 0.0))
        return out if out.ndim else float(out)

    def from_uniform(self, u):
        return self.shift - np.log(u) / self.rate

    def quantile(self, p):
        return self.shift - np.log1p(-np.asarray(p, dtype=float)) / self.rate

    def mean(self) -> float:
        return self.shift + 1.0 / self.rate

    def sample(self, rng: np.random.Generator, size=None):
        return self.from_uniform(open_uniforms(rng, size))


@dataclass(frozen=True)
class Pareto:
    """Pareto(scale, alpha) with Pr{X > t} = (scale / t)**alpha for t >= scale."""

    scale: float
    alpha: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def minimum(self) -> float:
        return self.scale

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(t <= self.scale, 1.0, (self.scale / np.maximum(t, self.scale)) ** self.alpha)
        return out if out.ndim else float(out)

    def from_uniform(self, u):
        return self.scale * np.power(u, -1.0 / self.alpha)

    def quantile(self, p):
        return self.scale * np.power(1.0 - np.asarray(p, dtype=float), -1.0 / self.alpha)

    def mean(self) -> float:
        if self.alpha <= 1:
            raise ValueError(f"Pareto mean is infinite for alpha={self.alpha} <= 1")
        return self.scale * self.alpha / (self.alpha - 1.0)

    def sample(self, rng: np.random.Generator, size=None):
        return self.from_uniform(open_uniforms(rng, size))


@dataclass(frozen=True)
class Empirical:
    """Resampling distribution over observed lifetimes (no smoothing)."""

    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(arr)) or arr[0] <= 0:
            raise ValueError("empirical samples must be finite and positive")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Empirical":
        return cls(np.asarray(values, dtype=float))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def minimum(self) -> float:
        return float(self.samples[0])

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        n = self.samples.size
        out = (n - np.searchsorted(self.samples, t, side="right")) / n
        return out if out.ndim else float(out)

    def from_uniform(self, u):
        # u in (0, 1]; map to an atom index in [0, n)
        n = self.samples.size
        idx = np.minimum((np.asarray(u) * n).astype(np.int64), n - 1)
        return self.samples[idx]

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def sample(self, rng: np.random.Generator, size=None):
        return self.samples[rng.integers(0, self.samples.size, size=size)]


TaskTimeModel = Union[ShiftedExp, Pareto, Empirical]


def tail(model: TaskTimeModel, t):
    """Pr{X > t}."""
    return model.tail(t)


def sample(model: TaskTimeModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)


def mean(model: TaskTimeModel) -> float:
    return model.mean()
