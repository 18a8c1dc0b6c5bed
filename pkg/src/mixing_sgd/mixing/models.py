"""Mixing-coefficient models.

A model maps a lag k >= 1 to a phi-mixing coefficient phi(k), the worst-case
unnormalized L1 distance between the law of a sample k steps ahead
(conditioned on the history) and the stationary law.  Values live in [0, 2]
and are non-increasing in k.  Independent data has phi identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MixingModel",
    "Geometric",
    "Algebraic",
    "Tabulated",
    "Iid",
    "eval_phi",
    "tail_sum",
]


class MixingModel:
    """Base class; subclasses implement ``phi_array`` on integer lag arrays."""

    def phi(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"lag must be a positive integer, got {k}")
        return float(self.phi_array(np.asarray([k], dtype=np.int64))[0])

    def phi_array(self, ks: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Geometric(MixingModel):
    """phi(k) = exp(-k^theta), weakly dependent data for any theta > 0."""

    theta: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("Geometric mixing requires theta > 0")

    def phi_array(self, ks: np.ndarray) -> np.ndarray:
        return np.exp(-np.asarray(ks, dtype=float) ** self.theta)


@dataclass(frozen=True)
class Algebraic(MixingModel):
    """phi(k) = k^(-theta); slow regime for theta < 1, fast for theta >= 1."""

    theta: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("Algebraic mixing requires theta > 0")

    def phi_array(self, ks: np.ndarray) -> np.ndarray:
        return np.asarray(ks, dtype=float) ** (-self.theta)


@dataclass(frozen=True)
class Tabulated(MixingModel):
    """Finite table of coefficients with an explicit tail rule.

    ``tail_rule`` is either "hold" (the last value is held for all larger
    lags) or "zero" (coefficients vanish beyond the table).
    """

    values: tuple = field(default=())
    tail_rule: str = "hold"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("Tabulated model needs at least one value")
        arr = np.asarray(vals)
        if np.any(arr < 0) or np.any(arr > 2):
            raise ValueError("tabulated coefficients must lie in [0, 2]")
        if np.any(np.diff(arr) > 1e-12):
            raise ValueError("tabulated coefficients must be non-increasing")
        if self.tail_rule not in ("hold", "zero"):
            raise ValueError(f"unknown tail_rule {self.tail_rule!r}")

    def phi_array(self, ks: np.ndarray) -> np.ndarray:
        arr = np.asarray(self.values)
        ks = np.asarray(ks, dtype=np.int64)
        out = np.empty(ks.shape, dtype=float)
        inside = ks <= len(arr)
        out[inside] = arr[ks[inside] - 1]
        out[~inside] = arr[-1] if self.tail_rule == "hold" else 0.0
        return out


@dataclass(frozen=True)
class Iid(MixingModel):
    """Independent samples: phi(k) = 0 for every lag."""

    def phi_array(self, ks: np.ndarray) -> np.ndarray:
        return np.zeros(np.asarray(ks).shape, dtype=float)


def eval_phi(model: MixingModel, k: int) -> float:
    """Evaluate phi(k) for a positive integer lag k."""
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ValueError(f"lag must be a positive integer, got {k!r}")
    return model.phi(int(k))


def tail_sum(model: MixingModel, tau: int, batch_size: int) -> float:
    """Sum of mixing coefficients over one batch window.

    Returns sum_{i=1..B} phi(tau*B + i).  With tau = 0 this is the plain
    partial sum sum_{i=1..B} phi(i) that appears in variance and step-size
    expressions; with tau >= 1 it is the bias window of a batch located tau
    batches ahead of the conditioning point.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    B = int(batch_size)
    ks = int(tau) * B + np.arange(1, B + 1, dtype=np.int64)
    return float(np.sum(model.phi_array(ks)))


def geometric_tail_total(theta: float, terms: int = 200_000) -> float:
    """Numeric value of sum_{i>=1} exp(-i^theta), truncated when negligible."""
    total = 0.0
    for i in range(1, terms + 1):
        t = math.exp(-(i ** theta))
        total += t
        if t < 1e-18:
            break
    return total
