"""Dependent data-stream generators.

Four stream kinds are provided:

* ``IidUniform`` - independent uniforms on [0,1]^d, the zero-dependence
  baseline.
* ``HoldTimeUniform`` - a renewal chain that redraws a fresh uniform value
  and holds it for a random number of steps with a truncated discrete
  power-law duration (a regenerative construction in the spirit of the
  polynomially ergodic chains of Jarner and Roberts 2002).  The stationary
  marginal is exactly uniform; the empirical mixing coefficient decays
  polynomially at a rate controlled by the duration exponent.
* ``FiniteChain`` - a finite-state Markov chain with a state-to-vector
  emission map; mixing coefficients are exactly computable for it.
* ``Wrapped`` - periodic subsampling of an inner stream: one step of the
  wrapper advances the inner process ``period`` steps and returns the last
  sample, so the kept stream mixes at lag ``period * k``.

Streams are deterministic functions of their spec: equal specs (including
the seed) produce bit-identical sample sequences, whether drawn one sample
at a time or in blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .markov import stationary_distribution, validate_transition_matrix

__all__ = [
    "StreamSpec",
    "IidUniformSpec",
    "HoldTimeUniformSpec",
    "FiniteChainSpec",
    "WrappedSpec",
    "Stream",
    "make_stream",
    "next_sample",
    "HoldDurationLaw",
    "hold_duration_law",
    "tuned_hold_exponent",
    "tuned_hold_spec",
    "DEFAULT_MAX_HOLD",
    "TUNED_LAG_GRID",
    "spec_to_config_block",
    "spec_from_config_block",
]

DEFAULT_MAX_HOLD = 10_000

# Lag grid over which the duration exponent is tuned; matches the grid used
# by the mixing-decay checks.
TUNED_LAG_GRID = (2, 4, 8, 16, 32, 64, 128, 256, 512)


# ---------------------------------------------------------------------------
# Specs


class StreamSpec:
    """Base class for stream specifications (frozen dataclasses below)."""

    @property
    def dim(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class IidUniformSpec(StreamSpec):
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class HoldTimeUniformSpec(StreamSpec):
    """Uniform values held for heavy-tailed durations.

    Durations N are drawn from P(N = j) proportional to j^-(1+alpha) on
    {1..max_hold}.  The tail exponent alpha must exceed 1 so the
    untruncated duration has a finite mean; the cap keeps the mixing
    coefficient uniform over histories.
    """

    d: int
    alpha: float
    max_hold: int = DEFAULT_MAX_HOLD
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if not self.alpha > 1:
            raise ValueError("hold-duration tail exponent alpha must be > 1")
        if self.max_hold < 1:
            raise ValueError("max_hold must be >= 1")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class FiniteChainSpec(StreamSpec):
    """Finite-state Markov chain with vector emissions.

    ``transition`` is row-stochastic (rows sum to 1 within 1e-12) and must
    be irreducible and aperiodic so a unique stationary law exists.
    ``emission`` maps state s to the sample vector emission[s].
    """

    transition: tuple  # tuple of tuples, row-major
    emission: tuple    # tuple of tuples, one row per state
    seed: int = 0

    def __post_init__(self):
        P = np.asarray(self.transition, dtype=float)
        E = np.atleast_2d(np.asarray(self.emission, dtype=float))
        validate_transition_matrix(P)
        if E.shape[0] != P.shape[0]:
            raise ValueError("emission must have one row per state")
        object.__setattr__(self, "transition", tuple(map(tuple, P)))
        object.__setattr__(self, "emission", tuple(map(tuple, E)))

    @property
    def transition_matrix(self) -> np.ndarray:
        return np.asarray(self.transition, dtype=float)

    @property
    def emission_matrix(self) -> np.ndarray:
        return np.asarray(self.emission, dtype=float)

    @property
    def n_states(self) -> int:
        return len(self.transition)

    @property
    def dim(self) -> int:
        return len(self.emission[0])


@dataclass(frozen=True)
class WrappedSpec(StreamSpec):
    """Periodic subsampling wrapper; period 1 is the identity."""

    inner: StreamSpec
    subsample_period: int

    def __post_init__(self):
        if self.subsample_period < 1:
            raise ValueError("subsample_period must be >= 1")
        if isinstance(self.inner, WrappedSpec):
            raise ValueError("nested wrapping is not supported; compose periods instead")

    @property
    def dim(self) -> int:
        return self.inner.dim

    @property
    def seed(self) -> int:
        return self.inner.seed


# ---------------------------------------------------------------------------
# Hold-duration law


class HoldDurationLaw:
    """Cached distribution tables for truncated power-law hold durations.

    ``survival[i] = P(N >= i + 1)`` for i = 0..max_hold-1 (and 0 beyond),
    so a hold that has just produced its first sample survives g further
    steps with probability ``survival[g]``.
    """

    def __init__(self, alpha: float, max_hold: int):
        self.alpha = float(alpha)
        self.max_hold = int(max_hold)
        j = np.arange(1, max_hold + 1, dtype=float)
        pmf = j ** (-(1.0 + alpha))
        pmf /= pmf.sum()
        self.pmf = pmf
        self.cdf = np.cumsum(pmf)
        self.survival = np.concatenate([[1.0], 1.0 - self.cdf[:-1]])
        self.mean = float((j * pmf).sum())
        # Stationary residual life: P(R = m) = P(N >= m) / E[N], m = 1..max_hold.
        self.residual_cdf = np.cumsum(self.survival / self.survival.sum())
        # Stationary age: P(A = a) = P(N >= a + 1) / E[N], a = 0..max_hold-1.
        self.age_cdf = self.residual_cdf

    def sample_durations(self, rng: np.random.Generator, size) -> np.ndarray:
        return 1 + np.searchsorted(self.cdf, rng.random(size))

    def sample_residuals(self, rng: np.random.Generator, size) -> np.ndarray:
        """Stationary residual life (>= 1 steps still to be emitted)."""
        return 1 + np.searchsorted(self.residual_cdf, rng.random(size))

    def sample_ages(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.searchsorted(self.age_cdf, rng.random(size))

    def survive_prob(self, gaps: np.ndarray) -> np.ndarray:
        """P(a fresh hold is still active ``gap`` steps after its first sample)."""
        gaps = np.asarray(gaps, dtype=np.int64)
        out = np.zeros(gaps.shape, dtype=float)
        inside = gaps < self.max_hold
        out[inside] = self.survival[gaps[inside]]
        return out

    def sample_residuals_given_age(self, rng, ages: np.ndarray, n_cols: int) -> np.ndarray:
        """Residual steps beyond now, given the hold already has the given age.

        P(residual >= k | age a) = survival[a + k] / survival[a].  Sampled by
        inverse CDF on the global survival table; fully vectorized.
        """
        ages = np.asarray(ages, dtype=np.int64)
        u = rng.random((len(ages), n_cols))
        targets = u * self.survival[ages][:, None]
        # First index where survival drops to or below the target, then shift
        # so that P(residual >= k) = survival[a+k] / survival[a].
        idx = np.searchsorted(-self.survival, -targets)
        return idx - ages[:, None] - 1

    def window_span_prob(self, lag: int) -> float:
        """P(one hold covers both endpoints of a lag-k window) in steady state.

        Equals E[(N - k)^+] / E[N]; this is what the pooled empirical mixing
        estimate converges to (up to the histogram factor) for this chain.
        """
        j = np.arange(1, self.max_hold + 1, dtype=float)
        return float((np.clip(j - lag, 0.0, None) * self.pmf).sum() / self.mean)


@lru_cache(maxsize=64)
def hold_duration_law(alpha: float, max_hold: int) -> HoldDurationLaw:
    return HoldDurationLaw(alpha, max_hold)


def _fitted_decay_slope(alpha: float, max_hold: int, lags) -> float:
    law = HoldDurationLaw(alpha, max_hold)
    ks = np.asarray(lags, dtype=float)
    vals = np.array([law.window_span_prob(int(k)) for k in lags])
    design = np.vstack([np.log(ks), np.ones(len(ks))]).T
    slope, _ = np.linalg.lstsq(design, np.log(vals), rcond=None)[0]
    return float(slope)


@lru_cache(maxsize=64)
def tuned_hold_exponent(mix_rate: float, max_hold: int = DEFAULT_MAX_HOLD,
                        lags: tuple = TUNED_LAG_GRID) -> float:
    """Duration exponent alpha whose steady-state decay fits k^(-1/mix_rate).

    The fit is a least-squares log-log regression of the window-span
    probability over ``lags``; alpha is found by root-finding so the fitted
    slope equals -1/mix_rate exactly.  Larger mix_rate means slower mixing.
    """
    if mix_rate <= 0:
        raise ValueError("mix_rate must be positive")
    target = -1.0 / float(mix_rate)
    if not -1.05 <= target < 0:
        raise ValueError("mix_rate outside the tunable range [1, inf)")
    f = lambda a: _fitted_decay_slope(a, max_hold, lags) - target
    return float(brentq(f, 1.000001, 4.0, xtol=1e-9))


def tuned_hold_spec(mix_rate: float, d: int, seed: int,
                    max_hold: int = DEFAULT_MAX_HOLD) -> HoldTimeUniformSpec:
    """Hold-time stream whose empirical mixing decay fits k^(-1/mix_rate)."""
    alpha = tuned_hold_exponent(float(mix_rate), max_hold)
    return HoldTimeUniformSpec(d=d, alpha=alpha, max_hold=max_hold, seed=seed)


# ---------------------------------------------------------------------------
# Stream engines


class Stream:
    """Stateful sample generator; single-owner, not thread-safe."""

    spec: StreamSpec

    @property
    def dim(self) -> int:
        return self.spec.dim

    def take(self, n: int) -> np.ndarray:
        """Next n samples as an (n, d) array."""
        raise NotImplementedError

    def next(self) -> np.ndarray:
        return self.take(1)[0]


class _IidUniformStream(Stream):
    def __init__(self, spec: IidUniformSpec):
        self.spec = spec
        self._rng = np.random.default_rng(spec.seed)

    def take(self, n: int) -> np.ndarray:
        return self._rng.random((n, self.spec.d))


class _HoldTimeUniformStream(Stream):
    """Renewal stream started from the exact stationary (value, residual) law.

    Randomness is consumed in a fixed order (one uniform for each duration,
    then d uniforms for the value), so blocked and stepwise draws agree bit
    for bit.
    """

    def __init__(self, spec: HoldTimeUniformSpec):
        self.spec = spec
        self._law = hold_duration_law(spec.alpha, spec.max_hold)
        self._rng = np.random.default_rng(spec.seed)
        self._remaining = int(self._law.sample_residuals(self._rng, ()))
        self._value = self._rng.random(spec.d)

    def take(self, n: int) -> np.ndarray:
        out = np.empty((n, self.spec.d))
        i = 0
        while i < n:
            if self._remaining == 0:
                self._remaining = int(self._law.sample_durations(self._rng, ()))
                self._value = self._rng.random(self.spec.d)
            chunk = min(self._remaining, n - i)
            out[i:i + chunk] = self._value
            self._remaining -= chunk
            i += chunk
        return out


class _FiniteChainStream(Stream):
    def __init__(self, spec: FiniteChainSpec):
        self.spec = spec
        self._P = spec.transition_matrix
        self._E = spec.emission_matrix
        self._row_cdf = np.cumsum(self._P, axis=1)
        pi = stationary_distribution(self._P)
        self._pi_cdf = np.cumsum(pi)
        self._rng = np.random.default_rng(spec.seed)
        self._state = int(np.searchsorted(self._pi_cdf, self._rng.random()))

    def take(self, n: int) -> np.ndarray:
        u = self._rng.random(n)
        states = np.empty(n, dtype=np.int64)
        s = self._state
        for i in range(n):
            s = int(np.searchsorted(self._row_cdf[s], u[i]))
            states[i] = s
        self._state = s
        return self._E[states]


class _WrappedStream(Stream):
    def __init__(self, spec: WrappedSpec):
        self.spec = spec
        self._inner = make_stream(spec.inner)

    def take(self, n: int) -> np.ndarray:
        r = self.spec.subsample_period
        return self._inner.take(n * r)[r - 1::r]


def make_stream(spec: StreamSpec) -> Stream:
    """Build the stateful generator for a spec; same spec, same sequence."""
    if isinstance(spec, IidUniformSpec):
        return _IidUniformStream(spec)
    if isinstance(spec, HoldTimeUniformSpec):
        return _HoldTimeUniformStream(spec)
    if isinstance(spec, FiniteChainSpec):
        return _FiniteChainStream(spec)
    if isinstance(spec, WrappedSpec):
        return _WrappedStream(spec)
    raise TypeError(f"unknown stream spec {type(spec).__name__}")


def next_sample(stream: Stream) -> np.ndarray:
    """Advance the stream one step and return the sample."""
    return stream.next()


# ---------------------------------------------------------------------------
# Plain-text serialization (key=value lines; matrices as row-major lists)


def _format_floats(values) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(values, dtype=float).ravel())


def spec_to_config_block(spec: StreamSpec, prefix: str = "") -> str:
    """Serialize a spec to key=value lines (matrices row-major)."""
    lines = []
    if isinstance(spec, IidUniformSpec):
        lines += [f"{prefix}kind=iid_uniform", f"{prefix}d={spec.d}", f"{prefix}seed={spec.seed}"]
    elif isinstance(spec, HoldTimeUniformSpec):
        lines += [
            f"{prefix}kind=hold_time_uniform",
            f"{prefix}d={spec.d}",
            f"{prefix}alpha={spec.alpha!r}",
            f"{prefix}max_hold={spec.max_hold}",
            f"{prefix}seed={spec.seed}",
        ]
    elif isinstance(spec, FiniteChainSpec):
        lines += [
            f"{prefix}kind=finite_chain",
            f"{prefix}n_states={spec.n_states}",
            f"{prefix}transition={_format_floats(spec.transition)}",
            f"{prefix}emission={_format_floats(spec.emission)}",
            f"{prefix}seed={spec.seed}",
        ]
    elif isinstance(spec, WrappedSpec):
        lines += [f"{prefix}kind=wrapped", f"{prefix}subsample_period={spec.subsample_period}"]
        lines.append(spec_to_config_block(spec.inner, prefix=prefix + "inner."))
    else:
        raise TypeError(f"unknown stream spec {type(spec).__name__}")
    return "\n".join(lines)


def spec_from_config_block(block: dict, prefix: str = "") -> StreamSpec:
    """Inverse of :func:`spec_to_config_block`; ``block`` maps keys to strings."""
    def get(key, default=None):
        v = block.get(prefix + key, default)
        if v is None:
            raise ValueError(f"stream block missing key {prefix + key!r}")
        return v

    kind = get("kind")
    if kind == "iid_uniform":
        return IidUniformSpec(d=int(get("d")), seed=int(get("seed", "0")))
    if kind == "hold_time_uniform":
        return HoldTimeUniformSpec(
            d=int(get("d")),
            alpha=float(get("alpha")),
            max_hold=int(get("max_hold", str(DEFAULT_MAX_HOLD))),
            seed=int(get("seed", "0")),
        )
    if kind == "finite_chain":
        n = int(get("n_states"))
        flat_t = np.asarray([float(x) for x in get("transition").split(",")])
        if flat_t.size != n * n:
            raise ValueError("transition length does not match n_states^2")
        flat_e = np.asarray([float(x) for x in get("emission").split(",")])
        if flat_e.size % n != 0:
            raise ValueError("emission length must be a multiple of n_states")
        return FiniteChainSpec(
            transition=tuple(map(tuple, flat_t.reshape(n, n))),
            emission=tuple(map(tuple, flat_e.reshape(n, -1))),
            seed=int(get("seed", "0")),
        )
    if kind == "wrapped":
        inner = spec_from_config_block(block, prefix=prefix + "inner.")
        return WrappedSpec(inner=inner, subsample_period=int(get("subsample_period")))
    raise ValueError(f"unknown stream kind {kind!r}")
