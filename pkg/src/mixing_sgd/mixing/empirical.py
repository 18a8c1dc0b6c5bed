"""Monte-Carlo estimation of phi-mixing coefficients.

The estimator replicates independent chains to a common checkpoint,
conditions on the cell of a fixed state-space partition containing each
checkpoint sample (finite chains use exact state identity instead of bins),
pools continuation samples k steps ahead within each cell, and reports the
maximum over cells of the L1 histogram distance to the stationary
histogram.  Pooling replicates within a cell marginalizes hidden state
(for example the age of the current hold in a renewal stream) exactly as
conditioning on the observable history does.

The per-cell L1 distance is debiased coordinatewise by subtracting the
multinomial sampling variance under the square root, so independent data
reads as zero up to noise.  Standard errors are delete-one jackknife over
replicate chains, the independent units of the simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import derive_seed
from .markov import stationary_distribution
from .streams import (
    FiniteChainSpec,
    HoldTimeUniformSpec,
    IidUniformSpec,
    StreamSpec,
    WrappedSpec,
    hold_duration_law,
)

__all__ = ["PhiEstimate", "estimate_phi_empirical", "estimate_phi_profile",
           "PHI_CSV_HEADER", "phi_estimate_csv_row"]

PHI_CSV_HEADER = "k,value,stderr,n_replicates"

DEFAULT_BINS_PER_COORD = 16
DEFAULT_CONTINUATIONS = 24


@dataclass(frozen=True)
class PhiEstimate:
    """Empirical mixing coefficient at one lag."""

    k: int
    value: float
    stderr: float
    n_replicates: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("lag must be >= 1")
        if self.value < 0 or self.stderr < 0:
            raise ValueError("value and stderr must be nonnegative")
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")


def phi_estimate_csv_row(est: PhiEstimate) -> str:
    return f"{est.k},{est.value!r},{est.stderr!r},{est.n_replicates}"


def _debiased_l1(counts: np.ndarray, stationary: np.ndarray) -> np.ndarray:
    """Variance-debiased L1 distance between histograms and the stationary law.

    Works on the last axis; rows with zero total count return 0.
    """
    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1, keepdims=True)
    safe = np.maximum(n, 1.0)
    p = counts / safe
    var = p * (1.0 - p) / safe
    d = np.sqrt(np.maximum((p - stationary) ** 2 - var, 0.0)).sum(axis=-1)
    return np.where(n[..., 0] > 0, d, 0.0)


# ---------------------------------------------------------------------------
# Per-kind simulation of (checkpoint cell, landing counts per lag)


def _check_partition(bins: int, d: int) -> int:
    cells = bins ** d
    if cells > 4096:
        raise ValueError(
            f"partition of {cells} cells ({bins} bins ^ {d} coords) is too fine "
            "to estimate; run the check on a low-dimensional stream")
    return cells


def _continuous_cells(x: np.ndarray, bins: int) -> np.ndarray:
    """Map [0,1]^d samples to flat cell indices on a bins-per-coordinate grid."""
    digits = np.clip((x * bins).astype(np.int64), 0, bins - 1)
    if digits.ndim == 1:
        digits = digits[..., None]
    flat = digits[..., 0]
    for j in range(1, digits.shape[-1]):
        flat = flat * bins + digits[..., j]
    return flat


def _simulate_hold(spec: HoldTimeUniformSpec, lags, n_rep, m, bins, burn_in):
    law = hold_duration_law(spec.alpha, spec.max_hold)
    L = len(lags)
    n_cells = _check_partition(bins, spec.d)
    cells = np.empty(n_rep, dtype=np.int64)
    landings = np.empty((n_rep, m, L), dtype=np.int32)
    lag_arr = np.asarray(lags, dtype=np.int64)
    for i in range(n_rep):
        rng = np.random.default_rng(derive_seed(spec.seed, 0x701, i))
        age = int(law.sample_ages(rng, ()))
        value = rng.random(spec.d)
        if burn_in:
            age, value = _advance_hold(law, rng, age, value, burn_in, spec.d)
        cells[i] = _continuous_cells(value[None, :], bins)[0]
        residuals = law.sample_residuals_given_age(rng, np.asarray([age]), m)[0]
        fresh_cells = _continuous_cells(rng.random((m, L, spec.d)), bins)
        landings[i] = np.where(residuals[:, None] >= lag_arr[None, :],
                               cells[i], fresh_cells)
    stationary = np.full(n_cells, 1.0 / n_cells)
    return cells, landings, stationary


def _advance_hold(law, rng, age, value, steps, d):
    """Advance a hold-chain state by ``steps`` samples.

    ``residual`` counts strictly future emissions of the current value, so a
    renewal lands exactly ``residual + 1`` steps ahead.
    """
    residual = int(law.sample_residuals_given_age(rng, np.asarray([age]), 1)[0, 0])
    while steps > residual:
        steps -= residual + 1
        dur = int(law.sample_durations(rng, ()))
        value = rng.random(d)
        age, residual = 0, dur - 1
    return age + steps, value


def _simulate_iid(spec: IidUniformSpec, lags, n_rep, m, bins, burn_in):
    L = len(lags)
    n_cells = _check_partition(bins, spec.d)
    cells = np.empty(n_rep, dtype=np.int64)
    landings = np.empty((n_rep, m, L), dtype=np.int32)
    for i in range(n_rep):
        rng = np.random.default_rng(derive_seed(spec.seed, 0x702, i))
        if burn_in:
            rng.random((burn_in, spec.d))
        cells[i] = _continuous_cells(rng.random((1, spec.d)), bins)[0]
        landings[i] = _continuous_cells(rng.random((m, L, spec.d)), bins)
    stationary = np.full(n_cells, 1.0 / n_cells)
    return cells, landings, stationary


def _simulate_finite(spec: FiniteChainSpec, lags, n_rep, m, burn_in):
    P = spec.transition_matrix
    pi = stationary_distribution(P)
    row_cdf = np.cumsum(P, axis=1)
    pi_cdf = np.cumsum(pi)
    S = spec.n_states
    L = len(lags)
    lag_set = {int(k): j for j, k in enumerate(lags)}
    max_lag = max(lags)
    cells = np.empty(n_rep, dtype=np.int64)
    landings = np.empty((n_rep, m, L), dtype=np.int32)
    for i in range(n_rep):
        rng = np.random.default_rng(derive_seed(spec.seed, 0x703, i))
        s = int(np.searchsorted(pi_cdf, rng.random()))
        for _ in range(burn_in):
            s = int(np.searchsorted(row_cdf[s], rng.random()))
        cells[i] = s
        states = np.full(m, s, dtype=np.int64)
        u = rng.random((max_lag, m))
        for step in range(1, max_lag + 1):
            # vectorized row-wise inverse-CDF transition for all continuations
            states = (u[step - 1][:, None] > row_cdf[states]).sum(axis=1)
            j = lag_set.get(step)
            if j is not None:
                landings[i, :, j] = states
    return cells, landings, pi


def _simulate(spec: StreamSpec, lags, n_rep, m, bins, burn_in):
    if isinstance(spec, WrappedSpec):
        inner_lags = [k * spec.subsample_period for k in lags]
        return _simulate(spec.inner, inner_lags, n_rep, m, bins, burn_in)
    if isinstance(spec, HoldTimeUniformSpec):
        return _simulate_hold(spec, lags, n_rep, m, bins, burn_in)
    if isinstance(spec, IidUniformSpec):
        return _simulate_iid(spec, lags, n_rep, m, bins, burn_in)
    if isinstance(spec, FiniteChainSpec):
        return _simulate_finite(spec, lags, n_rep, m, burn_in)
    raise TypeError(f"unknown stream spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Public estimators


def estimate_phi_profile(spec: StreamSpec, lags, n_replicates: int,
                         burn_in: int = 0,
                         n_continuations: int = DEFAULT_CONTINUATIONS,
                         bins_per_coord: int = DEFAULT_BINS_PER_COORD,
                         ) -> list[PhiEstimate]:
    """Estimate phi at several lags from one shared set of replicate chains.

    Replicates start from the exact stationary law of the spec (so the
    default burn-in is 0); a positive ``burn_in`` advances each replicate
    that many extra steps first.  Per-replicate seeds are derived from
    (spec.seed, replicate index), so the result does not depend on
    execution order.
    """
    lags = [int(k) for k in lags]
    if not lags or any(k < 1 for k in lags):
        raise ValueError("lags must be positive integers")
    if n_replicates < 100:
        raise ValueError("need n_replicates >= 100 for a usable estimate")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    n_rep = int(n_replicates)
    m = int(n_continuations)
    cells, landings, stationary = _simulate(spec, lags, n_rep, m,
                                            int(bins_per_coord), int(burn_in))
    n_cells = stationary.shape[0]
    rows = np.repeat(np.arange(n_rep), m)
    out = []
    for li, k in enumerate(lags):
        prc = np.zeros((n_rep, n_cells), dtype=np.int64)
        np.add.at(prc, (rows, landings[:, :, li].ravel()), 1)
        cell_counts = np.zeros((n_cells, n_cells), dtype=np.int64)
        np.add.at(cell_counts, cells, prc)
        dists = _debiased_l1(cell_counts, stationary)
        occupied = np.bincount(cells, minlength=n_cells) > 0
        dists = np.where(occupied, dists, -np.inf)
        value = float(dists.max())
        # Delete-one jackknife: removing replicate i only changes its own cell.
        reduced = _debiased_l1(cell_counts[cells] - prc, stationary)
        order = np.sort(dists)[::-1]
        top1 = order[0]
        top2 = order[1] if len(order) > 1 else -np.inf
        ties = (dists == top1).sum()
        own = dists[cells]
        other_max = np.where((own == top1) & (ties == 1), top2, top1)
        jack = np.maximum(other_max, reduced)
        se = float(np.sqrt((n_rep - 1) / n_rep * np.sum((jack - jack.mean()) ** 2)))
        out.append(PhiEstimate(k=k, value=float(np.clip(value, 0.0, 2.0)),
                               stderr=se, n_replicates=n_rep))
    return out


def estimate_phi_empirical(spec: StreamSpec, k: int, n_replicates: int,
                           burn_in: int = 0,
                           n_continuations: int = DEFAULT_CONTINUATIONS,
                           bins_per_coord: int = DEFAULT_BINS_PER_COORD,
                           ) -> PhiEstimate:
    """Estimate the mixing coefficient at a single lag; see the module docs."""
    return estimate_phi_profile(spec, [k], n_replicates, burn_in,
                                n_continuations, bins_per_coord)[0]
