"""Projected online SGD over a dependent stream, three sampling schemes.

* ``Plain``         - one sample per update.
* ``Subsampled(r)`` - draws r consecutive samples per update and uses only
                      the first, discarding the rest (they still count
                      toward the sample budget).
* ``MiniBatch(B)``  - draws B consecutive samples per update and averages
                      their gradients.

Every update is followed by Euclidean projection onto the domain ball, so
iterates stay feasible and step norms are bounded by eta_t times the
gradient-norm constant.  ``Plain``, ``Subsampled(1)`` and ``MiniBatch(1)``
produce bit-identical trajectories under equal seeds and schedules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NumericalError
from .mixing.models import MixingModel, tail_sum
from .mixing.streams import (
    FiniteChainSpec,
    HoldTimeUniformSpec,
    IidUniformSpec,
    Stream,
    WrappedSpec,
    hold_duration_law,
)
from .mixing.markov import validate_transition_matrix
from .objective import (
    ProblemBundle,
    QuadraticProblem,
    population_loss,
    project,
    sample_loss,
)
from .seeding import derive_seed

__all__ = [
    "Plain",
    "Subsampled",
    "MiniBatch",
    "Scheme",
    "Constant",
    "InvSqrt",
    "TheoryMiniBatch",
    "LrSchedule",
    "Trajectory",
    "run",
    "regret",
    "BiasEstimate",
    "estimate_bias",
    "exact_bias_finite_chain",
    "TRAJECTORY_CSV_HEADER",
]

TRAJECTORY_CSV_HEADER = "t,samples_consumed,pop_loss,step_norm,regret_running"


# ---------------------------------------------------------------------------
# Schemes and learning-rate schedules


@dataclass(frozen=True)
class Plain:
    @property
    def samples_per_step(self) -> int:
        return 1

    def label(self) -> str:
        return "plain"


@dataclass(frozen=True)
class Subsampled:
    period: int

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("subsampling period must be >= 1")

    @property
    def samples_per_step(self) -> int:
        return self.period

    def label(self) -> str:
        return f"subsampled_r{self.period}"


@dataclass(frozen=True)
class MiniBatch:
    batch_size: int

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")

    @property
    def samples_per_step(self) -> int:
        return self.batch_size

    def label(self) -> str:
        return f"minibatch_B{self.batch_size}"


Scheme = Plain | Subsampled | MiniBatch


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("learning rate must be positive")

    def rate(self, t: int) -> float:
        return self.value


@dataclass(frozen=True)
class InvSqrt:
    """Diminishing schedule eta_t = scale / sqrt(t)."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def rate(self, t: int) -> float:
        return self.scale / math.sqrt(t)


@dataclass(frozen=True)
class TheoryMiniBatch:
    """Constant rate scale * sqrt(B / (T * sum_{j<=B} phi(j))).

    This is the horizon-aware step size that balances the two leading terms
    of the mini-batch regret bound; the mixing sum is evaluated on the
    declared model of the stream.
    """

    scale: float
    horizon: int
    batch_size: int
    model: MixingModel
    _value: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.scale <= 0 or self.horizon < 1 or self.batch_size < 1:
            raise ValueError("scale, horizon and batch_size must be positive")
        s = tail_sum(self.model, 0, self.batch_size)
        if s <= 0:
            raise ValueError("mixing sum must be positive; use Constant for iid data")
        value = self.scale * math.sqrt(self.batch_size / (self.horizon * s))
        object.__setattr__(self, "_value", value)

    def rate(self, t: int) -> float:
        return self._value


LrSchedule = Constant | InvSqrt | TheoryMiniBatch


# ---------------------------------------------------------------------------
# Trajectory record


@dataclass(frozen=True)
class Trajectory:
    """Record of one SGD run; immutable once returned.

    Full-resolution arrays (length n_iters): ``per_step_losses`` (the loss
    of the current iterate on the data block actually used), ``step_norms``,
    ``etas``, ``samples_consumed``, ``batch_means`` and ``batch_sq_terms``
    (sufficient statistics to evaluate the batch loss of any comparator
    later).  Thinned arrays are recorded at ``recorded_steps``: the iterate
    w(t), the running average of w(1..t), f(w(t)), f(w(t+1)) and the running
    regret against the population minimizer.
    """

    scheme_label: str
    n_iters: int
    samples_per_step: int
    record_stride: int
    recorded_steps: np.ndarray
    iterates: np.ndarray
    averaged_iterates: np.ndarray
    population_losses: np.ndarray
    post_update_population_losses: np.ndarray
    running_regret: np.ndarray
    per_step_losses: np.ndarray
    comparator_step_losses: np.ndarray
    step_norms: np.ndarray
    etas: np.ndarray
    batch_means: np.ndarray
    batch_sq_terms: np.ndarray
    final_iterate: np.ndarray

    @property
    def samples_consumed(self) -> np.ndarray:
        """Cumulative raw samples drawn from the stream after each step."""
        return np.arange(1, self.n_iters + 1, dtype=np.int64) * self.samples_per_step

    def to_csv(self) -> str:
        rows = [TRAJECTORY_CSV_HEADER]
        consumed = self.recorded_steps * self.samples_per_step
        for i, t in enumerate(self.recorded_steps):
            rows.append(f"{t},{consumed[i]},{self.population_losses[i]!r},"
                        f"{self.step_norms[t - 1]!r},{self.running_regret[i]!r}")
        return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# The run loop


def run(problem: QuadraticProblem, stream: Stream, scheme: Scheme,
        schedule: LrSchedule, n_iters: int, *, initial_point=None,
        record_stride: int = 1) -> Trajectory:
    """Execute exactly ``n_iters`` projected SGD updates.

    The stream is consumed in blocks of ``scheme.samples_per_step`` raw
    samples per update; Subsampled uses the first sample of each block,
    MiniBatch averages the gradients of the whole block.  A non-finite
    gradient aborts with a NumericalError naming the step.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if stream.dim != problem.dim:
        raise ValueError("stream dimension must match the problem")
    d = problem.dim
    A = problem.matrix
    w = (np.zeros(d) if initial_point is None
         else np.asarray(initial_point, dtype=float).ravel().copy())
    if w.shape != (d,):
        raise ValueError("initial point dimension mismatch")
    w = project(problem, w)

    w_star = problem.stationary_mean  # population minimizer when interior
    per_block = scheme.samples_per_step
    use_batch = isinstance(scheme, MiniBatch)

    rec_steps = np.arange(record_stride, n_iters + 1, record_stride, dtype=np.int64)
    if rec_steps.size == 0 or rec_steps[-1] != n_iters:
        rec_steps = np.append(rec_steps, n_iters)
    rec_index = {int(t): i for i, t in enumerate(rec_steps)}
    n_rec = rec_steps.size

    iterates = np.empty((n_rec, d))
    averaged = np.empty((n_rec, d))
    pop_losses = np.empty(n_rec)
    post_losses = np.empty(n_rec)
    run_regret = np.empty(n_rec)
    per_step = np.empty(n_iters)
    comp_step = np.empty(n_iters)
    step_norms = np.empty(n_iters)
    etas = np.empty(n_iters)
    batch_means = np.empty((n_iters, d))
    batch_sq = np.empty(n_iters)

    w_sum = np.zeros(d)
    regret_acc = 0.0
    mu = problem.stationary_mean
    quad = problem.stationary_quad_term
    a_wstar = A @ w_star
    comp_const = float(w_star @ a_wstar)

    def pop_loss_of(v):
        diff = v - mu
        return float(diff @ A @ diff) + quad

    # prefetch raw samples in chunks; take() consumption is call-pattern
    # independent, so this is bit-identical to per-step draws
    chunk_steps = max(1, min(n_iters, 65_536 // max(per_block * d, 1)))
    buffer = stream.take(min(chunk_steps, n_iters) * per_block)
    buf_base = 0  # first step covered by the buffer (0-indexed)

    for t in range(1, n_iters + 1):
        offset = (t - 1 - buf_base) * per_block
        if offset >= buffer.shape[0]:
            buf_base = t - 1
            n_next = min(chunk_steps, n_iters - buf_base)
            buffer = stream.take(n_next * per_block)
            offset = 0
        block = buffer[offset:offset + per_block]
        if use_batch:
            data = block
        else:
            data = block[:1]
        D = w[None, :] - data
        DA = D @ A
        losses = np.einsum("bi,bi->b", DA, D)
        loss_t = float(losses.mean())
        grad = 2.0 * DA.mean(axis=0)
        if not np.isfinite(grad).all():
            raise NumericalError(f"non-finite gradient at step {t} "
                                 f"({scheme.label()}); aborting run")
        eta = schedule.rate(t)
        w_next = project(problem, w - eta * grad)

        xbar = data.mean(axis=0)
        sq = float(np.einsum("bi,ij,bj->b", data, A, data).mean())
        comp = comp_const - 2.0 * float(xbar @ a_wstar) + sq
        regret_acc += loss_t - comp

        w_sum += w
        per_step[t - 1] = loss_t
        comp_step[t - 1] = comp
        step_norms[t - 1] = float(np.linalg.norm(w_next - w))
        etas[t - 1] = eta
        batch_means[t - 1] = xbar
        batch_sq[t - 1] = sq

        i = rec_index.get(t)
        if i is not None:
            iterates[i] = w
            averaged[i] = w_sum / t
            pop_losses[i] = pop_loss_of(w)
            post_losses[i] = pop_loss_of(w_next)
            run_regret[i] = regret_acc
        w = w_next

    return Trajectory(
        scheme_label=scheme.label(),
        n_iters=n_iters,
        samples_per_step=per_block,
        record_stride=record_stride,
        recorded_steps=rec_steps,
        iterates=iterates,
        averaged_iterates=averaged,
        population_losses=pop_losses,
        post_update_population_losses=post_losses,
        running_regret=run_regret,
        per_step_losses=per_step,
        comparator_step_losses=comp_step,
        step_norms=step_norms,
        etas=etas,
        batch_means=batch_means,
        batch_sq_terms=batch_sq,
        final_iterate=w,
    )


def regret(trajectory: Trajectory, problem: QuadraticProblem, w_star) -> float:
    """Cumulative excess batch loss of the iterates against ``w_star``.

    Evaluated on the data blocks actually used, from the retained
    per-step sufficient statistics.
    """
    w_star = np.asarray(w_star, dtype=float).ravel()
    if w_star.shape != (problem.dim,):
        raise ValueError("comparator dimension mismatch")
    A = problem.matrix
    const = float(w_star @ A @ w_star)
    comp = const - 2.0 * (trajectory.batch_means @ (A @ w_star)) + trajectory.batch_sq_terms
    return float(trajectory.per_step_losses.sum() - comp.sum())


# ---------------------------------------------------------------------------
# Dependence-induced bias of a mini-batch located tau batches ahead


class BiasEstimate(NamedTuple):
    estimate: float
    stderr: float


def _gap_indices(tau: int, batch_size: int) -> np.ndarray:
    """Raw-sample gaps from the conditioning point to batch tau's samples."""
    B = int(batch_size)
    return (int(tau) - 1) * B + np.arange(1, B + 1, dtype=np.int64)


def estimate_bias(bundle: ProblemBundle, w, tau: int, batch_size: int,
                  conditioning_prefix_len: int = 1, n_mc: int = 10_000,
                  seed: int | None = None) -> BiasEstimate:
    """Monte-Carlo estimate of |E[F(w; x_tau) | reset] - f(w)|.

    The stream is conditioned on a full internal-state reset (a designated
    reference state: a fresh hold of the zero vector for renewal streams,
    state 0 for finite chains), then ``n_mc`` independent continuations are
    simulated and the batch-averaged loss of the batch located ``tau``
    batches ahead is recorded.  Returns the absolute deviation of the Monte
    Carlo mean from the population risk together with the standard error of
    the mean.

    For renewal streams the batch loss is evaluated conditionally on the
    renewal pattern (values of fresh holds integrate to the population risk
    in closed form), which preserves unbiasedness and removes the value
    noise; finite chains and iid streams use the plain sample average.
    """
    if n_mc < 1000:
        raise ValueError("need n_mc >= 1000 continuations")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if conditioning_prefix_len < 1:
        raise ValueError("conditioning prefix must have length >= 1")
    problem = bundle.problem
    w = np.asarray(w, dtype=float).ravel()
    gaps = _gap_indices(tau, batch_size)
    spec = bundle.stream_spec
    if isinstance(spec, WrappedSpec):
        gaps = gaps * spec.subsample_period
        spec = spec.inner
    if seed is None:
        seed = derive_seed(spec.seed, 0xB1A5, int(tau), int(batch_size), int(n_mc))
    rng = np.random.default_rng(seed)
    f_w = population_loss(problem, w)

    if isinstance(spec, IidUniformSpec):
        draws = rng.random((n_mc, len(gaps), spec.d))
        D = w[None, None, :] - draws
        losses = np.einsum("nbi,ij,nbj->nb", D, problem.matrix, D).mean(axis=1)
        mean, se = float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(n_mc))
        return BiasEstimate(abs(mean - f_w), se)

    if isinstance(spec, HoldTimeUniformSpec):
        law = hold_duration_law(spec.alpha, spec.max_hold)
        durations = law.sample_durations(rng, n_mc)
        # The reset hold (value 0_d, age 0) covers gap g iff its total
        # duration exceeds g; later holds carry fresh uniform values whose
        # conditional batch loss is exactly f(w).
        frac = (durations[:, None] > gaps[None, :]).mean(axis=1)
        delta = sample_loss(problem, w, np.zeros(problem.dim)) - f_w
        vals = f_w + delta * frac
        mean, se = float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc))
        return BiasEstimate(abs(mean - f_w), se)

    if isinstance(spec, FiniteChainSpec):
        P = spec.transition_matrix
        E = spec.emission_matrix
        row_cdf = np.cumsum(P, axis=1)
        states = np.zeros(n_mc, dtype=np.int64)  # reference state 0
        max_gap = int(gaps[-1])
        gap_set = {int(g): j for j, g in enumerate(gaps)}
        hits = np.empty((n_mc, len(gaps)), dtype=np.int64)
        for step in range(1, max_gap + 1):
            u = rng.random(n_mc)
            states = (u[:, None] > row_cdf[states]).sum(axis=1)
            j = gap_set.get(step)
            if j is not None:
                hits[:, j] = states
        D = w[None, None, :] - E[hits]
        losses = np.einsum("nbi,ij,nbj->nb", D, problem.matrix, D).mean(axis=1)
        mean, se = float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(n_mc))
        return BiasEstimate(abs(mean - f_w), se)

    raise TypeError(f"bias estimation not supported for {type(spec).__name__}")


def exact_bias_finite_chain(problem: QuadraticProblem, spec: FiniteChainSpec,
                            w, tau: int, batch_size: int,
                            reference_state: int = 0) -> float:
    """Exact |E[F(w; x_tau) | reset] - f(w)| by transition-matrix powers."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    w = np.asarray(w, dtype=float).ravel()
    P = validate_transition_matrix(spec.transition_matrix)
    E = spec.emission_matrix
    D = w[None, :] - E
    losses_by_state = np.einsum("si,ij,sj->s", D, problem.matrix, D)
    gaps = set(int(g) for g in _gap_indices(tau, batch_size))
    v = np.zeros(P.shape[0])
    v[reference_state] = 1.0
    total = 0.0
    for step in range(1, max(gaps) + 1):
        v = v @ P
        if step in gaps:
            total += float(v @ losses_by_state)
    mean = total / batch_size
    return abs(mean - population_loss(problem, w))
