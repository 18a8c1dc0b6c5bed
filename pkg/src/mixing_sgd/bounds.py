"""Evaluators for the theoretical guarantees, as pure arithmetic.

Each function computes the right-hand side of one high-probability bound
exactly as displayed, as a function of the problem constants: the
gradient-norm bound G, the domain diameter R, the smoothness constant L,
the failure probability delta, the decoupling lag tau that separates an
iterate from a future batch, and partial sums of the mixing coefficient.
Asymptotic sample-complexity orders are kept separately as symbolic
exponent records, since O(.) statements are not testable as arithmetic.

Probability outputs are clamped to [0, 1]; the underlying inequalities are
vacuous above 1 and clamping keeps the evaluators composable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mixing.models import MixingModel, tail_sum

__all__ = [
    "BoundParams",
    "minibatch_bias_bound",
    "sgd_error_bound",
    "subsampled_error_bound",
    "minibatch_error_bound",
    "minibatch_regret_bound",
    "suggested_step_size",
    "gradient_variance_bound",
    "azuma_tail_bound",
    "dependent_bernstein_tail",
    "ComplexityOrder",
    "sample_complexity_order",
    "SCHEMES",
    "REGIMES",
]


@dataclass(frozen=True)
class BoundParams:
    """Constants entering the bound evaluators.

    ``step_bound_sum`` is the cumulative bound on per-step iterate movement
    (sum of kappa(t) over the first n - tau + 1 steps; kappa(t) = eta_t * G
    under projected SGD).  ``regret_value`` is an observed or bounded
    regret.  ``init_dist_sq`` is ||w(1) - w*||^2.
    """

    grad_bound: float            # G
    diameter: float              # R
    model: MixingModel
    n_steps: int = 1
    batch_size: int = 1
    tau: int = 1
    delta: float = 0.1
    dim: int = 1
    eta: float = 0.1
    smoothness: float = 0.0      # L
    step_bound_sum: float = 0.0
    regret_value: float = 0.0
    init_dist_sq: float = 0.0

    def __post_init__(self):
        if self.grad_bound < 0 or self.diameter < 0:
            raise ValueError("G and R must be nonnegative")
        if self.n_steps < 1 or self.batch_size < 1 or self.tau < 1 or self.dim < 1:
            raise ValueError("n_steps, batch_size, tau and dim must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.smoothness < 0 or self.step_bound_sum < 0 or self.init_dist_sq < 0:
            raise ValueError("L, step_bound_sum and init_dist_sq must be nonnegative")


def minibatch_bias_bound(grad_bound: float, diameter: float, batch_size: int,
                         tau: int, model: MixingModel) -> float:
    """Bias of a batch located tau batches ahead: (G R / B) sum_i phi(tau B + i).

    ``tau = 0`` evaluates the saturated window sum_{i<=B} phi(i) that
    captures the large-B bias regimes.
    """
    if grad_bound < 0 or diameter < 0:
        raise ValueError("G and R must be nonnegative")
    if tau < 0 or batch_size < 1:
        raise ValueError("tau must be >= 0 and batch_size >= 1")
    B = int(batch_size)
    return grad_bound * diameter / B * tail_sum(model, int(tau), B)


def sgd_error_bound(p: BoundParams) -> float:
    """High-probability error of the averaged iterate for plain online SGD.

    Five terms: regret rate, accumulated step-movement, the boundary term,
    the martingale deviation and the mixing remainder phi(tau) G R.
    """
    G, R, n, tau = p.grad_bound, p.diameter, p.n_steps, p.tau
    return (p.regret_value / n
            + (tau - 1) * G * p.step_bound_sum / n
            + 2.0 * (tau - 1) * G * R / n
            + 2.0 * G * R * math.sqrt(2.0 * tau / n * math.log(tau / p.delta))
            + p.model.phi(tau) * G * R)


def subsampled_error_bound(p: BoundParams, period: int) -> float:
    """Same terms as :func:`sgd_error_bound` with the mixing remainder at
    lag period * tau, the mixing coefficient of the kept stream."""
    if period < 1:
        raise ValueError("period must be >= 1")
    G, R = p.grad_bound, p.diameter
    base = sgd_error_bound(p) - p.model.phi(p.tau) * G * R
    return base + p.model.phi(int(period) * p.tau) * G * R


def _minibatch_lambda(p: BoundParams) -> float:
    """Inner deviation scale of the mini-batch concentration step."""
    G, R, B = p.grad_bound, p.diameter, p.batch_size
    log4n = math.log(4.0 * p.n_steps / p.delta)
    s0 = tail_sum(p.model, 0, B)
    gr = G * R
    return (2.0 / 3.0 * gr / B * log4n
            + math.sqrt(4.0 / 9.0 * gr * gr / B * log4n ** 2
                        + (4.0 * gr * gr + 16.0 * gr * gr * s0) * log4n))


def minibatch_error_bound(p: BoundParams) -> float:
    """Explicit-constant bound on the cumulative excess risk of mini-batch SGD.

    Bounds sum_{t<=n} [f(w(t)) - f(w*)]; divide by n for the averaged
    iterate.  The ``tau = 1`` case drops the two trailing terms.
    """
    G, R, n, B, tau = p.grad_bound, p.diameter, p.n_steps, p.batch_size, p.tau
    lam = _minibatch_lambda(p)
    log4n = math.log(4.0 * n / p.delta)
    log4tau = math.log(4.0 * tau / p.delta)
    bias_term = G * R * n / B * tail_sum(p.model, tau, B)
    dev_term = math.sqrt(2.0 * tau * n / B * lam * log4tau * log4n)
    return (bias_term + dev_term + p.regret_value
            + G * (tau - 1) * p.step_bound_sum
            + G * R * (tau - 1))


def gradient_variance_bound(p: BoundParams) -> float:
    """High-probability bound on ||batch gradient - population gradient||^2.

    [(268/3) G^2 + 256 G^2 sum_{j<=B} phi(j)] log(2d/delta)/B
    + 2 G^2 (sum_{i<=B} phi(i) / B)^2.
    """
    G, B = p.grad_bound, p.batch_size
    s0 = tail_sum(p.model, 0, B)
    log2d = math.log(2.0 * p.dim / p.delta)
    return ((268.0 / 3.0 * G * G + 256.0 * G * G * s0) * log2d / B
            + 2.0 * G * G * (s0 / B) ** 2)


def _regret_bracket(p: BoundParams) -> float:
    """Per-step deviation bracket of the mini-batch regret bound."""
    G, B = p.grad_bound, p.batch_size
    s0 = tail_sum(p.model, 0, B)
    log2dT = math.log(2.0 * p.dim * p.n_steps / p.delta)
    return ((268.0 / 3.0 * G * G + 256.0 * G * G * s0) * log2dT / B
            + 2.0 * G * G * (s0 / B) ** 2)


def minibatch_regret_bound(p: BoundParams, loss_sum: float = 0.0) -> float:
    """High-probability regret of mini-batch SGD at step size ``p.eta``.

    ||w(1)-w*||^2/(2 eta) + eta T [bracket] + 2 eta L sum_t (f(w(t))-f(w*)).
    The trailing term takes the observed cumulative excess risk
    ``loss_sum``; schedule selection may drop it (the default 0).
    """
    if loss_sum < 0:
        raise ValueError("loss_sum must be nonnegative")
    return (p.init_dist_sq / (2.0 * p.eta)
            + p.eta * p.n_steps * _regret_bracket(p)
            + 2.0 * p.eta * p.smoothness * loss_sum)


def suggested_step_size(p: BoundParams) -> float:
    """Step size equating the two leading regret terms:
    sqrt( (||w(1)-w*||^2 / 2) / (T * bracket) )."""
    if p.init_dist_sq <= 0:
        raise ValueError("init_dist_sq must be positive to pick a step size")
    bracket = _regret_bracket(p)
    return math.sqrt(p.init_dist_sq / 2.0 / (p.n_steps * bracket))


def azuma_tail_bound(lam: float, alphas, tail_probs) -> float:
    """Tail bound for a martingale-difference sum with escape terms.

    P(|Y - EY| >= lam * sqrt(sum alpha_t^2)) <= 2 exp(-lam^2/2)
    + sum_t P(|X_t| >= alpha_t); ``tail_probs`` carries those escape
    probabilities.  Clamped to [0, 1].
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    alphas = [float(a) for a in alphas]
    tail_probs = [float(q) for q in tail_probs]
    if any(a < 0 for a in alphas):
        raise ValueError("alphas must be nonnegative")
    if any(not 0 <= q <= 1 for q in tail_probs):
        raise ValueError("tail probabilities must lie in [0, 1]")
    if len(alphas) != len(tail_probs):
        raise ValueError("alphas and tail_probs must have equal length")
    val = 2.0 * math.exp(-lam * lam / 2.0) + sum(tail_probs)
    return min(1.0, val)


def dependent_bernstein_tail(t: float, v: float, q: float, m: float,
                             n: int) -> float:
    """Bernstein-type tail for sums of a centered dependent process
    (Delyon 2009 form): P(sum Z_i >= t) <= exp(-t^2 / (2(v+2q) + 2tm/3)).

    ``v`` sums conditional second moments, ``q`` the cross-term couplings,
    ``m`` bounds individual summands, ``n`` is the summand count the three
    were computed over (metadata; the arithmetic uses only t, v, q, m).
    """
    if min(t, v, q, m) < 0:
        raise ValueError("t, v, q and m must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    if t == 0:
        return 1.0
    denom = 2.0 * (v + 2.0 * q) + 2.0 * t * m / 3.0
    if denom <= 0:
        raise ValueError("zero denominator with t > 0")
    return min(1.0, math.exp(-t * t / denom))


# ---------------------------------------------------------------------------
# Sample-complexity orders


SCHEMES = ("plain", "subsampled", "minibatch")
REGIMES = ("geometric", "fast_algebraic", "slow_algebraic")


@dataclass(frozen=True)
class ComplexityOrder:
    """Symbolic record of a sample-complexity order.

    Reads as O(eps^eps_exponent * (log 1/eps)^log_exponent), with
    ``has_log_tilde`` marking orders stated up to unspecified logarithmic
    factors.
    """

    scheme: str
    regime: str
    theta: float
    eps_exponent: float
    log_exponent: float
    has_log_tilde: bool

    def as_dict(self) -> dict:
        return {"eps_exp": self.eps_exponent, "log_exp": self.log_exponent,
                "tilde": self.has_log_tilde}


def sample_complexity_order(scheme: str, regime: str, theta: float) -> ComplexityOrder:
    """Exponents of the sample complexity for reaching excess risk eps.

    Nine (scheme x regime) entries; theta parameterizes the decay of the
    mixing coefficient (exp(-k^theta) geometric, k^-theta algebraic with
    theta >= 1 fast and 0 < theta < 1 slow).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if regime == "fast_algebraic" and theta < 1:
        raise ValueError("fast algebraic regime requires theta >= 1")
    if regime == "slow_algebraic" and theta >= 1:
        raise ValueError("slow algebraic regime requires theta < 1")

    if regime == "geometric":
        table = {"plain": (-2.0, 2.0 / theta, False),
                 "subsampled": (-2.0, 1.0 / theta, False),
                 "minibatch": (-2.0, 0.0, False)}
    elif regime == "fast_algebraic":
        table = {"plain": (-2.0 - 2.0 / theta, 0.0, False),
                 "subsampled": (-2.0 - 1.0 / theta, 0.0, False),
                 "minibatch": (-2.0, 0.0, True)}
    else:
        table = {"plain": (-2.0 - 2.0 / theta, 0.0, False),
                 "subsampled": (-2.0 - 1.0 / theta, 0.0, False),
                 "minibatch": (-1.0 - 1.0 / theta, 0.0, False)}
    eps_exp, log_exp, tilde = table[scheme]
    return ComplexityOrder(scheme=scheme, regime=regime, theta=theta,
                           eps_exponent=eps_exp, log_exponent=log_exp,
                           has_log_tilde=tilde)
