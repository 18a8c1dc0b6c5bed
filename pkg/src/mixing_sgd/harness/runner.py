"""Experiment orchestration: seeded trials, aggregation, CSV/JSON emission.

Outputs are byte-identical across reruns with the same config and seed:
trial seeds are splitmix-derived from (base_seed, trial index, run-block
content), aggregation merges immutable per-trial summaries by index, and
floats are printed with shortest round-trip repr.  Trials may fan out to a
process pool; the merge is order-independent, so parallel and serial
execution produce the same bytes.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..bounds import (
    BoundParams,
    azuma_tail_bound,
    dependent_bernstein_tail,
    gradient_variance_bound,
    minibatch_bias_bound,
    minibatch_error_bound,
    minibatch_regret_bound,
    sample_complexity_order,
    sgd_error_bound,
    subsampled_error_bound,
    suggested_step_size,
)
from ..errors import ConfigError
from ..mixing.empirical import estimate_phi_profile
from ..mixing.markov import exact_phi_finite_chain, subsample_kernel
from ..mixing.models import Algebraic, Geometric, MixingModel, tail_sum
from ..mixing.streams import (
    FiniteChainSpec,
    HoldTimeUniformSpec,
    IidUniformSpec,
    StreamSpec,
    WrappedSpec,
    make_stream,
    tuned_hold_spec,
)
from ..objective import ProblemBundle, QuadraticProblem
from ..optim import (
    Constant,
    InvSqrt,
    MiniBatch,
    Plain,
    Subsampled,
    TheoryMiniBatch,
    estimate_bias,
    run,
)
from ..seeding import content_key, derive_seed
from .config import ExperimentConfig, RunBlock, model_label, nominal_stream_model, parse_model

__all__ = [
    "reference_minibatch_rate",
    "cmd_bias_sweep",
    "cmd_compare",
    "cmd_mixing_check",
    "cmd_bounds_report",
    "TrialSummary",
    "BIAS_CSV_HEADER",
    "COMPARE_CSV_HEADER",
    "MIXING_CHECK_CSV_HEADER",
]

BIAS_CSV_HEADER = "mix_rate,tau,B,bias,stderr"
COMPARE_CSV_HEADER = "scheme,samples,mean_loss,stderr_loss"
MIXING_CHECK_CSV_HEADER = "k,phi_exact_or_est,stderr,model_value,phi_subsampled,stderr_subsampled"

# Calibration of the reference mini-batch rate: with B = 100 and the
# slow-algebraic theta = 1/2 model the factor sqrt(B / sum phi) is scaled
# to equal B^(1/4), the conventional rounding of that square root.
_REFERENCE_NORM = 100.0 ** 0.25 / math.sqrt(100.0 / tail_sum(Algebraic(0.5), 0, 100))


def reference_minibatch_rate(base: float, batch_size: int, model: MixingModel) -> float:
    """Constant mini-batch step size base * sqrt(B / sum_{j<=B} phi(j)),
    normalized so (B=100, algebraic theta=1/2) gives base * 100^(1/4)."""
    s = tail_sum(model, 0, batch_size)
    if s <= 0:
        raise ConfigError("reference mini-batch rate needs a nonzero mixing sum")
    return base * math.sqrt(batch_size / s) * _REFERENCE_NORM


def _respec_seed(spec: StreamSpec, seed: int) -> StreamSpec:
    import dataclasses
    if isinstance(spec, WrappedSpec):
        return WrappedSpec(inner=_respec_seed(spec.inner, seed),
                           subsample_period=spec.subsample_period)
    return dataclasses.replace(spec, seed=seed)


def _build_scheme(block: RunBlock):
    if block.scheme_kind == "plain":
        return Plain()
    if block.scheme_kind == "subsampled":
        return Subsampled(period=block.period)
    return MiniBatch(batch_size=block.batch_size)


def _build_schedule(block: RunBlock, n_iters: int, model: MixingModel):
    if block.lr_kind == "constant":
        return Constant(value=block.lr_value)
    if block.lr_kind == "inv_sqrt":
        return InvSqrt(scale=block.lr_value)
    if block.lr_kind == "theory_minibatch":
        return TheoryMiniBatch(scale=block.lr_value, horizon=n_iters,
                               batch_size=block.batch_size, model=model)
    return Constant(value=reference_minibatch_rate(
        block.lr_value, block.batch_size, model))


@dataclass(frozen=True)
class TrialSummary:
    """Immutable per-trial result; reproducible from (config, trial index).

    ``wall_time`` is diagnostic only and never written to output files.
    """

    trial_index: int
    final_population_loss: float
    loss_curve: np.ndarray
    regret: float
    wall_time: float


def _run_one_trial(problem: QuadraticProblem, spec: StreamSpec, block: RunBlock,
                   model: MixingModel, init_point: np.ndarray, n_iters: int,
                   record_stride: int, seed: int, trial_index: int) -> TrialSummary:
    t0 = time.perf_counter()
    stream = make_stream(_respec_seed(spec, seed))
    scheme = _build_scheme(block)
    schedule = _build_schedule(block, n_iters, model)
    traj = run(problem, stream, scheme, schedule, n_iters,
               initial_point=init_point, record_stride=record_stride)
    return TrialSummary(
        trial_index=trial_index,
        final_population_loss=float(traj.post_update_population_losses[-1]),
        loss_curve=traj.post_update_population_losses.copy(),
        regret=float(traj.running_regret[-1]),
        wall_time=time.perf_counter() - t0,
    )


def _trial_args(cfg: ExperimentConfig, block: RunBlock, model, n_iters,
                record_stride):
    key = content_key(block.canonical_text())
    for trial in range(cfg.compare_n_trials):
        seed = derive_seed(cfg.base_seed, trial, key)
        yield (cfg.problem, cfg.stream_spec, block, model, cfg.init_point,
               n_iters, record_stride, seed, trial)


def _map_trials(args_iter, threads: int):
    args = list(args_iter)
    if threads <= 1:
        return [_run_one_trial(*a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_one_trial, *a) for a in args]
        results = [f.result() for f in futures]
    results.sort(key=lambda s: s.trial_index)
    return results


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Commands


def cmd_bias_sweep(cfg: ExperimentConfig, verbose: bool = False) -> str:
    """Bias of the batch located tau batches ahead, over a (rate, tau, B) grid.

    Rows: mix_rate,tau,B,bias,stderr.  For hold-time streams each grid rate
    gets its tuned stream; other stream kinds are used as configured, with
    the rate column echoing the grid.
    """
    rows = [BIAS_CSV_HEADER]
    base_is_hold = isinstance(cfg.stream_spec, HoldTimeUniformSpec)
    for ri, rate in enumerate(cfg.bias_mix_rates):
        if base_is_hold:
            spec = tuned_hold_spec(rate, d=cfg.problem.dim,
                                   seed=derive_seed(cfg.base_seed, 0xB5, ri),
                                   max_hold=cfg.stream_spec.max_hold)
        else:
            spec = cfg.stream_spec
        bundle = ProblemBundle(problem=cfg.problem, stream_spec=spec)
        for tau in cfg.bias_taus:
            for B in cfg.bias_batch_sizes:
                est = estimate_bias(bundle, cfg.bias_point, tau, B,
                                    n_mc=cfg.bias_n_mc)
                rows.append(f"{rate!r},{tau},{B},{_fmt(est.estimate)},{_fmt(est.stderr)}")
                if verbose:
                    print(f"bias r={rate} tau={tau} B={B}: "
                          f"{est.estimate:.3g} +- {est.stderr:.3g}",
                          file=sys.stderr, flush=True)
    return "\n".join(rows) + "\n"


def cmd_compare(cfg: ExperimentConfig, verbose: bool = False) -> str:
    """Mean population-loss curves of all run blocks at equal sample budgets.

    Curves are aligned on raw samples consumed; checkpoints are common
    multiples of every block's per-step consumption, so no interpolation
    happens.  Rows: scheme,samples,mean_loss,stderr_loss.
    """
    if len(cfg.runs) < 2:
        raise ConfigError("compare needs at least 2 [run] blocks")
    budget = cfg.compare_budget
    stride = 1
    for block in cfg.runs:
        stride = math.lcm(stride, block.samples_per_step)
    if budget < stride:
        raise ConfigError(f"budget {budget} below the common checkpoint stride {stride}")
    budget -= budget % stride
    model = nominal_stream_model(cfg)
    checkpoints = np.arange(stride, budget + 1, stride, dtype=np.int64)

    rows = [COMPARE_CSV_HEADER]
    for block in cfg.runs:
        per = block.samples_per_step
        n_iters = block.n_iters if block.n_iters is not None else budget // per
        if n_iters * per < budget:
            raise ConfigError(f"run block {block.canonical_text()!r} covers "
                              f"{n_iters * per} samples, below budget {budget}")
        record_stride = stride // per
        summaries = _map_trials(
            _trial_args(cfg, block, model, n_iters, record_stride), cfg.threads)
        n_ck = checkpoints.size
        curves = np.stack([s.loss_curve[:n_ck] for s in summaries])
        mean = curves.mean(axis=0)
        if curves.shape[0] > 1:
            se = curves.std(axis=0, ddof=1) / math.sqrt(curves.shape[0])
        else:
            se = np.zeros(n_ck)
        label = _scheme_label(block)
        if verbose:
            total = sum(s.wall_time for s in summaries)
            print(f"{label}: {len(summaries)} trials, {total:.1f}s, "
                  f"final {mean[-1]:.4g} +- {se[-1]:.2g}", file=sys.stderr, flush=True)
        for j, samples in enumerate(checkpoints):
            rows.append(f"{label},{samples},{_fmt(mean[j])},{_fmt(se[j])}")
    return "\n".join(rows) + "\n"


def _scheme_label(block: RunBlock) -> str:
    return _build_scheme(block).label()


def _projected_for_check(spec: StreamSpec) -> StreamSpec:
    """One-coordinate twin of uniform-marginal streams for histogramming.

    The renewal structure of hold-time and iid streams does not depend on
    the coordinate count, and a multi-coordinate histogram partition is
    both statistically and memory-wise hopeless, so the mixing check runs
    on a d=1 copy with the same seed and duration law.
    """
    import dataclasses
    if isinstance(spec, WrappedSpec):
        return WrappedSpec(inner=_projected_for_check(spec.inner),
                           subsample_period=spec.subsample_period)
    if isinstance(spec, (HoldTimeUniformSpec, IidUniformSpec)) and spec.d > 1:
        return dataclasses.replace(spec, d=1)
    return spec


def cmd_mixing_check(cfg: ExperimentConfig, verbose: bool = False) -> str:
    """Mixing coefficients of the configured stream and its subsampled twin.

    Finite chains use exact matrix powers (stderr 0); other streams use the
    Monte-Carlo estimator on a one-coordinate twin (see
    :func:`_projected_for_check`).  The subsampled columns evaluate the
    wrapped stream at the same lags, which for finite chains equals the
    base chain at lag period * k exactly.
    """
    lags = list(cfg.check_lags)
    period = cfg.check_subsample_period
    model = nominal_stream_model(cfg) if cfg.check_model is None else cfg.check_model
    spec = _projected_for_check(cfg.stream_spec)
    base = spec.inner if isinstance(spec, WrappedSpec) else spec
    rows = [MIXING_CHECK_CSV_HEADER]
    if isinstance(base, FiniteChainSpec):
        P = base.transition_matrix
        Pr = subsample_kernel(P, period)
        for k in lags:
            phi = exact_phi_finite_chain(P, k)
            phi_sub = exact_phi_finite_chain(Pr, k)
            rows.append(f"{k},{_fmt(phi)},{_fmt(0.0)},{_fmt(model.phi(k))},"
                        f"{_fmt(phi_sub)},{_fmt(0.0)}")
    else:
        ests = estimate_phi_profile(spec, lags, cfg.check_n_replicates,
                                    burn_in=cfg.check_burn_in,
                                    n_continuations=cfg.check_n_continuations)
        sub_spec = WrappedSpec(inner=base, subsample_period=period)
        sub_ests = estimate_phi_profile(sub_spec, lags, cfg.check_n_replicates,
                                        burn_in=cfg.check_burn_in,
                                        n_continuations=cfg.check_n_continuations)
        for e, se_ in zip(ests, sub_ests):
            rows.append(f"{e.k},{_fmt(e.value)},{_fmt(e.stderr)},"
                        f"{_fmt(model.phi(e.k))},{_fmt(se_.value)},{_fmt(se_.stderr)}")
            if verbose:
                print(f"phi({e.k}) = {e.value:.4g} +- {e.stderr:.2g}",
                      file=sys.stderr, flush=True)
    return "\n".join(rows) + "\n"


def cmd_bounds_report(cfg: ExperimentConfig, verbose: bool = False) -> str:
    """Evaluate every bound at the configured parameters; JSON with inputs echoed."""
    sec = dict(cfg.bounds_section)
    model = parse_model(sec["model"]) if "model" in sec else nominal_stream_model(cfg)
    problem = cfg.problem

    def fget(key, default):
        try:
            return float(sec.get(key, default))
        except ValueError as exc:
            raise ConfigError(f"bad [bounds] value for {key}: {exc}") from exc

    def iget(key, default):
        try:
            return int(sec.get(key, default))
        except ValueError as exc:
            raise ConfigError(f"bad [bounds] value for {key}: {exc}") from exc

    G = fget("grad_bound", problem.grad_bound)
    R = fget("diameter", problem.domain_diameter)
    L = fget("smoothness", problem.smoothness)
    try:
        params = BoundParams(
            grad_bound=G, diameter=R, model=model,
            n_steps=iget("n_steps", 1000), batch_size=iget("batch_size", 100),
            tau=iget("tau", 1), delta=fget("delta", 0.1),
            dim=iget("dim", problem.dim), eta=fget("eta", 0.01),
            smoothness=L, step_bound_sum=fget("step_bound_sum", 0.0),
            regret_value=fget("regret_value", 0.0),
            init_dist_sq=fget("init_dist_sq",
                              float(np.sum((cfg.init_point - problem.stationary_mean) ** 2))),
        )
    except ValueError as exc:
        raise ConfigError(f"bad [bounds] section: {exc}") from exc
    period = iget("period", cfg.check_subsample_period)
    loss_sum = fget("loss_sum", 0.0)
    azuma_lambda = fget("azuma_lambda", 2.0)
    bern_t = fget("bernstein_t", 1.0)
    bern_v = fget("bernstein_v", 1.0)
    bern_q = fget("bernstein_q", 0.0)
    bern_m = fget("bernstein_m", 1.0)

    report = {
        "inputs": {
            "grad_bound": G, "diameter": R, "smoothness": L,
            "model": model_label(model), "n_steps": params.n_steps,
            "batch_size": params.batch_size, "tau": params.tau,
            "delta": params.delta, "dim": params.dim, "eta": params.eta,
            "step_bound_sum": params.step_bound_sum,
            "regret_value": params.regret_value,
            "init_dist_sq": params.init_dist_sq, "period": period,
            "loss_sum": loss_sum, "azuma_lambda": azuma_lambda,
            "bernstein": {"t": bern_t, "v": bern_v, "q": bern_q, "m": bern_m},
        },
        "bounds": {
            "minibatch_bias_bound": minibatch_bias_bound(
                G, R, params.batch_size, params.tau, model),
            "sgd_error_bound": sgd_error_bound(params),
            "subsampled_error_bound": subsampled_error_bound(params, period),
            "minibatch_error_bound": minibatch_error_bound(params),
            "gradient_variance_bound": gradient_variance_bound(params),
            "minibatch_regret_bound": minibatch_regret_bound(params, loss_sum),
            "suggested_step_size": suggested_step_size(params),
            "azuma_tail_bound": azuma_tail_bound(
                azuma_lambda, [1.0] * params.n_steps, [0.0] * params.n_steps),
            "dependent_bernstein_tail": dependent_bernstein_tail(
                bern_t, bern_v, bern_q, bern_m, params.n_steps),
        },
        "complexity_orders": _complexity_block(model),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _complexity_block(model: MixingModel) -> dict:
    if isinstance(model, Geometric):
        regime, theta = "geometric", model.theta
    elif isinstance(model, Algebraic):
        regime = "fast_algebraic" if model.theta >= 1 else "slow_algebraic"
        theta = model.theta
    else:
        return {}
    return {scheme: sample_complexity_order(scheme, regime, theta).as_dict()
            for scheme in ("plain", "subsampled", "minibatch")}
