"""SGD schemes: equivalences, accounting, invariants, regret."""

import numpy as np
import pytest

from mixing_sgd import (
    Constant,
    FiniteChainSpec,
    IidUniformSpec,
    InvSqrt,
    MiniBatch,
    Plain,
    Subsampled,
    TheoryMiniBatch,
    make_stream,
    regret,
    run,
    tuned_hold_spec,
    uniform_quadratic,
)
from mixing_sgd.errors import NumericalError
from mixing_sgd.mixing.models import Algebraic
from mixing_sgd.mixing.streams import Stream
from mixing_sgd.objective import default_experiment_problem


def _scalar_problem(a=1.0, center=0.5, radius=5.0):
    return uniform_quadratic(np.array([[a]]), np.array([center]), radius)


def _const_stream(value):
    spec = FiniteChainSpec(transition=((1.0,),), emission=((value,),), seed=0)
    return make_stream(spec)


def test_zero_matrix_keeps_iterates_fixed():
    p = uniform_quadratic(np.zeros((2, 2)), np.full(2, 0.5), 5.0)
    stream = make_stream(IidUniformSpec(d=2, seed=1))
    traj = run(p, stream, Plain(), Constant(0.5), 200, initial_point=[0.1, 0.2])
    assert np.allclose(traj.iterates, [0.1, 0.2])
    assert np.allclose(traj.final_iterate, [0.1, 0.2])
    assert np.all(traj.step_norms == 0.0)


def test_one_step_hand_computation():
    # w(1)=0, xi=1, eta=0.1, grad = 2(w - xi) = -2, so w(2) = 0.2
    p = _scalar_problem()
    traj = run(p, _const_stream(1.0), Plain(), Constant(0.1), 1,
               initial_point=[0.0])
    assert traj.final_iterate[0] == pytest.approx(0.2, rel=1e-15)
    assert traj.per_step_losses[0] == pytest.approx(1.0, rel=1e-15)


def test_scheme_equivalence_bit_for_bit():
    p = default_experiment_problem(3)
    spec = tuned_hold_spec(2.0, d=3, seed=123)
    trajs = [run(p, make_stream(spec), scheme, InvSqrt(0.05), 10_000)
             for scheme in (Plain(), Subsampled(1), MiniBatch(1))]
    for other in trajs[1:]:
        assert np.array_equal(trajs[0].iterates, other.iterates)
        assert np.array_equal(trajs[0].per_step_losses, other.per_step_losses)
        assert np.array_equal(trajs[0].final_iterate, other.final_iterate)


def test_sample_accounting():
    p = default_experiment_problem(2)
    spec = IidUniformSpec(d=2, seed=9)
    for scheme, per in ((Plain(), 1), (Subsampled(7), 7), (MiniBatch(13), 13)):
        traj = run(p, make_stream(spec), scheme, Constant(0.01), 50)
        assert traj.samples_per_step == per
        assert np.array_equal(traj.samples_consumed,
                              per * np.arange(1, 51, dtype=np.int64))


def test_subsampled_uses_first_of_each_block():
    p = default_experiment_problem(2)
    spec = IidUniformSpec(d=2, seed=31)
    raw = make_stream(spec).take(30)
    traj = run(p, make_stream(spec), Subsampled(3), Constant(0.05), 10)
    assert np.array_equal(traj.batch_means, raw[0::3])


def test_step_norm_bounded_by_eta_G():
    p = default_experiment_problem(4)
    spec = tuned_hold_spec(2.0, d=4, seed=5)
    traj = run(p, make_stream(spec), Plain(), InvSqrt(0.3), 5_000,
               initial_point=np.full(4, 4.0))
    assert np.all(traj.step_norms <= traj.etas * p.grad_bound + 1e-9)
    # the step-norm bound sequence eta_t * G is non-increasing for InvSqrt
    assert np.all(np.diff(traj.etas) <= 0)


def test_iterates_stay_in_domain():
    p = uniform_quadratic(np.eye(3), np.full(3, 0.5), 0.75)
    spec = IidUniformSpec(d=3, seed=2)
    traj = run(p, make_stream(spec), MiniBatch(4), Constant(5.0), 2_000,
               initial_point=np.zeros(3))
    dist = np.linalg.norm(traj.iterates - p.domain_center, axis=1)
    assert dist.max() <= 0.75 + 1e-9
    assert np.linalg.norm(traj.final_iterate - p.domain_center) <= 0.75 + 1e-9


def test_averaged_iterate_curve_is_running_mean():
    p = default_experiment_problem(3)
    spec = IidUniformSpec(d=3, seed=77)
    traj = run(p, make_stream(spec), Plain(), InvSqrt(0.1), 500)
    means = np.cumsum(traj.iterates, axis=0) / np.arange(1, 501)[:, None]
    assert np.abs(traj.averaged_iterates - means).max() <= 1e-10


def test_record_stride_thins_curves():
    p = default_experiment_problem(2)
    spec = IidUniformSpec(d=2, seed=4)
    traj = run(p, make_stream(spec), Plain(), Constant(0.01), 1000,
               record_stride=100)
    assert np.array_equal(traj.recorded_steps, np.arange(100, 1001, 100))
    full = run(p, make_stream(spec), Plain(), Constant(0.01), 1000)
    assert np.allclose(traj.population_losses, full.population_losses[99::100])


def test_regret_zero_when_no_movement():
    p = uniform_quadratic(np.zeros((1, 1)), np.array([0.5]), 5.0)
    traj = run(p, _const_stream(0.3), Plain(), Constant(0.1), 100,
               initial_point=[0.5])
    assert regret(traj, p, [0.5]) == 0.0


def test_regret_single_step_hand_value():
    p = _scalar_problem()
    traj = run(p, _const_stream(1.0), Plain(), Constant(0.1), 1,
               initial_point=[0.0])
    # F(0; 1) - F(0.5; 1) = 1 - 0.25
    assert regret(traj, p, [0.5]) == pytest.approx(0.75, rel=1e-12)


def test_regret_grows_sublinearly_on_iid_stream():
    p = default_experiment_problem(3)
    early, late = [], []
    for seed in range(20):
        spec = IidUniformSpec(d=3, seed=1000 + seed)
        traj = run(p, make_stream(spec), Plain(), InvSqrt(0.2), 10_000,
                   record_stride=100)
        reg = traj.running_regret
        early.append(reg[0] / 100.0)        # regret rate at t = 100
        late.append(reg[-1] / 10_000.0)     # regret rate at t = 10^4
    assert np.mean(late) < np.mean(early)


def test_theory_minibatch_rate_value():
    model = Algebraic(0.5)
    sched = TheoryMiniBatch(scale=1.0, horizon=400, batch_size=4, model=model)
    s = sum((i) ** -0.5 for i in range(1, 5))
    assert sched.rate(1) == pytest.approx(np.sqrt(4 / (400 * s)), rel=1e-12)
    assert sched.rate(99) == sched.rate(1)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Constant(0.0)
    with pytest.raises(ValueError):
        InvSqrt(-1.0)
    with pytest.raises(ValueError):
        Subsampled(0)
    with pytest.raises(ValueError):
        MiniBatch(0)


class _NaNStream(Stream):
    def __init__(self, d, bad_at):
        self.d, self.bad_at, self.t = d, bad_at, 0

    @property
    def dim(self):
        return self.d

    def take(self, n):
        out = np.full((n, self.d), 0.5)
        if self.t + n >= self.bad_at:
            out[-1, 0] = np.nan
        self.t += n
        return out


def test_non_finite_gradient_aborts_with_step_number():
    p = default_experiment_problem(2)
    with pytest.raises(NumericalError, match="step 5"):
        run(p, _NaNStream(2, bad_at=5), Plain(), Constant(0.1), 50)


def test_trajectory_csv_schema():
    p = default_experiment_problem(2)
    traj = run(p, make_stream(IidUniformSpec(d=2, seed=1)), Plain(),
               Constant(0.01), 10)
    lines = traj.to_csv().strip().splitlines()
    assert lines[0] == "t,samples_consumed,pop_loss,step_norm,regret_running"
    assert len(lines) == 11
