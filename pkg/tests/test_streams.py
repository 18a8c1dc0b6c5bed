"""Stream generators: determinism, block/stepwise agreement, serialization."""

import numpy as np
import pytest

from mixing_sgd import (
    FiniteChainSpec,
    HoldTimeUniformSpec,
    IidUniformSpec,
    WrappedSpec,
    make_stream,
    next_sample,
    tuned_hold_spec,
)
from mixing_sgd.mixing.streams import (
    TUNED_LAG_GRID,
    _fitted_decay_slope,
    spec_from_config_block,
    spec_to_config_block,
    tuned_hold_exponent,
)

from conftest import random_chain_spec, symmetric_two_state


def _take_equal(spec, n):
    a = make_stream(spec).take(n)
    b = make_stream(spec).take(n)
    return np.array_equal(a, b)


def test_determinism_one_million_steps_iid_and_hold():
    assert _take_equal(IidUniformSpec(d=2, seed=123), 1_000_000)
    assert _take_equal(tuned_hold_spec(2.0, d=1, seed=44), 1_000_000)


def test_determinism_one_million_steps_finite_chain():
    assert _take_equal(symmetric_two_state(0.25, seed=5), 1_000_000)


def test_determinism_wrapped():
    inner = IidUniformSpec(d=1, seed=9)
    assert _take_equal(WrappedSpec(inner=inner, subsample_period=7), 1_000_000 // 7)
    chain = random_chain_spec(4, 1, seed=21)
    assert _take_equal(WrappedSpec(inner=chain, subsample_period=3), 100_000)


@pytest.mark.parametrize("spec", [
    IidUniformSpec(d=3, seed=1),
    HoldTimeUniformSpec(d=2, alpha=1.5, max_hold=500, seed=2),
    symmetric_two_state(0.3, seed=3),
    WrappedSpec(inner=IidUniformSpec(d=2, seed=4), subsample_period=5),
])
def test_blocked_and_stepwise_draws_agree(spec):
    blocked = make_stream(spec).take(97)
    s = make_stream(spec)
    mixed = np.concatenate([s.take(13), np.stack([next_sample(s) for _ in range(7)]),
                            s.take(77)])
    assert np.array_equal(blocked, mixed)


def test_iid_uniform_range():
    x = make_stream(IidUniformSpec(d=2, seed=8)).take(10_000)
    assert x.shape == (10_000, 2)
    assert x.min() >= 0.0 and x.max() <= 1.0


def test_wrapped_period_one_is_identity():
    inner = HoldTimeUniformSpec(d=1, alpha=1.5, max_hold=100, seed=6)
    a = make_stream(inner).take(5_000)
    b = make_stream(WrappedSpec(inner=inner, subsample_period=1)).take(5_000)
    assert np.array_equal(a, b)


def test_wrapped_returns_last_of_each_block():
    inner = IidUniformSpec(d=1, seed=10)
    raw = make_stream(inner).take(30)
    sub = make_stream(WrappedSpec(inner=inner, subsample_period=3)).take(10)
    assert np.array_equal(sub, raw[2::3])


def test_absorbing_single_state_is_constant():
    spec = FiniteChainSpec(transition=((1.0,),), emission=((0.25, 0.75),), seed=0)
    x = make_stream(spec).take(100)
    assert np.array_equal(x, np.tile([0.25, 0.75], (100, 1)))


def test_hold_stream_is_piecewise_constant_with_uniform_marginal():
    spec = HoldTimeUniformSpec(d=1, alpha=1.5, max_hold=1000, seed=77)
    x = make_stream(spec).take(200_000)[:, 0]
    repeats = (np.diff(x) == 0).mean()
    assert repeats > 0.2  # holds actually hold
    # stationary marginal is uniform: mean 1/2 within 5 sigma of a crude bound
    assert abs(x.mean() - 0.5) < 0.02


def test_spec_validation():
    with pytest.raises(ValueError):
        HoldTimeUniformSpec(d=1, alpha=1.0, max_hold=10)     # alpha must be > 1
    with pytest.raises(ValueError):
        HoldTimeUniformSpec(d=1, alpha=1.5, max_hold=0)
    with pytest.raises(ValueError):
        FiniteChainSpec(transition=((0.6, 0.6), (0.5, 0.5)), emission=((0.0,), (1.0,)))
    with pytest.raises(ValueError):
        WrappedSpec(inner=IidUniformSpec(d=1), subsample_period=0)
    with pytest.raises(ValueError):
        IidUniformSpec(d=0)


@pytest.mark.parametrize("spec", [
    IidUniformSpec(d=4, seed=42),
    HoldTimeUniformSpec(d=2, alpha=1.62, max_hold=2000, seed=43),
    random_chain_spec(3, 2, seed=44),
    WrappedSpec(inner=random_chain_spec(2, 1, seed=45), subsample_period=6),
])
def test_config_block_round_trip(spec):
    text = spec_to_config_block(spec)
    block = dict(line.split("=", 1) for line in text.splitlines())
    assert spec_from_config_block(block) == spec


def test_tuned_exponent_matches_target_decay():
    for rate in (1.0, 1.25, 1.5, 1.75, 2.0):
        alpha = tuned_hold_exponent(rate)
        assert alpha > 1.0
        slope = _fitted_decay_slope(alpha, 10_000, TUNED_LAG_GRID)
        assert slope == pytest.approx(-1.0 / rate, abs=1e-6)


def test_tuned_exponent_monotone_in_rate():
    alphas = [tuned_hold_exponent(r) for r in (1.0, 1.5, 2.0)]
    assert alphas[0] > alphas[1] > alphas[2]
