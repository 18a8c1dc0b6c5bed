"""Monte-Carlo mixing estimation against exact oracles."""

import pytest

from mixing_sgd import (
    IidUniformSpec,
    WrappedSpec,
    estimate_phi_empirical,
    estimate_phi_profile,
    exact_phi_finite_chain,
    tuned_hold_spec,
)
from mixing_sgd.mixing.empirical import PhiEstimate, phi_estimate_csv_row

from conftest import symmetric_two_state


def test_iid_reads_as_zero():
    est = estimate_phi_empirical(IidUniformSpec(d=1, seed=5), 3,
                                 n_replicates=1000, n_continuations=64)
    assert est.value <= 3.0 * est.stderr + 1e-9
    assert est.n_replicates == 1000


def test_matches_exact_on_two_state_chain():
    spec = symmetric_two_state(0.25, seed=3)
    exact = exact_phi_finite_chain(spec.transition_matrix, 2)
    est = estimate_phi_empirical(spec, 2, n_replicates=800, n_continuations=64)
    assert abs(est.value - exact) <= 3.0 * est.stderr


def test_wrapped_estimate_matches_inner_at_scaled_lag():
    spec = symmetric_two_state(0.25, seed=3)
    wrapped = WrappedSpec(inner=spec, subsample_period=3)
    exact = exact_phi_finite_chain(spec.transition_matrix, 6)
    est = estimate_phi_empirical(wrapped, 2, n_replicates=800, n_continuations=64)
    assert abs(est.value - exact) <= 3.0 * est.stderr


def test_coverage_on_chain_zoo(chain_zoo):
    # The mixing-module contract: |estimate - exact| <= 3 stderr in at least
    # 95% of seeded runs, on every chain with <= 16 states.
    import dataclasses
    hits = total = 0
    for spec in chain_zoo:
        exact = exact_phi_finite_chain(spec.transition_matrix, 2)
        for rep in range(8):
            s = dataclasses.replace(spec, seed=spec.seed + 1000 * (rep + 1))
            est = estimate_phi_empirical(s, 2, n_replicates=400, n_continuations=32)
            hits += abs(est.value - exact) <= 3.0 * est.stderr
            total += 1
    assert hits / total >= 0.95


def test_profile_shares_replicates_and_orders_lags():
    spec = tuned_hold_spec(2.0, d=1, seed=19)
    prof = estimate_phi_profile(spec, [2, 16, 128], n_replicates=1500,
                                n_continuations=24)
    assert [p.k for p in prof] == [2, 16, 128]
    vals = [p.value for p in prof]
    assert vals[0] > vals[1] > vals[2]  # decay is visible well beyond noise
    assert all(0.0 <= p.value <= 2.0 and p.stderr >= 0.0 for p in prof)


def test_insufficient_replicates_rejected():
    with pytest.raises(ValueError):
        estimate_phi_empirical(IidUniformSpec(d=1, seed=1), 2, n_replicates=50)


def test_bad_lags_rejected():
    with pytest.raises(ValueError):
        estimate_phi_profile(IidUniformSpec(d=1, seed=1), [0, 2], n_replicates=200)
    with pytest.raises(ValueError):
        estimate_phi_profile(IidUniformSpec(d=1, seed=1), [], n_replicates=200)


def test_too_fine_partition_rejected():
    with pytest.raises(ValueError):
        estimate_phi_empirical(IidUniformSpec(d=10, seed=1), 2, n_replicates=200)


def test_estimate_record_validation_and_csv():
    est = PhiEstimate(k=3, value=0.25, stderr=0.01, n_replicates=500)
    assert phi_estimate_csv_row(est) == "3,0.25,0.01,500"
    with pytest.raises(ValueError):
        PhiEstimate(k=0, value=0.1, stderr=0.0, n_replicates=10)
    with pytest.raises(ValueError):
        PhiEstimate(k=1, value=-0.1, stderr=0.0, n_replicates=10)


def test_burn_in_changes_draws_but_not_contract():
    spec = symmetric_two_state(0.25, seed=3)
    exact = exact_phi_finite_chain(spec.transition_matrix, 2)
    est = estimate_phi_empirical(spec, 2, n_replicates=400,
                                 n_continuations=32, burn_in=10)
    assert abs(est.value - exact) <= 4.0 * est.stderr
