"""Exact finite-chain quantities: stationary laws and mixing coefficients."""

import numpy as np
import pytest

from mixing_sgd import exact_phi_finite_chain, stationary_distribution
from mixing_sgd.mixing.markov import is_primitive, subsample_kernel

from conftest import random_chain_spec


def test_two_state_symmetric_lag_two():
    # P = [[.75,.25],[.25,.75]], P^2 rows are (.625,.375); pi = (.5,.5)
    # so the L1 distance is |.125| + |.125| = 0.25 at either starting state.
    P = np.array([[0.75, 0.25], [0.25, 0.75]])
    assert exact_phi_finite_chain(P, 2) == pytest.approx(0.25, abs=1e-13)


def test_phi_range_and_monotonicity(chain_zoo):
    for spec in chain_zoo:
        P = spec.transition_matrix
        vals = [exact_phi_finite_chain(P, k) for k in (1, 2, 4, 8, 16)]
        assert all(0.0 <= v <= 2.0 for v in vals)
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_identity_transition_rejected():
    with pytest.raises(ValueError):
        exact_phi_finite_chain(np.eye(3), 2)


def test_periodic_chain_rejected():
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        stationary_distribution(flip)


def test_reducible_chain_rejected():
    block = np.array([
        [0.5, 0.5, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.0, 1.0],
    ])
    with pytest.raises(ValueError):
        stationary_distribution(block)


def test_bad_rows_rejected():
    with pytest.raises(ValueError):
        stationary_distribution(np.array([[0.7, 0.2], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        stationary_distribution(np.array([[1.2, -0.2], [0.5, 0.5]]))


def test_primitivity_detector():
    assert is_primitive(np.array([[0.5, 0.5], [0.5, 0.5]]))
    assert not is_primitive(np.eye(2))
    assert not is_primitive(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert is_primitive(np.ones((1, 1)))


def test_stationary_is_fixed_point(chain_zoo):
    for spec in chain_zoo:
        P = spec.transition_matrix
        pi = stationary_distribution(P)
        assert np.abs(pi @ P - pi).sum() < 1e-11
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert (pi > 0).all()


def test_subsampling_identity_exact():
    # The kept stream's kernel is P^r, so its lag-t coefficient equals the
    # base chain's at lag r*t: a pure matrix-power identity.
    for seed in (101, 102):
        P = random_chain_spec(5, 1, seed=seed).transition_matrix
        for r in (2, 5):
            Pr = subsample_kernel(P, r)
            for t in (1, 3, 7):
                assert exact_phi_finite_chain(Pr, t) == pytest.approx(
                    exact_phi_finite_chain(P, r * t), abs=1e-10)


def test_lag_validation():
    P = np.array([[0.75, 0.25], [0.25, 0.75]])
    with pytest.raises(ValueError):
        exact_phi_finite_chain(P, 0)
