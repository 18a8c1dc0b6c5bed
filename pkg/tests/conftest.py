"""Shared fixtures: the finite-chain test zoo and small problem instances."""

from __future__ import annotations

import numpy as np
import pytest

from mixing_sgd import FiniteChainSpec


def random_chain_spec(n_states: int, d: int, seed: int,
                      floor: float = 0.05) -> FiniteChainSpec:
    """Random strictly positive row-stochastic chain (hence primitive)."""
    g = np.random.default_rng(seed)
    P = g.gamma(1.0, 1.0, (n_states, n_states)) + floor
    P /= P.sum(axis=1, keepdims=True)
    E = g.random((n_states, d))
    return FiniteChainSpec(transition=tuple(map(tuple, P)),
                           emission=tuple(map(tuple, E)), seed=seed)


def symmetric_two_state(p: float, seed: int = 0) -> FiniteChainSpec:
    """Two states, flip probability p, emissions 0 and 1."""
    return FiniteChainSpec(transition=((1 - p, p), (p, 1 - p)),
                           emission=((0.0,), (1.0,)), seed=seed)


@pytest.fixture(scope="session")
def chain_zoo() -> list[FiniteChainSpec]:
    """Chains with at most 16 states used by the oracle-equivalence checks."""
    zoo = [
        symmetric_two_state(0.25, seed=11),
        FiniteChainSpec(transition=((0.9, 0.1), (0.4, 0.6)),
                        emission=((0.1,), (0.8,)), seed=12),
        random_chain_spec(3, 1, seed=13),
        random_chain_spec(5, 2, seed=14),
        random_chain_spec(8, 1, seed=15),
        random_chain_spec(16, 1, seed=16),
    ]
    return zoo
