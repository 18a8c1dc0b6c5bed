"""Exact finite-chain machinery: stationary laws and mixing coefficients.

For a finite-state chain with transition matrix P and stationary law pi,
the phi-mixing coefficient at lag k is the worst starting state's
unnormalized L1 distance

    phi(k) = max_s  sum_y | P^k(s, y) - pi(y) |,

which lies in [0, 2] and is non-increasing in k.  These quantities serve as
the exact oracle against which the Monte-Carlo estimators are validated.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "validate_transition_matrix",
    "is_primitive",
    "stationary_distribution",
    "exact_phi_finite_chain",
    "subsample_kernel",
]

_ROW_SUM_TOL = 1e-12


def validate_transition_matrix(P: np.ndarray) -> np.ndarray:
    """Check shape, nonnegativity and row sums (within 1e-12); return as array."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("transition matrix must be square")
    if not np.isfinite(P).all():
        raise ValueError("transition matrix must be finite")
    if np.any(P < -_ROW_SUM_TOL):
        raise ValueError("transition probabilities must be nonnegative")
    rows = P.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > _ROW_SUM_TOL):
        raise ValueError("transition rows must sum to 1 within 1e-12")
    return P


def is_primitive(P: np.ndarray) -> bool:
    """True iff the chain is irreducible and aperiodic.

    Uses Wielandt's bound: P is primitive iff the support of P^m is strictly
    positive for m = (n-1)^2 + 1, checked with boolean matrix squaring.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if n == 1:
        return True
    target = (n - 1) ** 2 + 1
    support = P > 0
    reach = np.eye(n, dtype=bool)
    power = support
    m = target
    while m:
        if m & 1:
            reach = (reach.astype(np.int64) @ power.astype(np.int64)) > 0
        power = (power.astype(np.int64) @ power.astype(np.int64)) > 0
        m >>= 1
    return bool(reach.all())


def stationary_distribution(P: np.ndarray, tol: float = 1e-12,
                            max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary law of an irreducible aperiodic chain by power iteration.

    Raises ValueError for reducible or periodic chains (no unique stationary
    law) and for chains whose iteration fails to reach ``tol``.
    """
    P = validate_transition_matrix(P)
    if not is_primitive(P):
        raise ValueError("chain must be irreducible and aperiodic "
                         "(unique stationary law required)")
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ P
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise ValueError(f"stationary solve did not converge to {tol} "
                         f"within {max_iter} iterations")
    return pi / pi.sum()


def exact_phi_finite_chain(transition: np.ndarray, k: int) -> float:
    """Exact mixing coefficient at lag k via matrix powers.

    max over starting states of sum_y |P^k(s, y) - pi(y)|; the stationary
    law is computed internally (power iteration to 1e-12).
    """
    if k < 1:
        raise ValueError(f"lag must be a positive integer, got {k}")
    P = validate_transition_matrix(transition)
    pi = stationary_distribution(P)
    Pk = np.linalg.matrix_power(P, int(k))
    return float(np.abs(Pk - pi[None, :]).sum(axis=1).max())


def subsample_kernel(transition: np.ndarray, period: int) -> np.ndarray:
    """Transition matrix of the subsampled chain: the period-step kernel P^r."""
    if period < 1:
        raise ValueError("period must be >= 1")
    P = validate_transition_matrix(transition)
    return np.linalg.matrix_power(P, int(period))
