"""Stochastic quadratic objective over a ball-constrained domain.

The per-sample loss is F(w; xi) = (w - xi)' A (w - xi) with a fixed
positive semi-definite matrix A, so the population risk under a stationary
sample law with mean mu and quadratic spread q = E[(xi-mu)' A (xi-mu)] is

    f(w) = (w - mu)' A (w - mu) + q,

minimized at w* = mu with value q.  The feasible set is a Euclidean ball;
its diameter and the worst-case gradient norm over domain x sample support
give the Lipschitz constants used by every bound evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mixing.markov import stationary_distribution
from .mixing.streams import (
    FiniteChainSpec,
    HoldTimeUniformSpec,
    IidUniformSpec,
    StreamSpec,
    WrappedSpec,
)

__all__ = [
    "QuadraticProblem",
    "ProblemBundle",
    "uniform_quadratic",
    "chain_quadratic",
    "default_experiment_problem",
    "sample_loss",
    "sample_grad",
    "batch_loss",
    "batch_grad",
    "population_loss",
    "minimizer",
    "project",
]

_SYM_TOL = 1e-12
_EIG_TOL = -1e-10


@dataclass(frozen=True)
class QuadraticProblem:
    """Immutable problem instance; safe to share across worker processes.

    ``sample_dist_bound`` is the largest possible distance from a sample to
    the domain center, taken over the sample support; it enters the
    analytic gradient-norm bound.
    """

    matrix: np.ndarray
    domain_center: np.ndarray
    domain_radius: float
    stationary_mean: np.ndarray
    stationary_quad_term: float
    sample_dist_bound: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        c = np.asarray(self.domain_center, dtype=float).ravel()
        mu = np.asarray(self.stationary_mean, dtype=float).ravel()
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        if np.abs(A - A.T).max() > _SYM_TOL:
            raise ValueError("matrix must be symmetric within 1e-12")
        if np.linalg.eigvalsh(A).min() < _EIG_TOL:
            raise ValueError("matrix must be positive semi-definite")
        if c.shape != (A.shape[0],) or mu.shape != (A.shape[0],):
            raise ValueError("center and mean dimensions must match the matrix")
        if self.domain_radius <= 0:
            raise ValueError("domain_radius must be positive")
        if self.stationary_quad_term < 0:
            raise ValueError("stationary quadratic term must be nonnegative")
        for name, val in (("matrix", A), ("domain_center", c), ("stationary_mean", mu)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "domain_radius", float(self.domain_radius))
        object.__setattr__(self, "stationary_quad_term", float(self.stationary_quad_term))
        object.__setattr__(self, "sample_dist_bound", float(self.sample_dist_bound))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectral_norm(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).max())

    @property
    def smoothness(self) -> float:
        """Smoothness constant of f: the gradient map is 2A."""
        return 2.0 * self.spectral_norm

    @property
    def grad_bound(self) -> float:
        """sup over domain x sample support of ||2A(w - xi)|| (ball geometry)."""
        return 2.0 * self.spectral_norm * (self.domain_radius + self.sample_dist_bound)

    @property
    def domain_diameter(self) -> float:
        return 2.0 * self.domain_radius


@dataclass(frozen=True)
class ProblemBundle:
    """A problem paired with the stream whose stationary law defines it."""

    problem: QuadraticProblem
    stream_spec: StreamSpec

    def __post_init__(self):
        if self.stream_spec.dim != self.problem.dim:
            raise ValueError("stream dimension must match the problem dimension")


def _corner_distance(center: np.ndarray) -> float:
    """max over the unit cube of ||xi - center|| (attained at a corner)."""
    worst = np.maximum(np.abs(center), np.abs(1.0 - center))
    return float(np.linalg.norm(worst))


def uniform_quadratic(matrix, domain_center, domain_radius) -> QuadraticProblem:
    """Problem whose sample law is uniform on the unit cube.

    The stationary mean is the cube center and the quadratic spread is
    trace(A)/12 (coordinate variance of the uniform law is 1/12).
    """
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    c = np.asarray(domain_center, dtype=float).ravel()
    return QuadraticProblem(
        matrix=A,
        domain_center=c,
        domain_radius=float(domain_radius),
        stationary_mean=np.full(A.shape[0], 0.5),
        stationary_quad_term=float(np.trace(A)) / 12.0,
        sample_dist_bound=_corner_distance(c),
    )


def chain_quadratic(matrix, spec: FiniteChainSpec, domain_center,
                    domain_radius) -> QuadraticProblem:
    """Problem whose sample law is the stationary law of a finite chain."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    c = np.asarray(domain_center, dtype=float).ravel()
    pi = stationary_distribution(spec.transition_matrix)
    E = spec.emission_matrix
    mu = pi @ E
    diffs = E - mu
    quad = float(np.einsum("s,si,ij,sj->", pi, diffs, A, diffs))
    dist = float(np.linalg.norm(E - c, axis=1).max())
    return QuadraticProblem(
        matrix=A,
        domain_center=c,
        domain_radius=float(domain_radius),
        stationary_mean=mu,
        stationary_quad_term=quad,
        sample_dist_bound=dist,
    )


def uniform_problem_for_spec(spec: StreamSpec, matrix, domain_center,
                             domain_radius) -> QuadraticProblem:
    """Dispatch on the stream kind to build the matching problem."""
    base = spec.inner if isinstance(spec, WrappedSpec) else spec
    if isinstance(base, (IidUniformSpec, HoldTimeUniformSpec)):
        return uniform_quadratic(matrix, domain_center, domain_radius)
    if isinstance(base, FiniteChainSpec):
        return chain_quadratic(matrix, base, domain_center, domain_radius)
    raise TypeError(f"no stationary moments for {type(base).__name__}")


def default_experiment_problem(d: int = 10) -> QuadraticProblem:
    """Well-conditioned default instance: A = diag(1..d)/d on the unit cube,
    domain ball of radius 5 about the cube center."""
    A = np.diag(np.arange(1, d + 1, dtype=float) / d)
    return uniform_quadratic(A, np.full(d, 0.5), 5.0)


# ---------------------------------------------------------------------------
# Losses, gradients, projection


def _check_dim(problem: QuadraticProblem, v: np.ndarray, name: str):
    if v.shape[-1] != problem.dim:
        raise ValueError(f"{name} has dimension {v.shape[-1]}, expected {problem.dim}")


def sample_loss(problem: QuadraticProblem, w, xi) -> float:
    """F(w; xi) = (w - xi)' A (w - xi)."""
    w = np.asarray(w, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float).ravel()
    _check_dim(problem, w, "w")
    _check_dim(problem, xi, "xi")
    d = w - xi
    return float(d @ problem.matrix @ d)


def sample_grad(problem: QuadraticProblem, w, xi) -> np.ndarray:
    """Gradient in w of the sample loss: 2A(w - xi)."""
    w = np.asarray(w, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float).ravel()
    _check_dim(problem, w, "w")
    _check_dim(problem, xi, "xi")
    return 2.0 * (problem.matrix @ (w - xi))


def batch_loss(problem: QuadraticProblem, w, batch: np.ndarray) -> float:
    """Average sample loss over the rows of ``batch``."""
    w = np.asarray(w, dtype=float).ravel()
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    _check_dim(problem, batch, "batch")
    D = w[None, :] - batch
    return float(np.einsum("bi,ij,bj->b", D, problem.matrix, D).mean())


def batch_grad(problem: QuadraticProblem, w, batch: np.ndarray) -> np.ndarray:
    """Average of per-sample gradients over the rows of ``batch``."""
    w = np.asarray(w, dtype=float).ravel()
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    _check_dim(problem, batch, "batch")
    return (2.0 * ((w[None, :] - batch) @ problem.matrix)).mean(axis=0)


def population_loss(problem: QuadraticProblem, w) -> float:
    """f(w) = (w - mu)' A (w - mu) + stationary quadratic term."""
    w = np.asarray(w, dtype=float).ravel()
    _check_dim(problem, w, "w")
    d = w - problem.stationary_mean
    return float(d @ problem.matrix @ d) + problem.stationary_quad_term


def minimizer(problem: QuadraticProblem) -> tuple[np.ndarray, float]:
    """Unconstrained minimizer (the stationary mean) and its risk.

    Raises if the mean falls outside the domain ball: the constrained
    minimizer would then differ and silently projecting would be wrong.
    """
    mu = problem.stationary_mean
    dist = float(np.linalg.norm(mu - problem.domain_center))
    if dist > problem.domain_radius + 1e-12:
        proj = project(problem, mu)
        raise ValueError(
            "stationary mean lies outside the domain ball "
            f"(distance {dist:.6g} > radius {problem.domain_radius:.6g}); "
            f"its projection is {proj}")
    return mu.copy(), problem.stationary_quad_term


def project(problem: QuadraticProblem, w) -> np.ndarray:
    """Euclidean projection onto the domain ball; non-expansive, idempotent."""
    w = np.asarray(w, dtype=float).ravel()
    _check_dim(problem, w, "w")
    v = w - problem.domain_center
    norm = float(np.linalg.norm(v))
    if norm <= problem.domain_radius:
        return w.copy()
    return problem.domain_center + v * (problem.domain_radius / norm)
