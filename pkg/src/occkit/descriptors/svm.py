"""
One-class Support Vector Machine (Schölkopf variant) with a Gaussian kernel.

The dual

    min 1/2 sum_ij a_i a_j k(x_i, x_j)   s.t.   0 <= a_i <= 1/(nu n),  sum_i a_i = 1

is solved by pairwise coordinate descent: pick the maximally KKT-violating pair, solve
the two-variable sub-problem in closed form, repeat.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..exceptions import ConvergenceError, InsufficientDataError, InvalidArgumentError, ShapeError
from ..models import DataDescription, DataDescriptor, FeatureMatrix, State

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
DEFAULT_MAX_ITERATIONS = 1_000_000
# Alphas this close to a bound count as sitting on it.
BOUND_EPSILON = 1e-12


def gaussian_kernel(x: Sequence[float], y: Sequence[float], c: float) -> float:
    """
    exp(-||x - y||^2 / c).

    Raises:
        InvalidArgumentError: If the width c is not positive.
        ShapeError: If x and y differ in length.
    """
    if not c > 0:
        raise InvalidArgumentError(f"Kernel width must be positive, got {c}.")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"Vectors must have equal length, got {x.shape} and {y.shape}.")
    diff = x - y
    return float(np.exp(-np.dot(diff, diff) / c))


def gaussian_gram(A: np.ndarray, B: np.ndarray, c: float) -> np.ndarray:
    """Kernel matrix between the rows of A and the rows of B."""
    if not c > 0:
        raise InvalidArgumentError(f"Kernel width must be positive, got {c}.")
    return np.exp(-cdist(A, B, metric="sqeuclidean") / c)


@dataclass
class DualSolution:
    """Result of the dual solver; `gradient` is K @ alpha."""

    alpha: np.ndarray
    gradient: np.ndarray
    upper: float
    iterations: int
    residual: float
    objective_trace: List[float] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return 0.5 * float(self.alpha @ self.gradient)


def initial_alpha(n: int, nu: float) -> np.ndarray:
    """Feasible start: the first floor(nu n) coefficients at the upper bound, the remainder on the next."""
    upper = 1.0 / (nu * n)
    alpha = np.zeros(n)
    full = min(int(np.floor(nu * n)), n)
    alpha[:full] = upper
    if full < n:
        alpha[full] = max(1.0 - full * upper, 0.0)
    return alpha / alpha.sum()


def _violating_pair(alpha: np.ndarray, gradient: np.ndarray, upper: float):
    can_grow = np.flatnonzero(alpha < upper - BOUND_EPSILON)
    can_shrink = np.flatnonzero(alpha > BOUND_EPSILON)
    if can_grow.size == 0 or can_shrink.size == 0:
        return None, None, 0.0
    i = int(can_grow[np.argmin(gradient[can_grow])])
    j = int(can_shrink[np.argmax(gradient[can_shrink])])
    return i, j, float(gradient[j] - gradient[i])


def solve_dual(
    K: np.ndarray,
    nu: float,
    tol: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    trace: bool = False,
) -> DualSolution:
    """
    Minimise the one-class dual for a precomputed kernel matrix.

    Args:
        K: (n, n) kernel matrix.
        nu: Upper bound on the outlier fraction, in (0, 1].
        tol: Stop once the maximal KKT violation is at most this.
        max_iterations: Cap on pair updates.
        trace: Record the objective after every update.

    Raises:
        ConvergenceError: If the cap is hit first; carries the final violation.
    """
    n = K.shape[0]
    upper = 1.0 / (nu * n)
    alpha = initial_alpha(n, nu)
    gradient = K @ alpha
    objective_trace = [0.5 * float(alpha @ gradient)] if trace else []

    iterations = 0
    i, j, violation = _violating_pair(alpha, gradient, upper)
    while violation > tol:
        if iterations >= max_iterations:
            raise ConvergenceError(
                f"Dual solver did not converge in {max_iterations} pair updates (KKT violation {violation:.3g}).",
                residual=violation,
            )
        curvature = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if curvature <= 0:
            curvature = BOUND_EPSILON
        step = min(violation / curvature, upper - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        gradient += step * (K[:, i] - K[:, j])
        iterations += 1
        if trace:
            objective_trace.append(0.5 * float(alpha @ gradient))
        i, j, violation = _violating_pair(alpha, gradient, upper)

    logger.debug(f"Dual solver converged after {iterations} pair updates (KKT violation {violation:.3g})")
    return DualSolution(
        alpha=alpha,
        gradient=gradient,
        upper=upper,
        iterations=iterations,
        residual=max(violation, 0.0),
        objective_trace=objective_trace,
    )


def recover_offset(solution: DualSolution) -> float:
    """
    rho: the median gradient over unbounded support vectors; without any, the midpoint
    between the largest gradient at the upper bound and the smallest at zero.
    """
    alpha, gradient, upper = solution.alpha, solution.gradient, solution.upper
    free = (alpha > BOUND_EPSILON) & (alpha < upper - BOUND_EPSILON)
    if free.any():
        return float(np.median(gradient[free]))
    at_upper = gradient[alpha >= upper - BOUND_EPSILON]
    at_zero = gradient[alpha <= BOUND_EPSILON]
    logger.debug("No unbounded support vectors; recovering rho from the bounded ones")
    if at_upper.size and at_zero.size:
        return float((at_upper.max() + at_zero.min()) / 2.0)
    return float(at_upper.max() if at_upper.size else at_zero.min())


def signed_distance_to_score(d: np.ndarray) -> np.ndarray:
    """1/2 (d / (|d| + 1) + 1): 0.5 on the hyperplane, increasing in d."""
    d = np.asarray(d, dtype=np.float64)
    return 0.5 * (d / (np.abs(d) + 1.0) + 1.0)


@dataclass(frozen=True, eq=False)
class OcSvmModel(DataDescription):
    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    nu: float
    width: float
    tol: float = DEFAULT_TOLERANCE
    iterations: int = 0
    residual: float = 0.0
    kind = "svm"

    @property
    def m(self) -> int:
        return int(self.support_vectors.shape[1])

    def decision_function(self, Y: np.ndarray) -> np.ndarray:
        """Signed distance d_S to the separating hyperplane; negative on the origin side."""
        return gaussian_gram(np.atleast_2d(Y), self.support_vectors, self.width) @ self.alphas - self.rho

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        return signed_distance_to_score(self.decision_function(Y))

    def hyperparameters(self) -> Dict[str, Any]:
        return {
            "nu": self.nu,
            "c": self.width,
            "tol": self.tol,
            "iterations": self.iterations,
            "residual": self.residual,
        }

    def get_state(self) -> State:
        return {
            "support_vectors": self.support_vectors,
            "alphas": self.alphas,
            "rho": self.rho,
            "nu": self.nu,
            "width": self.width,
            "tol": self.tol,
            "iterations": self.iterations,
            "residual": self.residual,
        }

    @classmethod
    def from_state(cls, state: State) -> "OcSvmModel":
        return cls(
            support_vectors=np.asarray(state["support_vectors"], dtype=np.float64),
            alphas=np.asarray(state["alphas"], dtype=np.float64),
            rho=float(state["rho"]),
            nu=float(state["nu"]),
            width=float(state["width"]),
            tol=float(state["tol"]),
            iterations=int(state["iterations"]),
            residual=float(state["residual"]),
        )


@dataclass(frozen=True)
class OneClassSvm(DataDescriptor):
    """
    Attributes:
        nu: Outlier-fraction bound in (0, 1].
        c: Gaussian kernel width; None means 0.25 m.
        tol: Tolerance on the maximal KKT violation.
        max_iterations: Cap on pair updates.
    """

    nu: float = 0.20
    c: Optional[float] = None
    tol: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    kind = "svm"

    def solve(self, train: FeatureMatrix, trace: bool = False) -> DualSolution:
        if train.n < 2:
            raise InsufficientDataError(f"SVM needs at least 2 training instances, got {train.n}.")
        if not 0 < self.nu <= 1:
            raise InvalidArgumentError(f"nu must lie in (0, 1], got {self.nu}.")
        K = gaussian_gram(train.values, train.values, self.width(train.m))
        return solve_dual(K, self.nu, self.tol, self.max_iterations, trace=trace)

    def width(self, m: int) -> float:
        return 0.25 * m if self.c is None else float(self.c)

    def fit(self, train: FeatureMatrix) -> OcSvmModel:
        solution = self.solve(train)
        support = solution.alpha > BOUND_EPSILON
        logger.info(
            f"SVM fitted: {int(support.sum())} support vectors of {train.n} after {solution.iterations} updates"
        )
        return OcSvmModel(
            support_vectors=train.values[support].copy(),
            alphas=solution.alpha[support].copy(),
            rho=recover_offset(solution),
            nu=float(self.nu),
            width=self.width(train.m),
            tol=self.tol,
            iterations=solution.iterations,
            residual=solution.residual,
        )
