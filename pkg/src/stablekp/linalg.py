"""Dense symmetric positive-definite linear algebra.

Heavy-tailed scales routinely push kernel matrices to the edge of numerical
positive definiteness, so every factorization runs through an escalating
jitter ladder (multiples of the mean diagonal) and records what it added.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import NumericError, ShapeError

__all__ = [
    "JITTER_LADDER",
    "SpdFactor",
    "PredictiveMoments",
    "factorize",
    "gaussian_loglik",
    "predictive_moments",
    "sample_mvn",
]

# Relative jitter multipliers (times the mean diagonal), tried in order.
JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class SpdFactor:
    """Lower-triangular Cholesky factor of ``source + jitter_applied * I``."""

    source: np.ndarray
    factor: np.ndarray
    jitter_applied: float

    @property
    def n(self) -> int:
        return self.factor.shape[0]

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.factor))))

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve((self.factor, True), b, check_finite=False)


@dataclass
class PredictiveMoments:
    """Conditional mean and covariance at the test points."""

    mean: np.ndarray
    covariance: np.ndarray


def factorize(A: np.ndarray) -> SpdFactor:
    """Cholesky-factorize a symmetric matrix, escalating jitter as needed."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"can only factorize square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix contains non-finite entries")
    asym = float(np.abs(A - A.T).max()) if A.size else 0.0
    if asym > 1e-10 * (float(np.abs(A).max()) if A.size else 0.0) + 1e-12:
        raise ShapeError(f"matrix is not symmetric (max |A - A^T| = {asym:g})")
    mean_diag = float(np.mean(np.diag(A)))
    for mult in JITTER_LADDER:
        jitter = mult * mean_diag
        try:
            target = A if jitter == 0.0 else A + jitter * np.eye(A.shape[0])
            L = cholesky(target, lower=True, check_finite=False)
            return SpdFactor(source=A, factor=L, jitter_applied=jitter)
        except np.linalg.LinAlgError:
            continue
        except Exception:
            continue
    try:
        min_eig = float(np.linalg.eigvalsh(A)[0])
    except np.linalg.LinAlgError:
        min_eig = None
    raise NumericError(
        f"matrix is not positive definite even after jitter up to "
        f"{JITTER_LADDER[-1]:.0e} x mean diagonal (smallest eigenvalue ~ {min_eig})",
        min_eigenvalue=min_eig,
    )


def gaussian_loglik(y: np.ndarray, cov: SpdFactor) -> float:
    """Zero-mean Gaussian log density of y under the factorized covariance."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != cov.n:
        raise ShapeError(f"y has length {y.shape[0]}, covariance is {cov.n}x{cov.n}")
    alpha = solve_triangular(cov.factor, y, lower=True, check_finite=False)
    quad = float(alpha @ alpha)
    return -0.5 * (quad + cov.logdet() + cov.n * _LOG_2PI)


def predictive_moments(Lambda_joint: np.ndarray, y: np.ndarray) -> PredictiveMoments:
    """Condition a joint zero-mean Gaussian on its first len(y) coordinates.

    Block formulas: mean = L21 L11^-1 y and covariance = L22 - L21 L11^-1 L12,
    with the Schur complement symmetrized to protect later factorizations.
    """
    Lambda_joint = np.asarray(Lambda_joint, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    total = Lambda_joint.shape[0]
    if Lambda_joint.ndim != 2 or Lambda_joint.shape[1] != total:
        raise ShapeError(f"joint covariance must be square, got {Lambda_joint.shape}")
    if total < n:
        raise ShapeError(f"joint covariance ({total}) smaller than training size ({n})")
    m = total - n
    fac = factorize(Lambda_joint[:n, :n])
    if m == 0:
        return PredictiveMoments(mean=np.zeros(0), covariance=np.zeros((0, 0)))
    cross = Lambda_joint[n:, :n]
    sol = fac.solve(np.concatenate([y[:, None], cross.T], axis=1))
    mean = cross @ sol[:, 0]
    cov = Lambda_joint[n:, n:] - cross @ sol[:, 1:]
    cov = (cov + cov.T) / 2.0
    return PredictiveMoments(mean=mean, covariance=cov)


def sample_mvn(moments: PredictiveMoments, stream: np.random.Generator) -> np.ndarray:
    """One draw from N(mean, covariance); a zero covariance returns the mean."""
    m = moments.mean.shape[0]
    if m == 0:
        return np.zeros(0)
    if not np.any(moments.covariance):
        return moments.mean.copy()
    fac = factorize(moments.covariance)
    return moments.mean + fac.factor @ stream.standard_normal(m)
