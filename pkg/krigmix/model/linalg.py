"""
Cholesky factorization with a single bounded jitter retry
"""
import numpy as np
import scipy.linalg

from ..core.errors import FactorizationError

JITTER = 1e-10


def cholesky_jittered(matrix: np.ndarray, jitter: float = JITTER, what: str = "matrix") -> np.ndarray:
    """
    Lower Cholesky factor of a symmetric matrix.

    On failure the factorization is retried once with jitter * max(1, mean |diag|)
    added to the diagonal (exactly 1e-10 for unit-diagonal correlation
    matrices); a second failure raises FactorizationError.
    """
    try:
        return scipy.linalg.cholesky(matrix, lower=True)
    except (np.linalg.LinAlgError, ValueError):
        pass
    scale = max(1.0, float(np.mean(np.abs(np.diag(matrix))))) if matrix.size else 1.0
    bumped = matrix + jitter * scale * np.eye(matrix.shape[0])
    try:
        return scipy.linalg.cholesky(bumped, lower=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise FactorizationError(f"{what} is not positive definite after jitter: {e}") from e


def log_det_from_cholesky(factor: np.ndarray) -> float:
    return float(2.0 * np.sum(np.log(np.diag(factor))))
