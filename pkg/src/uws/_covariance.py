"""Positive-definiteness checks with the one-shot ridge repair policy."""

import numpy as np

from .errors import InvalidArgumentError, SingularCovarianceError

RIDGE_SCALE = 1e-9


def repair_covariance(cov):
    """Return a positive-definite copy of ``cov``, ridging at most once.

    A symmetric matrix that fails the Cholesky test gets
    ``RIDGE_SCALE * trace/m`` added to its diagonal; if it still fails,
    SingularCovarianceError is raised.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidArgumentError(f"covariance must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-10 * max(1.0, np.abs(cov).max())):
        raise InvalidArgumentError("covariance must be symmetric")
    sym = 0.5 * (cov + cov.T)
    try:
        np.linalg.cholesky(sym)
        return sym
    except np.linalg.LinAlgError:
        pass
    ridged = sym + RIDGE_SCALE * (np.trace(sym) / sym.shape[0]) * np.eye(sym.shape[0])
    try:
        np.linalg.cholesky(ridged)
        return ridged
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("covariance not positive definite after ridge repair") from exc
