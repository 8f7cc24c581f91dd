"""Per-class Gaussian component: fit from reference embeddings, evaluate
log-densities.

Each class is modeled as N(mu, S + eps*I) where S is the maximum-likelihood
sample covariance of the class's reference embeddings.  What is stored is
not the covariance but W = inv(C) with C @ C.T = S + eps*I, so the
Mahalanobis quadratic form is a single triangular matrix-vector product:

    log p(e) = -(d/2) log(2 pi) - (1/2) log|S + eps*I| - (1/2) ||W (e - mu)||^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    EmptyClass,
    NonFinite,
    NotPositiveDefinite,
)

__all__ = ["ClassGaussian", "fit_class", "log_density"]

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class ClassGaussian:
    """Fitted Gaussian for one class.

    ``inv_factor`` is W = inv(C) where C is the Cholesky factor of the
    regularized covariance; ``log_det_cov`` = log|S + eps*I| =
    -2 * sum(log(diag(W))).
    """

    class_id: int
    label: str
    mean: np.ndarray
    inv_factor: linalg.LowerTriangular
    log_det_cov: float
    n_ref: int
    eps: float

    @property
    def dim(self) -> int:
        return self.inv_factor.order

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        if self.mean.shape != (self.inv_factor.order,):
            raise DimensionMismatch(
                f"mean has shape {self.mean.shape}, factor order "
                f"{self.inv_factor.order}")
        if self.n_ref < 1:
            raise EmptyClass(f"n_ref must be >= 1, got {self.n_ref}")
        if self.eps < 0.0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")
        if not np.all(self.inv_factor.diagonal() > 0.0):
            raise ValueError("inverse factor must have positive diagonal")
        if not math.isfinite(self.log_det_cov):
            raise ValueError("log_det_cov must be finite")


def fit_class(refs, eps: float, class_id: int, label: str) -> ClassGaussian:
    """Fit one class Gaussian from an N x d block of reference embeddings.

    The covariance divisor is N (maximum likelihood), matching the
    mixture-component convention.  Raises NotPositiveDefinite when
    S + eps*I cannot be factored (typical when N < d and eps is too
    small relative to the covariance scale).
    """
    refs = np.asarray(refs, dtype=np.float64)
    if refs.ndim != 2:
        raise DimensionMismatch(
            f"reference block must be 2-d (N x d), got shape {refs.shape}")
    n, d = refs.shape
    if n < 1:
        raise EmptyClass(f"class {label!r} has no reference embeddings")
    if not np.all(np.isfinite(refs)):
        raise NonFinite(f"class {label!r} contains non-finite embedding values")
    if eps < 0.0:
        # eps == 0 is allowed so ablations can exercise the unregularized
        # failure mode; the factorization's pivot check decides the outcome.
        raise ValueError(f"eps must be >= 0, got {eps}")

    mean = refs.mean(axis=0)
    centered = refs - mean
    cov = centered.T @ centered / n
    cov[np.diag_indices(d)] += eps

    try:
        factor = linalg.cholesky_factor(linalg.SymMatrix.from_dense(cov))
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(
            exc.pivot_index, exc.pivot_value,
            context=f"class {label!r} (n={n}, d={d}, eps={eps:g})") from exc
    w = linalg.invert_lower(factor)
    log_det_cov = -2.0 * float(np.sum(np.log(w.diagonal())))
    return ClassGaussian(class_id=class_id, label=label, mean=mean,
                         inv_factor=w, log_det_cov=log_det_cov,
                         n_ref=n, eps=eps)


def log_density(g: ClassGaussian, e) -> float:
    """Log multivariate-normal density of embedding ``e`` under ``g``."""
    e = np.asarray(e, dtype=np.float64)
    d = g.dim
    if e.shape != (d,):
        raise DimensionMismatch(
            f"embedding has shape {e.shape}, model dimension is {d}")
    z = g.inv_factor.dense() @ (e - g.mean)
    return -0.5 * (d * LOG_2PI + g.log_det_cov + float(z @ z))
