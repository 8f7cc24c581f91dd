"""Scikit-learn estimator facade over the Gaussian classifier.

Wraps per-class fitting and Bayes-posterior scoring in the familiar
fit / predict / predict_proba surface so the classifier composes with
pipelines, grid search, and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import mixture
from .gaussian import fit_class

__all__ = ["GaussianEmbeddingClassifier"]


class GaussianEmbeddingClassifier(BaseEstimator, ClassifierMixin):
    """Generative classifier: one regularized full-covariance Gaussian per
    class, prediction by Bayes-rule posterior in the log domain.

    Parameters
    ----------
    eps : float, default 1e-8
        Ridge added to each class covariance (S + eps*I); keeps the
        factorization positive definite when a class has fewer samples
        than feature dimensions.
    priors : array-like of shape (n_classes,), optional
        Class prior weights.  Uniform when omitted; normalized to sum
        to one otherwise.
    """

    def __init__(self, eps: float = 1e-8, priors=None):
        self.eps = eps
        self.priors = priors

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        components = [
            fit_class(X[encoded == i], self.eps, class_id=i, label=str(c))
            for i, c in enumerate(self.classes_)
        ]
        self.model_ = mixture.assemble(components, priors=self.priors)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        idx = [p.predicted for p in mixture.classify_batch(self.model_, X)]
        return self.classes_[idx]

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return np.vstack(
            [p.probs for p in mixture.classify_batch(self.model_, X)])

    def predict_log_joint(self, X):
        """Unnormalized log posterior (log prior + log likelihood) per class."""
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return np.vstack(
            [p.log_joint for p in mixture.classify_batch(self.model_, X)])
