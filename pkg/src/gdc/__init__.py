"""Gaussian classifier over image embeddings.

Fit one regularized full-covariance Gaussian per class from reference
embeddings, classify via Bayes-rule posteriors in the log domain, audit
per-class feature Gaussianity, and exchange data through compact binary
archive formats.
"""

from .archive import (
    EmbeddingArchive,
    GenerationManifest,
    expand_manifest,
    read_embeddings,
    read_model,
    write_embeddings,
    write_model,
)
from .estimator import GaussianEmbeddingClassifier
from .gaussian import ClassGaussian, fit_class, log_density
from .mixture import (
    GdcModel,
    Posterior,
    assemble,
    classify,
    classify_batch,
    inject_real,
    posterior,
)
from .normality import NormalityReport, audit, pca_project, shapiro_wilk

__all__ = [
    "ClassGaussian",
    "EmbeddingArchive",
    "GaussianEmbeddingClassifier",
    "GdcModel",
    "GenerationManifest",
    "NormalityReport",
    "Posterior",
    "assemble",
    "audit",
    "classify",
    "classify_batch",
    "expand_manifest",
    "fit_class",
    "inject_real",
    "log_density",
    "pca_project",
    "posterior",
    "read_embeddings",
    "read_model",
    "shapiro_wilk",
    "write_embeddings",
    "write_model",
]

__version__ = "0.1.0"
