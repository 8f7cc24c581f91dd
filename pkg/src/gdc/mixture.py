"""Assemble per-class Gaussians into a classifier and score embeddings.

All posterior computation stays in the log domain until the final
exponential; at d ~ 1500 the per-class log-likelihoods reach magnitudes
around 1e4, so probabilities are normalized with max-subtraction
log-sum-exp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .archive import EmbeddingArchive
from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    EmptyClass,
    InsufficientRealSamples,
    LabelMismatch,
    NegativePrior,
)
from .gaussian import ClassGaussian, log_density

__all__ = [
    "GdcModel",
    "Posterior",
    "assemble",
    "posterior",
    "classify",
    "classify_batch",
    "inject_real",
]


@dataclass
class GdcModel:
    """k class Gaussians plus priors; immutable after assembly."""

    components: list[ClassGaussian]
    priors: np.ndarray
    labels: list[str]
    d: int

    @property
    def k(self) -> int:
        return len(self.components)


@dataclass
class Posterior:
    """Per-class log-joints and normalized probabilities for one embedding.

    ``top_k`` ranks all classes by probability descending (ties by lower
    class index); callers slice the prefix they need.
    """

    log_joint: np.ndarray
    probs: np.ndarray
    predicted: int
    top_k: list[tuple[int, float]]


def assemble(components, priors=None) -> GdcModel:
    """Build a classifier from fitted components.

    Priors default to uniform; supplied priors must be non-negative and
    are normalized to sum to one.
    """
    components = list(components)
    k = len(components)
    if k < 1:
        raise EmptyClass("a model needs at least one component")
    d = components[0].dim
    for g in components:
        if g.dim != d:
            raise DimensionMismatch(
                f"component {g.label!r} has dimension {g.dim}, expected {d}")
    labels = [g.label for g in components]
    if len(set(labels)) != k:
        seen = set()
        dup = next(l for l in labels if l in seen or seen.add(l))
        raise DuplicateLabel(f"duplicate class label {dup!r}")
    if priors is None:
        pri = np.full(k, 1.0 / k)
    else:
        pri = np.asarray(priors, dtype=np.float64)
        if pri.shape != (k,):
            raise DimensionMismatch(
                f"got {pri.shape[0] if pri.ndim == 1 else pri.shape} priors "
                f"for {k} components")
        if np.any(pri < 0.0):
            raise NegativePrior("priors must be non-negative")
        total = pri.sum()
        if not total > 0.0:
            raise NegativePrior("priors must not all be zero")
        pri = pri / total
    return GdcModel(components=components, priors=pri, labels=labels, d=d)


def _posterior_from_log_joint(log_joint: np.ndarray) -> Posterior:
    m = np.max(log_joint)
    shifted = np.exp(log_joint - m)
    probs = shifted / shifted.sum()
    predicted = int(np.argmax(log_joint))  # argmax takes the lowest index on ties
    ranked = sorted(range(len(log_joint)),
                    key=lambda i: (-log_joint[i], i))
    top = [(i, float(probs[i])) for i in ranked]
    return Posterior(log_joint=log_joint, probs=probs,
                     predicted=predicted, top_k=top)


def posterior(model: GdcModel, e) -> Posterior:
    """Bayes posterior over classes for one embedding."""
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (model.d,):
        raise DimensionMismatch(
            f"embedding has shape {e.shape}, model dimension is {model.d}")
    with np.errstate(divide="ignore"):  # zero priors contribute -inf
        log_pri = np.log(model.priors)
    log_joint = np.array(
        [log_pri[i] + log_density(g, e)
         for i, g in enumerate(model.components)])
    return _posterior_from_log_joint(log_joint)


def classify(model: GdcModel, e) -> int:
    """Predicted class index (argmax of the log-joint, lowest index wins ties)."""
    return posterior(model, e).predicted


def classify_batch(model: GdcModel, E) -> list[Posterior]:
    """Score a block of embeddings, one Posterior per row.

    Each row goes through the exact single-sample path so batch results
    are bitwise identical to individual calls.
    """
    E = np.asarray(E, dtype=np.float64)
    if E.ndim != 2:
        raise DimensionMismatch(f"expected an M x d block, got shape {E.shape}")
    if E.shape[0] > 0 and E.shape[1] != model.d:
        raise DimensionMismatch(
            f"block has {E.shape[1]} columns, model dimension is {model.d}")
    return [posterior(model, row) for row in E]


def inject_real(archive: EmbeddingArchive, real: EmbeddingArchive,
                per_class: int, seed: int) -> EmbeddingArchive:
    """Replace ``per_class`` reference rows per class with rows drawn from
    a real-data archive.

    Replacement (not appending) keeps each class's row count unchanged.
    Rows on both sides are drawn uniformly without replacement from a
    seeded generator, so results are deterministic for a fixed seed.
    """
    if per_class < 0:
        raise ValueError(f"per_class must be >= 0, got {per_class}")
    if archive.d != real.d:
        raise LabelMismatch(
            f"dimension mismatch: references d={archive.d}, real d={real.d}")
    real_blocks = dict(real.classes)
    ref_labels = [label for label, _ in archive.classes]
    if set(ref_labels) != set(real_blocks):
        missing = sorted(set(ref_labels) ^ set(real_blocks))
        raise LabelMismatch(f"label sets differ, e.g. {missing[:3]}")

    rng = np.random.default_rng(seed)
    out = []
    for label, block in archive.classes:
        block = block.copy()
        real_block = real_blocks[label]
        if per_class > block.shape[0]:
            raise InsufficientRealSamples(
                f"class {label!r}: cannot replace {per_class} of "
                f"{block.shape[0]} reference rows")
        if per_class > real_block.shape[0]:
            raise InsufficientRealSamples(
                f"class {label!r}: {real_block.shape[0]} real samples "
                f"available, {per_class} requested")
        if per_class > 0:
            ref_idx = rng.choice(block.shape[0], size=per_class, replace=False)
            real_idx = rng.choice(real_block.shape[0], size=per_class,
                                  replace=False)
            block[ref_idx] = real_block[real_idx]
        out.append((label, block))
    return EmbeddingArchive(d=archive.d, classes=out)
