"""Per-class Gaussianity auditing: PCA of embedding blocks and the
Shapiro-Wilk normality test applied to principal-component scores.

The Shapiro-Wilk weights use the Blom approximation to the expected
normal order statistics with Royston's (1995) polynomial end corrections,
and p-values come from Royston's normalizing transformations of W.  Exact
coefficients would need the full covariance matrix of normal order
statistics, which is impractical beyond tiny n; the approximation is
valid for 3 <= n <= 5000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .archive import EmbeddingArchive
from .errors import (
    ComponentCountOutOfRange,
    ConstantSample,
    GdcError,
    SampleTooLarge,
    SampleTooSmall,
    TooFewSamples,
)

__all__ = [
    "PcaProjection",
    "SwResult",
    "NormalityReport",
    "inverse_normal_cdf",
    "pca_project",
    "shapiro_wilk",
    "audit",
]


# -- inverse normal CDF ------------------------------------------------------

_ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02,
           -2.759285104469687e+02, 1.383577518672690e+02,
           -3.066479806614716e+01, 2.506628277459239e+00)
_ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02,
           -1.556989798598866e+02, 6.680131188771972e+01,
           -1.328068155288572e+01)
_ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01,
           -2.400758277161838e+00, -2.549732539343734e+00,
           4.374664141464968e+00, 2.938163982698783e+00)
_ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01,
           2.445134137142996e+00, 3.754408661907416e+00)


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def inverse_normal_cdf(p: float) -> float:
    """Standard normal quantile function.

    Rational approximation (central + tail branches) followed by one
    Halley refinement, accurate to well below 1e-9 absolute.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    a, b, c, d = _ICDF_A, _ICDF_B, _ICDF_C, _ICDF_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q
              + c[5])
             / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r
              + a[5]) * q
             / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r
                + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q
               + c[5])
              / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    # One Halley step against the exact CDF.
    e = _normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    x -= u / (1.0 + 0.5 * x * u)
    return x


# -- Shapiro-Wilk ------------------------------------------------------------

@dataclass
class SwResult:
    n: int
    W: float
    p_value: float


def _sw_weights(n: int) -> np.ndarray:
    if n == 3:
        r = math.sqrt(0.5)
        return np.array([-r, 0.0, r])
    m = np.array([inverse_normal_cdf((i - 0.375) / (n + 0.25))
                  for i in range(1, n + 1)])
    summ2 = float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    # Royston's polynomial corrections for the largest one/two weights.
    a_n = (((((-2.706056 * rsn + 4.434685) * rsn - 2.071190) * rsn
             - 0.147981) * rsn + 0.221157) * rsn + m[-1] / ssumm2)
    a = np.empty(n)
    if n > 5:
        a_n1 = (((((-3.582633 * rsn + 5.682633) * rsn - 1.752461) * rsn
                  - 0.293762) * rsn + 0.042981) * rsn + m[-2] / ssumm2)
        phi = ((summ2 - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2)
               / (1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2))
        a[2:n - 2] = m[2:n - 2] / math.sqrt(phi)
        a[-1] = a_n
        a[-2] = a_n1
        a[0] = -a_n
        a[1] = -a_n1
    else:
        phi = (summ2 - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        a[1:n - 1] = m[1:n - 1] / math.sqrt(phi)
        a[-1] = a_n
        a[0] = -a_n
    return a


def _sw_p_value(w: float, n: int) -> float:
    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w))
                               - math.asin(math.sqrt(0.75)))
        return min(max(p, 0.0), 1.0)
    if n <= 11:
        g = -2.273 + 0.459 * n
        mu = 0.5440 - 0.39978 * n + 0.025054 * n ** 2 - 0.0006714 * n ** 3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n ** 2
                         - 0.0020322 * n ** 3)
        arg = g - math.log(1.0 - w)
        if arg <= 0.0:
            return 0.0
        z = (-math.log(arg) - mu) / sigma
    else:
        u = math.log(n)
        mu = -1.5861 - 0.31082 * u - 0.083751 * u ** 2 + 0.0038915 * u ** 3
        sigma = math.exp(-0.4803 - 0.082676 * u + 0.0030302 * u ** 2)
        z = (math.log(1.0 - w) - mu) / sigma
    return min(max(1.0 - _normal_cdf(z), 0.0), 1.0)


def shapiro_wilk(sample) -> SwResult:
    """Shapiro-Wilk normality test for a univariate sample, 3 <= n <= 5000.

    W = (sum_i a_i x_(i))^2 / sum_i (x_i - mean)^2 with order-statistic
    weights a_i; p is the upper-tail probability under the null of
    normality.
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    n = x.size
    if n < 3:
        raise SampleTooSmall(f"need at least 3 observations, got {n}")
    if n > 5000:
        raise SampleTooLarge(
            f"n={n} exceeds the approximation's valid range (5000)")
    xs = np.sort(x)
    denom = float(np.sum((xs - xs.mean()) ** 2))
    if denom <= 0.0:
        raise ConstantSample("sample is constant; W is undefined")
    a = _sw_weights(n)
    w = float(a @ xs) ** 2 / denom
    w = min(w, 1.0)
    return SwResult(n=n, W=w, p_value=_sw_p_value(w, n))


# -- PCA ---------------------------------------------------------------------

@dataclass
class PcaProjection:
    """Principal axes, explained variances, and projected scores for one
    class's embedding block."""

    components: np.ndarray          # c x d, rows are unit axes
    explained_variance: np.ndarray  # c values, descending, >= 0
    scores: np.ndarray              # N x c
    class_label: str


def pca_project(E, c: int, class_label: str = "") -> PcaProjection:
    """Project an N x d block onto its first ``c`` principal components.

    Data is centered; the covariance uses the maximum-likelihood divisor
    N, so each score column's ML variance equals its eigenvalue.
    """
    E = np.asarray(E, dtype=np.float64)
    if E.ndim != 2:
        raise TooFewSamples(f"expected an N x d block, got shape {E.shape}")
    n, d = E.shape
    if n < 2:
        raise TooFewSamples(f"PCA needs at least 2 samples, got {n}")
    if not 1 <= c <= min(n - 1, d):
        raise ComponentCountOutOfRange(
            f"component count {c} outside [1, {min(n - 1, d)}] "
            f"for N={n}, d={d}")
    centered = E - E.mean(axis=0)
    cov = centered.T @ centered / n
    spectrum = linalg.sym_eig(linalg.SymMatrix.from_dense(cov))
    variance = np.clip(spectrum.eigenvalues[:c], 0.0, None)
    axes = spectrum.eigenvectors[:, :c].T
    scores = centered @ axes.T
    return PcaProjection(components=axes, explained_variance=variance,
                         scores=scores, class_label=class_label)


# -- audit -------------------------------------------------------------------

@dataclass
class ClassNormality:
    label: str
    results: list[SwResult]
    pass_fraction: float


@dataclass
class NormalityReport:
    classes: list[ClassNormality]
    alpha: float
    pass_fraction: float  # pooled over every component of every class


def audit(archive: EmbeddingArchive, c: int = 30,
          alpha: float = 0.05) -> NormalityReport:
    """Per-class PCA followed by Shapiro-Wilk on each score column.

    A component "passes" when its p-value exceeds ``alpha`` (normality
    not rejected).  The report carries both pooled and per-class pass
    fractions.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    classes = []
    passed = 0
    total = 0
    for label, block in archive.classes:
        n = block.shape[0]
        if n < max(4, c + 1):
            raise TooFewSamples(
                f"class {label!r}: N={n} is too small for c={c} components")
        try:
            proj = pca_project(np.asarray(block, dtype=np.float64), c,
                               class_label=label)
            results = [shapiro_wilk(proj.scores[:, j]) for j in range(c)]
        except GdcError as exc:
            raise type(exc)(f"class {label!r}: {exc}") from exc
        ok = sum(1 for r in results if r.p_value > alpha)
        classes.append(ClassNormality(label=label, results=results,
                                      pass_fraction=ok / c))
        passed += ok
        total += c
    return NormalityReport(classes=classes, alpha=alpha,
                           pass_fraction=passed / total)
