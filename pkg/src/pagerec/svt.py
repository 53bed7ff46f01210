"""Low-rank matrix estimation by hard singular value thresholding.

The estimator rescales the matrix entrywise into [-1, 1], zeroes every
singular value at or below a closed-form cutoff that depends only on the
aspect ratio, and maps the truncated reconstruction back to the original
range. No rank input and no noise-level estimate is required; the full
spectrum is reported so callers can audit what was kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

__all__ = ["OsvtOutcome", "scale_to_unit", "optimal_threshold", "osvt_estimate"]


def scale_to_unit(X: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Affinely map entries of X into [-1, 1].

    Returns (Y, a, b) with a = min(X), b = max(X) and
    y = (x - (a+b)/2) / ((b-a)/2). A constant matrix (a == b) is returned
    unchanged; callers detect that case via a == b.
    """
    X = np.asarray(X, dtype=float)
    if not np.isfinite(X).all():
        raise NumericError("matrix has non-finite entries")
    a = float(X.min())
    b = float(X.max())
    if a == b:
        return X.copy(), a, b
    return (X - 0.5 * (a + b)) / (0.5 * (b - a)), a, b


def optimal_threshold(m: int, n: int) -> float:
    """Hard threshold for the singular values of an m x n matrix, m <= n.

    With aspect ratio z = m/n:
        sqrt(2(z+1) + 8z / ((z+1) + sqrt(z^2 + 14z + 1)))
    """
    if not 1 <= m <= n:
        raise ValueError(f"require 1 <= m <= n, got m={m}, n={n}")
    z = m / n
    return math.sqrt(2.0 * (z + 1.0) + 8.0 * z / ((z + 1.0) + math.sqrt(z * z + 14.0 * z + 1.0)))


@dataclass(frozen=True)
class OsvtOutcome:
    """Result of one thresholded estimation.

    estimate has the input's shape; singular_values is the full spectrum of
    the scaled matrix; kept_rank counts the values above threshold (at least
    one: an empty kept set falls back to the top singular triple, flagged by
    fallback_rank1). constant_input marks the degenerate a == b case where
    the input is returned unchanged.
    """

    estimate: np.ndarray
    kept_rank: int
    singular_values: np.ndarray
    threshold: float
    scale_bounds: tuple[float, float]
    constant_input: bool = False
    fallback_rank1: bool = False


def osvt_estimate(X: np.ndarray) -> OsvtOutcome:
    """Denoise X by optimal hard thresholding of its scaled spectrum.

    Wide or tall inputs are both accepted; internally the estimation runs on
    the orientation with rows <= columns and transposes back, so the result
    is transpose-consistent.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise NumericError(f"expected a 2-D matrix, got shape {X.shape}")
    m, n = X.shape
    if m > n:
        out = osvt_estimate(X.T)
        return OsvtOutcome(
            estimate=out.estimate.T,
            kept_rank=out.kept_rank,
            singular_values=out.singular_values,
            threshold=out.threshold,
            scale_bounds=out.scale_bounds,
            constant_input=out.constant_input,
            fallback_rank1=out.fallback_rank1,
        )

    Y, a, b = scale_to_unit(X)
    threshold = optimal_threshold(m, n)
    try:
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from exc

    if a == b:
        return OsvtOutcome(
            estimate=X.copy(),
            kept_rank=1,
            singular_values=s,
            threshold=threshold,
            scale_bounds=(a, b),
            constant_input=True,
        )

    keep = s > threshold
    fallback = not keep.any()
    if fallback:
        keep = np.zeros_like(keep)
        keep[0] = True
    Yhat = (U[:, keep] * s[keep]) @ Vt[keep]
    estimate = Yhat * (0.5 * (b - a)) + 0.5 * (a + b)
    return OsvtOutcome(
        estimate=estimate,
        kept_rank=int(keep.sum()),
        singular_values=s,
        threshold=threshold,
        scale_bounds=(a, b),
        fallback_rank1=fallback,
    )
