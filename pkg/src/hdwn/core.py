"""Domain types, the spatial-sign transform, and shared nuisance estimators.

Everything here is a pure function of its inputs; the matrix types freeze
their data on construction and are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    InsufficientSampleError,
    InvalidInputError,
    InvalidLagError,
)

__all__ = [
    "LagWindow",
    "SeriesMatrix",
    "SignMatrix",
    "TestOutcome",
    "ZERO_NORM_THRESHOLD",
    "as_lag",
    "as_series",
    "as_signs",
    "normal_upper_quantile",
    "normal_upper_tail",
    "sign_transform",
    "spatial_sign",
    "trace_omega2_from_gram",
    "trace_omega2_hat",
    "trace_sigma2_from_gram",
    "trace_sigma2_hat",
]

#: Rows whose largest magnitude falls below this are treated as exact zeros.
ZERO_NORM_THRESHOLD = 1e-300

_SIGN_NORM_TOL = 1e-9


def _validated_matrix(data, name: str) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise InsufficientSampleError(f"{name} needs at least 2 rows, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise InvalidInputError(f"{name} needs at least 1 column")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SeriesMatrix:
    """An n-by-p block of observations, one time point per row, rows in time order."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _validated_matrix(self.data, "series"))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Spatial signs of a series: every row has unit norm or is exactly zero."""

    data: np.ndarray

    def __post_init__(self):
        arr = _validated_matrix(self.data, "signs")
        norms = np.sqrt((arr * arr).sum(axis=1))
        ok = (np.abs(norms - 1.0) <= _SIGN_NORM_TOL) | (norms == 0.0)
        if not bool(ok.all()):
            raise InvalidInputError("sign rows must have norm 1 or be exactly zero")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LagWindow:
    """Portmanteau lag window: statistics scan lags 1 through H."""

    H: int

    def __post_init__(self):
        if isinstance(self.H, bool) or not isinstance(self.H, (int, np.integer)):
            raise InvalidInputError("H must be an integer")
        object.__setattr__(self, "H", int(self.H))
        if self.H < 1:
            raise InvalidLagError("H must be at least 1")

    def check_against(self, n: int) -> None:
        """Lags past n - 1 index before the start of the sample; reject them.

        A lag h = n - 1 is allowed and contributes an empty (hence zero) pair
        sum; the normalization 1/(n - h) only breaks down at h = n.
        """
        if self.H > n - 1:
            raise InvalidLagError(f"H={self.H} too large for n={n} rows (need H <= n-1)")


def as_lag(H) -> LagWindow:
    """Coerce an int or LagWindow to a LagWindow."""
    return H if isinstance(H, LagWindow) else LagWindow(H)


def as_series(x) -> SeriesMatrix:
    if isinstance(x, SeriesMatrix):
        return x
    if isinstance(x, SignMatrix):
        return SeriesMatrix(x.data)
    return SeriesMatrix(x)


def as_signs(x) -> SignMatrix:
    return x if isinstance(x, SignMatrix) else SignMatrix(x)


@dataclass(frozen=True)
class TestOutcome:
    """Result of one hypothesis test at one lag window.

    The reject flag always equals ``p_value < alpha``; for the normal-limit
    tests the p-value is the upper tail of the standardized statistic.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    statistic: float
    standardized: float
    p_value: float
    reject: bool
    alpha: float
    nuisance: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie strictly between 0 and 1")
        if not 0.0 <= self.p_value <= 1.0:
            raise InvalidInputError("p_value must lie in [0, 1]")
        if bool(self.reject) != (self.p_value < self.alpha):
            raise InvalidInputError("reject flag inconsistent with p_value and alpha")


def spatial_sign(x) -> np.ndarray:
    """Direction vector x / ||x||, or the zero vector when x is zero.

    The norm is computed on max-magnitude-rescaled entries so the squared sum
    can neither overflow nor underflow; rescaling by a power of two is exact,
    which keeps the map exactly invariant under such scalings.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise InvalidInputError(f"expected a vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise InvalidInputError("spatial_sign input contains non-finite entries")
    scale = float(np.max(np.abs(v)))
    if scale < ZERO_NORM_THRESHOLD:
        return np.zeros_like(v)
    w = v / scale
    return w / math.sqrt(float((w * w).sum()))


def sign_transform(eps) -> SignMatrix:
    """Apply the spatial-sign map to every row of a series."""
    X = as_series(eps).data
    scales = np.max(np.abs(X), axis=1)
    # dividing near-zero rows by inf gives exact zeros without a branch
    safe_scale = np.where(scales < ZERO_NORM_THRESHOLD, np.inf, scales)
    W = X / safe_scale[:, None]
    norms = np.sqrt((W * W).sum(axis=1))
    safe_norm = np.where(norms == 0.0, np.inf, norms)
    return SignMatrix(W / safe_norm[:, None])


def _offdiag_square_sum(G: np.ndarray) -> float:
    d = np.diagonal(G)
    return float((G * G).sum() - (d * d).sum())


def trace_omega2_from_gram(G: np.ndarray, n: int) -> float:
    """Pairwise estimate of tr(Omega^2) from a precomputed sign Gram matrix.

    Equals 2/(n(n-1)) times the sum of squared inner products over unordered
    row pairs; clipped into [0, 1], the exact range for unit or zero rows.
    """
    est = _offdiag_square_sum(G) / (n * (n - 1))
    return min(max(est, 0.0), 1.0)


def trace_sigma2_from_gram(G: np.ndarray, n: int) -> float:
    """Raw-vector analogue of trace_omega2_from_gram; nonnegative, unbounded."""
    return max(_offdiag_square_sum(G) / (n * (n - 1)), 0.0)


def trace_omega2_hat(signs) -> float:
    """Estimate tr(Omega^2), Omega the second moment of the spatial signs.

    Mean of squared pairwise inner products of the sign rows over all ordered
    pairs s != t. Consistent for tr(Omega^2) under the null and always in
    [0, 1].
    """
    U = as_signs(signs).data
    n = U.shape[0]
    if n < 2:
        raise InsufficientSampleError("need at least 2 rows to form a pair")
    G = U @ U.T
    return trace_omega2_from_gram(G, n)


def trace_sigma2_hat(eps) -> float:
    """Estimate tr(Sigma^2) from raw rows: mean squared inner product over pairs."""
    X = as_series(eps).data
    n = X.shape[0]
    if n < 2:
        raise InsufficientSampleError("need at least 2 rows to form a pair")
    G = X @ X.T
    return trace_sigma2_from_gram(G, n)


def normal_upper_tail(z: float) -> float:
    """P(Z > z) for standard normal Z."""
    return float(ndtr(-z))


def normal_upper_quantile(alpha: float) -> float:
    """The z with P(Z > z) = alpha for standard normal Z.

    Computed to double precision; adding 0.0 normalizes the -0.0 produced at
    alpha = 0.5.
    """
    if not 0.0 < float(alpha) < 1.0:
        raise InvalidInputError("alpha must lie strictly between 0 and 1")
    return float(-ndtri(alpha)) + 0.0
