"""Closed-form asymptotic power and relative-efficiency formulas.

The limiting power of the sign sum test is Phi(-z_alpha + shift) with shift
c1^2 n tr(S0 S1) / (sqrt(2) tr(S0^2)), where c1 = E(r) E(1/r) for the radial
variable of the elliptical decomposition; the raw sum test replaces c1^2 by
E^2(r)/E(r^2). Their efficiency ratio lim E^2(1/r) E(r^2) has closed forms
for the normal, multivariate t, and normal scale-mixture families.

All gamma ratios are evaluated in log space; Gamma(p/2) overflows quickly
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

from .core import normal_upper_quantile, normal_upper_tail
from .errors import InvalidInputError, UndefinedMomentError

__all__ = [
    "MixtureNormal",
    "Normal",
    "PowerInput",
    "RadialMoments",
    "StudentT",
    "are_ss_flm",
    "chi_radial_c1",
    "power_flm",
    "power_ss",
    "radial_moments",
]


@dataclass(frozen=True)
class Normal:
    """Standard normal directions; the radial part is chi with p dof."""


@dataclass(frozen=True)
class StudentT:
    """Multivariate t directions with v degrees of freedom (v > 2)."""

    v: float

    def __post_init__(self):
        if not self.v > 2.0:
            raise UndefinedMomentError("StudentT needs v > 2 for a finite second moment")


@dataclass(frozen=True)
class MixtureNormal:
    """Two-component normal scale mixture.

    v is the weight of the inflated component and sigma its standard
    deviation multiplier, so the density is (1-v) N(0, I) + v N(0, sigma^2 I).
    """

    v: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.v < 1.0:
            raise InvalidInputError("mixture weight v must lie strictly between 0 and 1")
        if not self.sigma > 0.0:
            raise InvalidInputError("sigma must be positive")


RadialDistribution = Normal | StudentT | MixtureNormal


def _log_gamma_ratio(a: float, b: float) -> float:
    return float(gammaln(a) - gammaln(b))


def chi_radial_c1(dof: float) -> float:
    """E(R) * E(1/R) for R chi-distributed with the given degrees of freedom."""
    if not dof > 1.0:
        raise UndefinedMomentError("chi radial c1 needs more than 1 degree of freedom")
    return math.exp(
        gammaln((dof + 1.0) / 2.0) + gammaln((dof - 1.0) / 2.0) - 2.0 * gammaln(dof / 2.0)
    )


@dataclass(frozen=True)
class PowerInput:
    """Inputs to the limiting power formulas.

    tr_s0s1 and tr_s0sq are tr(Sigma0 Sigma1) and tr(Sigma0^2); c1 feeds the
    sign test and moment_ratio = E^2(r)/E(r^2) feeds the raw-vector test.
    """

    n: int
    tr_s0s1: float
    tr_s0sq: float
    c1: float = 1.0
    moment_ratio: float = 1.0
    alpha: float = 0.05

    def __post_init__(self):
        if not isinstance(self.n, (int,)) or self.n < 1:
            raise InvalidInputError("n must be a positive integer")
        if not self.tr_s0sq > 0.0:
            raise InvalidInputError("tr_s0sq must be positive")
        if not self.c1 >= 1.0:
            raise InvalidInputError("c1 = E(r) E(1/r) is at least 1")
        if not 0.0 < self.moment_ratio <= 1.0 + 1e-12:
            raise InvalidInputError("moment_ratio = E^2(r)/E(r^2) must lie in (0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie strictly between 0 and 1")


def _power(shift: float, alpha: float) -> float:
    return normal_upper_tail(normal_upper_quantile(alpha) - shift)


def power_ss(inputs: PowerInput) -> float:
    """Limiting power of the sign sum test under the lag-one alternative."""
    shift = (
        inputs.c1**2 * inputs.n * inputs.tr_s0s1 / (math.sqrt(2.0) * inputs.tr_s0sq)
    )
    return _power(shift, inputs.alpha)


def power_flm(inputs: PowerInput) -> float:
    """Limiting power of the raw-vector sum test under the same alternative."""
    shift = (
        inputs.moment_ratio * inputs.n * inputs.tr_s0s1 / (math.sqrt(2.0) * inputs.tr_s0sq)
    )
    return _power(shift, inputs.alpha)


@dataclass(frozen=True)
class RadialMoments:
    """Finite-p radial moments: E(1/r), E(r^2), and c1 = E(r) E(1/r)."""

    e_r_inv: float
    e_r2: float
    c1: float


def radial_moments(dist: RadialDistribution, p: int) -> RadialMoments:
    """Closed-form radial moments of the elliptical decomposition at dimension p.

    For the scale mixture, E(1/r) follows the published closed form, which
    normalizes the scatter to the covariance; E(r^2) and c1 use the exact
    unnormalized scale-mixture moments.
    """
    if not isinstance(p, (int,)) or p < 2:
        raise InvalidInputError("p must be an integer >= 2")
    half_ratio = _log_gamma_ratio((p - 1) / 2.0, p / 2.0)
    if isinstance(dist, Normal):
        e_r_inv = math.exp(half_ratio) / math.sqrt(2.0)
        return RadialMoments(e_r_inv, float(p), chi_radial_c1(p))
    if isinstance(dist, StudentT):
        v = float(dist.v)
        e_r_inv = math.exp(
            _log_gamma_ratio((v + 1.0) / 2.0, v / 2.0) + half_ratio
        ) / math.sqrt(v)
        e_r2 = p * v / (v - 2.0)
        c1 = chi_radial_c1(p) * chi_radial_c1(v)
        return RadialMoments(e_r_inv, e_r2, c1)
    if isinstance(dist, MixtureNormal):
        v, s = float(dist.v), float(dist.sigma)
        e_r_inv = (
            (v + (1.0 - v) / s)
            * math.sqrt(v + (1.0 - v) * s * s)
            / math.sqrt(2.0)
            * math.exp(half_ratio)
        )
        e_r2 = p * (1.0 - v + v * s * s)
        c1 = ((1.0 - v) + v * s) * ((1.0 - v) + v / s) * chi_radial_c1(p)
        return RadialMoments(e_r_inv, e_r2, c1)
    raise InvalidInputError(f"unsupported distribution {dist!r}")


def are_ss_flm(dist: RadialDistribution) -> float:
    """Large-p efficiency of the sign sum test relative to the raw sum test.

    Exactly 1 for normal directions; 2/(v-2) (Gamma((v+1)/2)/Gamma(v/2))^2
    for the t family; and a rational function of the mixture weight and scale
    for the normal scale mixture. Always at least 1.
    """
    if isinstance(dist, Normal):
        return 1.0
    if isinstance(dist, StudentT):
        v = float(dist.v)
        return (2.0 / (v - 2.0)) * math.exp(
            2.0 * _log_gamma_ratio((v + 1.0) / 2.0, v / 2.0)
        )
    if isinstance(dist, MixtureNormal):
        v, s = float(dist.v), float(dist.sigma)
        spread = v * (1.0 - v)
        return (1.0 + spread * (s - 1.0 / s) ** 2) / (1.0 + spread * (1.0 - 1.0 / s) ** 2)
    raise InvalidInputError(f"unsupported distribution {dist!r}")
