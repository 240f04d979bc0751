"""Sample L-moments and L-moment estimators for the GEV and the GPD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .distributions import EULER_GAMMA, SHAPE_EPS, GevParams, GpdParams

# coefficients of the rational approximation for the GEV shape
_GEV_C1 = 7.8590
_GEV_C2 = 2.9554


class FitError(ValueError):
    """An L-moment estimator produced parameters outside the valid range."""


@dataclass(frozen=True)
class LmomentSet:
    l1: float
    l2: float = 0.0
    l3: float = 0.0
    l4: float = 0.0

    @property
    def t3(self) -> float:
        return lmoment_ratios(self)[0]

    @property
    def t4(self) -> float:
        return lmoment_ratios(self)[1]


def _pwm(x_sorted: np.ndarray, order: int) -> list[float]:
    """Unbiased probability weighted moments b_0..b_{order-1} of a sorted sample.

    The weight of x_(j:n) in b_k is C(j-1, k) / C(n-1, k), built up as the
    product of (j-i)/(n-i) for i = 1..k.
    """
    n = x_sorted.size
    j = np.arange(1, n + 1, dtype=float)
    w = np.ones(n)
    out = [float(x_sorted.mean())]
    for k in range(1, order):
        w = w * (j - k) / (n - k)
        out.append(float(np.dot(w, x_sorted) / n))
    return out


def sample_lmoments(data, max_order: int = 4) -> LmomentSet:
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be in 1..4")
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("cannot compute L-moments of an empty sample")
    if x.size < max_order:
        raise ValueError(f"need at least {max_order} values, got {x.size}")
    b = _pwm(x, max_order) + [0.0] * (4 - max_order)
    l = [0.0] * 4
    for r in range(1, max_order + 1):
        l[r - 1] = sum(
            (-1) ** (r - 1 - k) * math.comb(r - 1, k) * math.comb(r - 1 + k, k) * b[k]
            for k in range(r)
        )
    # l2 is a mean of non-negative pair spreads; clip rounding noise
    return LmomentSet(l[0], max(l[1], 0.0), l[2], l[3])


def lmoment_ratios(lm: LmomentSet) -> tuple[float, float]:
    """(tau_3, tau_4) = (l3 / l2, l4 / l2)."""
    if not lm.l2 > 0:
        raise ValueError("L-moment ratios undefined for l2 = 0 (degenerate sample)")
    return lm.l3 / lm.l2, lm.l4 / lm.l2


def fit_gev_lmom(lm: LmomentSet) -> GevParams:
    if not lm.l2 > 0:
        raise FitError("GEV fit needs l2 > 0")
    f = 2 * lm.l2 / (lm.l3 + 3 * lm.l2) - math.log(2) / math.log(3)
    xi = -_GEV_C1 * f - _GEV_C2 * f * f
    if not math.isfinite(xi) or xi >= 1:
        raise FitError(f"GEV shape estimate {xi} outside (-inf, 1)")
    if abs(xi) < SHAPE_EPS:
        sigma = lm.l2 / math.log(2)
        return GevParams(xi, sigma, lm.l1 - EULER_GAMMA * sigma)
    g = gamma(1 - xi)
    sigma = -xi * lm.l2 / (g * -math.expm1(xi * math.log(2)))
    if not (math.isfinite(sigma) and sigma > 0):
        raise FitError(f"GEV scale estimate {sigma} not positive")
    mu = lm.l1 - sigma * (g - 1) / xi
    return GevParams(xi, sigma, mu)


def fit_gpd_known_threshold(lm: LmomentSet, threshold: float) -> GpdParams:
    excess = lm.l1 - threshold
    if not excess > 0:
        raise FitError(f"mean {lm.l1} does not exceed threshold {threshold}")
    if not lm.l2 > 0:
        raise FitError("GPD fit needs l2 > 0")
    kappa = 2 - excess / lm.l2
    beta = (1 - kappa) * excess
    if not beta > 0:
        raise FitError(f"GPD scale estimate {beta} not positive (shape {kappa})")
    return GpdParams(kappa, beta, threshold)
