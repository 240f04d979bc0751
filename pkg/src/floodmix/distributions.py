"""Generalized Pareto and GEV distributions.

Shape sign convention: positive shape means a heavy upper tail for both
families, i.e. ``G(x) = 1 - (1 + k (x - u) / b) ** (-1 / k)`` and
``F(x) = exp(-(1 + xi (x - mu) / sigma) ** (-1 / xi))``.

All CDFs are total functions: below the support they return 0, above a
finite upper bound they return 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

SHAPE_EPS = 1e-8
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class GpdParams:
    shape: float
    scale: float
    threshold: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"GPD scale must be positive, got {self.scale}")

    @property
    def upper_bound(self) -> float:
        if self.shape < 0:
            return self.threshold - self.scale / self.shape
        return math.inf


@dataclass(frozen=True)
class GevParams:
    shape: float
    scale: float
    location: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"GEV scale must be positive, got {self.scale}")


def _box_cox(t, shape):
    """``(t**shape - 1) / shape`` with the ``log(t)`` limit at zero shape"""
    if abs(shape) < SHAPE_EPS:
        return np.log(t)
    return np.expm1(shape * np.log(t)) / shape


def _log_tail(z, shape):
    """``log((1 + shape*z) ** (-1/shape))``, i.e. ``-z`` at zero shape"""
    if abs(shape) < SHAPE_EPS:
        return -z
    return -np.log1p(shape * z) / shape


def _scalar_or_array(out, x):
    return float(out) if np.ndim(x) == 0 else out


def gpd_cdf(p: GpdParams, x):
    x = np.asarray(x, dtype=float)
    z = (x - p.threshold) / p.scale
    inside = z > 0
    if p.shape < 0:
        inside &= z < -1.0 / p.shape
    zi = np.where(inside, z, 0.0)
    out = np.where(inside, -np.expm1(_log_tail(zi, p.shape)), 0.0)
    if p.shape < 0:
        out = np.where(z >= -1.0 / p.shape, 1.0, out)
    return _scalar_or_array(out, x)


def gpd_quantile(p: GpdParams, prob):
    prob = np.asarray(prob, dtype=float)
    if np.any((prob < 0) | (prob >= 1)) or np.any(np.isnan(prob)):
        raise ValueError("GPD quantile needs probabilities in [0, 1)")
    # (1 - prob) ** (-shape) - 1, over shape
    out = p.threshold + p.scale * _box_cox(1.0 / (1.0 - prob), p.shape)
    return _scalar_or_array(out, prob)


def gpd_sample(p: GpdParams, count: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws, uniform on [0, 1) mapped through the quantile."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return np.atleast_1d(gpd_quantile(p, rng.random(count)))


def gev_cdf(p: GevParams, x):
    x = np.asarray(x, dtype=float)
    z = (x - p.location) / p.scale
    if abs(p.shape) < SHAPE_EPS:
        out = np.exp(-np.exp(-z))
    else:
        arg = 1.0 + p.shape * z
        inside = arg > 0
        zi = np.where(inside, z, 0.0)
        out = np.where(inside, np.exp(-np.exp(_log_tail(zi, p.shape))), 0.0 if p.shape > 0 else 1.0)
    return _scalar_or_array(out, x)


def gev_quantile(p: GevParams, prob):
    prob = np.asarray(prob, dtype=float)
    if np.any((prob <= 0) | (prob >= 1)) or np.any(np.isnan(prob)):
        raise ValueError("GEV quantile needs probabilities in (0, 1)")
    # ((-ln prob) ** (-shape) - 1) / shape
    out = p.location + p.scale * _box_cox(1.0 / -np.log(prob), p.shape)
    return _scalar_or_array(out, prob)


def gev_sample(p: GevParams, count: int, rng: np.random.Generator) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be non-negative")
    u = rng.random(count)
    # 0 is a possible draw from Generator.random; reflect it into (0, 1)
    u = np.where(u == 0.0, 0.5 * np.nextafter(0.0, 1.0), u)
    return np.atleast_1d(gev_quantile(p, u))


def poisson_pareto_to_gev(rate: float, p: GpdParams) -> GevParams:
    """GEV law of the annual maximum when exceedances of ``p.threshold``
    arrive as a Poisson process with ``rate`` events per year."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    k = p.shape
    if abs(k) < SHAPE_EPS:
        return GevParams(k, p.scale, p.threshold + p.scale * math.log(rate))
    return GevParams(
        shape=k,
        scale=p.scale * rate**k,
        location=p.threshold + p.scale * math.expm1(k * math.log(rate)) / k,
    )


def gpd_population_lmoments(p: GpdParams) -> tuple[float, float]:
    k = p.shape
    if k >= 1:
        raise ValueError("GPD L-moments need shape < 1")
    l1 = p.threshold + p.scale / (1 - k)
    l2 = p.scale / ((1 - k) * (2 - k))
    return l1, l2


def gev_population_lmoments(p: GevParams) -> tuple[float, float, float]:
    """Returns (lambda_1, lambda_2, tau_3)."""
    if p.shape >= 1:
        raise ValueError("GEV L-moments need shape < 1")
    if abs(p.shape) < SHAPE_EPS:
        l1 = p.location + EULER_GAMMA * p.scale
        l2 = p.scale * math.log(2)
        t3 = math.log(9 / 8) / math.log(2)
        return l1, l2, t3
    k = -p.shape
    g = gamma(1 + k)
    l1 = p.location + p.scale * (1 - g) / k
    l2 = p.scale * -math.expm1(-k * math.log(2)) * g / k
    t3 = 2 * -math.expm1(-k * math.log(3)) / -math.expm1(-k * math.log(2)) - 3
    return l1, l2, t3
