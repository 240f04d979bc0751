"""Annual flood-frequency models: TMPS mixture, AMS/GEV and POT/Poisson-Pareto."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .distributions import (
    SHAPE_EPS,
    GevParams,
    GpdParams,
    gev_quantile,
    gpd_cdf,
    poisson_pareto_to_gev,
)
from .lmoments import FitError, fit_gev_lmom, fit_gpd_known_threshold, sample_lmoments

MAX_DOUBLINGS = 1000
REL_WIDTH = 1e-9


@dataclass(frozen=True)
class TmpsComponent:
    gpd: GpdParams
    p0: float

    def __post_init__(self):
        if not 0 <= self.p0 < 1:
            raise ValueError(f"p0 must lie in [0, 1), got {self.p0}")


@dataclass(frozen=True)
class TmpsModel:
    """Product over flood types of ``G_j(x) (1 - p0_j) + p0_j``."""

    components: tuple[TmpsComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("TMPS model needs at least one flood type")

    @classmethod
    def from_params(cls, gpds: Sequence[GpdParams], p0s: Sequence[float]) -> "TmpsModel":
        if len(gpds) != len(p0s):
            raise ValueError("one p0 per flood type required")
        return cls(tuple(TmpsComponent(g, p) for g, p in zip(gpds, p0s)))

    @property
    def floor(self) -> float:
        """H below every threshold, the product of all p0."""
        return math.prod(c.p0 for c in self.components)


@dataclass(frozen=True)
class AmsModel:
    gev: GevParams


@dataclass(frozen=True)
class PotModel:
    gpd: GpdParams
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"POT rate must be positive, got {self.rate}")


Model = Union[TmpsModel, AmsModel, PotModel]


def tmps_cdf(m: TmpsModel, x):
    out = 1.0
    for c in m.components:
        out = out * (np.asarray(gpd_cdf(c.gpd, x)) * (1 - c.p0) + c.p0)
    return float(out) if np.ndim(x) == 0 else out


def _gpd_cdf_scalar(p: GpdParams, x: float) -> float:
    # math-only twin of gpd_cdf for the root-finding inner loop
    z = (x - p.threshold) / p.scale
    if z <= 0:
        return 0.0
    k = p.shape
    if abs(k) < SHAPE_EPS:
        return -math.expm1(-z)
    if k < 0 and z >= -1.0 / k:
        return 1.0
    return -math.expm1(-math.log1p(k * z) / k)


def _tmps_cdf_scalar(m: TmpsModel, x: float) -> float:
    out = 1.0
    for c in m.components:
        out *= _gpd_cdf_scalar(c.gpd, x) * (1 - c.p0) + c.p0
    return out


def tmps_quantile(m: TmpsModel, prob: float) -> float:
    """Invert the mixture CDF by bracketing.

    The bracket starts at ``[max u_j, max u_j + 1]``; the upper end is pushed
    out by doubling its distance from the lower end until ``H >= prob``. The
    bracket is then shrunk with the Illinois variant of regula falsi, falling
    back to bisection whenever the secant step fails to halve the bracket.
    """
    if not prob < 1:
        raise ValueError("TMPS quantile needs prob < 1")
    if not prob > m.floor:
        raise ValueError(
            f"prob {prob} is not above the TMPS floor {m.floor}; quantile is not unique"
        )
    lo = max(c.gpd.threshold for c in m.components)
    f_lo = _tmps_cdf_scalar(m, lo) - prob
    if f_lo >= 0:
        # H jumps above prob at the largest threshold
        return lo
    step = 1.0
    hi = lo + step
    f_hi = _tmps_cdf_scalar(m, hi) - prob
    doublings = 0
    while f_hi < 0:
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise RuntimeError("could not bracket TMPS quantile")
        lo, f_lo = hi, f_hi
        step *= 2
        hi = lo + step
        f_hi = _tmps_cdf_scalar(m, hi) - prob

    side = 0
    while hi - lo > REL_WIDTH * max(1.0, abs(lo), abs(hi)):
        width = hi - lo
        x = hi - f_hi * width / (f_hi - f_lo) if f_hi != f_lo else 0.5 * (lo + hi)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = _tmps_cdf_scalar(m, x) - prob
        if fx < 0:
            lo, f_lo = x, fx
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = x, fx
            if side == 1:
                f_lo *= 0.5
            side = 1
        if hi - lo > 0.5 * width:
            mid = 0.5 * (lo + hi)
            fm = _tmps_cdf_scalar(m, mid) - prob
            if fm < 0:
                lo, f_lo = mid, fm
            else:
                hi, f_hi = mid, fm
            side = 0
    return 0.5 * (lo + hi)


def fit_tmps(samples: Sequence, thresholds: Sequence[float], p0s: Sequence[float]) -> TmpsModel:
    """Fit one GPD per flood type to threshold exceedance magnitudes.

    ``samples[j]`` holds magnitudes above ``thresholds[j]``; p0 values are
    taken as given.
    """
    if not len(samples) == len(thresholds) == len(p0s):
        raise ValueError("samples, thresholds and p0s must have equal length")
    comps = []
    for j, (mags, u, p0) in enumerate(zip(samples, thresholds, p0s)):
        mags = np.asarray(mags, dtype=float)
        if mags.size == 0:
            raise ValueError(f"flood type {j}: empty sample")
        try:
            gpd = fit_gpd_known_threshold(sample_lmoments(u + mags, 2), u)
        except ValueError as exc:
            raise FitError(f"flood type {j}: {exc}") from exc
        comps.append(TmpsComponent(gpd, p0))
    return TmpsModel(tuple(comps))


def fit_ams(annual_maxima) -> AmsModel:
    y = np.asarray(annual_maxima, dtype=float)
    if y.size < 3:
        raise ValueError(f"AMS fit needs at least 3 annual maxima, got {y.size}")
    lm = sample_lmoments(y, 3)
    if not lm.l2 > 0:
        raise FitError("constant annual maximum series")
    return AmsModel(fit_gev_lmom(lm))


def fit_pot(pooled_peaks, threshold: float, years: int) -> PotModel:
    peaks = np.asarray(pooled_peaks, dtype=float)
    if peaks.size == 0:
        raise ValueError("POT fit needs a non-empty peak pool")
    if years < 1:
        raise ValueError("years must be >= 1")
    if np.any(peaks < threshold):
        raise ValueError("all pooled peaks must be at or above the threshold")
    gpd = fit_gpd_known_threshold(sample_lmoments(peaks, 2), threshold)
    return PotModel(gpd, peaks.size / years)


def pot_quantile(m: PotModel, prob: float) -> float:
    """``u + (b/k)((-ln p / rate)^(-k) - 1)``, the annual Poisson-Pareto quantile."""
    k, b, u = m.gpd.shape, m.gpd.scale, m.gpd.threshold
    t = -math.log(prob) / m.rate
    if abs(k) < SHAPE_EPS:
        return u - b * math.log(t)
    return u + b * math.expm1(-k * math.log(t)) / k


def model_quantile(model: Model, T: float) -> float:
    if not T > 1:
        raise ValueError(f"return period must exceed 1 year, got {T}")
    p = 1 - 1 / T
    if isinstance(model, AmsModel):
        return float(gev_quantile(model.gev, p))
    if isinstance(model, TmpsModel):
        return tmps_quantile(model, p)
    if isinstance(model, PotModel):
        return pot_quantile(model, p)
    raise TypeError(f"unknown model type {type(model).__name__}")


def pot_as_gev(m: PotModel) -> AmsModel:
    return AmsModel(poisson_pareto_to_gev(m.rate, m.gpd))
