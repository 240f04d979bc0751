"""Flood-type mixture (TMPS) versus AMS and POT flood frequency models."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    GevParams,
    GpdParams,
    gev_cdf,
    gev_quantile,
    gev_sample,
    gpd_cdf,
    gpd_quantile,
    gpd_sample,
    poisson_pareto_to_gev,
)
from .lmoments import FitError, LmomentSet, fit_gev_lmom, fit_gpd_known_threshold, sample_lmoments  # noqa: E402
from .models import AmsModel, PotModel, TmpsModel, model_quantile, tmps_cdf, tmps_quantile  # noqa: E402
