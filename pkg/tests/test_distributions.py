import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from floodmix.distributions import (
    EULER_GAMMA,
    SHAPE_EPS,
    GevParams,
    GpdParams,
    gev_cdf,
    gev_population_lmoments,
    gev_quantile,
    gev_sample,
    gpd_cdf,
    gpd_population_lmoments,
    gpd_quantile,
    gpd_sample,
    poisson_pareto_to_gev,
)

SHAPES = [-0.2, 0.0, 0.2, 0.6]
BASE = GpdParams(0.2, 5.0, 10.0)


def test_params_reject_nonpositive_scale():
    with pytest.raises(ValueError):
        GpdParams(0.2, 0.0, 10.0)
    with pytest.raises(ValueError):
        GevParams(0.2, -1.0, 10.0)


@pytest.mark.parametrize(
    "p, x, expected",
    [
        (BASE, 10.0, 0.0),
        (BASE, 9.0, 0.0),
        (BASE, 10 + 25 * (0.01**-0.2 - 1), 0.99),
        (GpdParams(0.0, 5.0, 10.0), 15.0, 1 - math.exp(-1)),
        (GpdParams(-0.5, 5.0, 10.0), 21.0, 1.0),
        (GpdParams(-0.5, 5.0, 10.0), 20.0, 1.0),
    ],
)
def test_gpd_cdf_examples(p, x, expected):
    assert gpd_cdf(p, x) == pytest.approx(expected, abs=1e-12)


def test_gpd_cdf_against_scipy():
    x = np.linspace(10, 200, 50)
    for k in SHAPES:
        p = GpdParams(k, 5.0, 10.0)
        ref = stats.genpareto(c=k, loc=10.0, scale=5.0).cdf(x)
        np.testing.assert_allclose(gpd_cdf(p, x), ref, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize(
    "p, prob, expected",
    [
        (BASE, 0.0, 10.0),
        (BASE, 0.99, 10 + 25 * (100**0.2 - 1)),
        # 10 + (20 / 0.6) * (2**0.6 - 1)
        (GpdParams(0.6, 20.0, 10.0), 0.5, 27.190552217013266),
        (GpdParams(0.0, 1.0, 0.0), 1 - math.exp(-3), 3.0),
    ],
)
def test_gpd_quantile_examples(p, prob, expected):
    q = gpd_quantile(p, prob)
    assert q == pytest.approx(expected, rel=1e-12)
    assert gpd_cdf(p, q) == pytest.approx(prob, abs=1e-10)


@pytest.mark.parametrize("prob", [-0.1, 1.0, 1.5, float("nan")])
def test_gpd_quantile_rejects_bad_prob(prob):
    with pytest.raises(ValueError):
        gpd_quantile(BASE, prob)


@pytest.mark.parametrize(
    "p, x, expected",
    [
        (GevParams(0.0, 1.0, 0.0), 0.0, math.exp(-1)),
        (GevParams(0.2, 5.0, 10.0), 10.0, math.exp(-1)),
        (GevParams(-0.2, 5.0, 10.0), 10.0, math.exp(-1)),
        (GevParams(0.2, 5.0, 10.0), -100.0, 0.0),
        (GevParams(-0.2, 5.0, 10.0), 100.0, 1.0),
    ],
)
def test_gev_cdf_examples(p, x, expected):
    assert gev_cdf(p, x) == pytest.approx(expected, abs=1e-14)


def test_gev_cdf_against_scipy():
    x = np.linspace(-5, 60, 80)
    for xi in SHAPES:
        p = GevParams(xi, 5.0, 10.0)
        ref = stats.genextreme(c=-xi, loc=10.0, scale=5.0).cdf(x)
        np.testing.assert_allclose(gev_cdf(p, x), ref, rtol=1e-10, atol=1e-14)


def test_gev_quantile_examples():
    gumbel = GevParams(0.0, 1.0, 0.0)
    assert gev_quantile(gumbel, 0.99) == pytest.approx(-math.log(-math.log(0.99)), rel=1e-14)
    assert gev_quantile(gumbel, 0.99) == pytest.approx(4.60015, abs=1e-5)
    assert gev_quantile(gumbel, math.exp(-1)) == pytest.approx(0.0, abs=1e-14)
    p = GevParams(0.2, 5.0, 10.0)
    assert gev_cdf(p, gev_quantile(p, 0.99)) == pytest.approx(0.99, abs=1e-12)


@pytest.mark.parametrize("prob", [0.0, 1.0, -0.5])
def test_gev_quantile_rejects_bad_prob(prob):
    with pytest.raises(ValueError):
        gev_quantile(GevParams(0.1, 1.0, 0.0), prob)


@pytest.mark.parametrize("shape", SHAPES)
def test_quantile_cdf_roundtrip_grid(shape):
    probs = np.linspace(0.001, 0.999, 201)
    gev = GevParams(shape, 5.0, 10.0)
    np.testing.assert_allclose(gev_cdf(gev, gev_quantile(gev, probs)), probs, atol=1e-10)
    gpd = GpdParams(shape, 5.0, 10.0)
    np.testing.assert_allclose(gpd_cdf(gpd, gpd_quantile(gpd, probs)), probs, atol=1e-10)


@settings(max_examples=300, deadline=None)
@given(
    shape=st.sampled_from(SHAPES),
    scale=st.floats(0.1, 50),
    loc=st.floats(-50, 50),
    prob=st.floats(0.001, 0.999),
)
def test_x_roundtrip_relative(shape, scale, loc, prob):
    gpd = GpdParams(shape, scale, loc)
    x = gpd_quantile(gpd, prob)
    assert gpd_quantile(gpd, gpd_cdf(gpd, x)) == pytest.approx(x, rel=1e-8, abs=1e-8 * scale)
    gev = GevParams(shape, scale, loc)
    y = gev_quantile(gev, prob)
    assert gev_quantile(gev, gev_cdf(gev, y)) == pytest.approx(y, rel=1e-8, abs=1e-8 * scale)


@settings(max_examples=200, deadline=None)
@given(
    shape=st.floats(-0.4, 0.8),
    scale=st.floats(0.5, 30),
    lift=st.floats(0.01, 0.9),
    frac=st.floats(0.0, 1.0),
)
def test_threshold_stability(shape, scale, lift, frac):
    p = GpdParams(shape, scale, 10.0)
    # new threshold at the `lift` quantile keeps u' inside the support
    u2 = gpd_quantile(p, lift)
    cond = GpdParams(shape, scale + shape * (u2 - p.threshold), u2)
    x = gpd_quantile(cond, frac * 0.999)
    lhs = (gpd_cdf(p, x) - gpd_cdf(p, u2)) / (1 - gpd_cdf(p, u2))
    # inside the limit branch the O(shape) scale lift is beyond its accuracy
    tol = 1e-12 if abs(shape) >= SHAPE_EPS else 1e-7
    assert lhs == pytest.approx(gpd_cdf(cond, x), abs=tol)


def test_poisson_pareto_unit_rate_is_identity():
    g = poisson_pareto_to_gev(1.0, BASE)
    assert (g.shape, g.scale, g.location) == pytest.approx((0.2, 5.0, 10.0), abs=1e-14)


def test_poisson_pareto_rate_five_closed_form():
    g = poisson_pareto_to_gev(5.0, BASE)
    assert g.shape == 0.2
    assert g.scale == pytest.approx(5 * 5**0.2, rel=1e-14)
    assert g.location == pytest.approx(10 - 5 * (1 - 5**0.2) / 0.2, rel=1e-14)


@pytest.mark.parametrize("rate", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("shape", SHAPES)
def test_poisson_pareto_cdf_identity(rate, shape):
    p = GpdParams(shape, 5.0, 10.0)
    g = poisson_pareto_to_gev(rate, p)
    upper = p.upper_bound if shape < 0 else 200.0
    xs = np.linspace(10.0 + 1e-6, upper - 1e-6, 20)
    direct = np.exp(-rate * (1 - gpd_cdf(p, xs)))
    np.testing.assert_allclose(gev_cdf(g, xs), direct, atol=1e-12, rtol=0)


def test_poisson_pareto_rejects_bad_rate():
    with pytest.raises(ValueError):
        poisson_pareto_to_gev(0.0, BASE)


def test_poisson_pareto_shape_limit():
    zero = poisson_pareto_to_gev(2.0, GpdParams(0.0, 5.0, 10.0))
    for k in (1e-12, -1e-12, 1e-9, -1e-9):
        g = poisson_pareto_to_gev(2.0, GpdParams(k, 5.0, 10.0))
        assert g.scale == pytest.approx(zero.scale, abs=1e-6)
        assert g.location == pytest.approx(zero.location, abs=1e-6)


@pytest.mark.parametrize("k", [1e-9, -1e-9])
def test_shape_limit_continuity(k):
    # exercise the general-shape formulas directly, below SHAPE_EPS they are bypassed
    x = np.linspace(10.5, 80, 30)
    z = (x - 10) / 5
    general_gpd = 1 - (1 + k * z) ** (-1 / k)
    np.testing.assert_allclose(general_gpd, gpd_cdf(GpdParams(0.0, 5, 10), x), atol=1e-6)
    general_gev = np.exp(-((1 + k * z) ** (-1 / k)))
    np.testing.assert_allclose(general_gev, gev_cdf(GevParams(0.0, 5, 10), x), atol=1e-6)
    probs = np.linspace(0.01, 0.99, 30)
    general_q = 10 + 5 / k * ((1 - probs) ** (-k) - 1)
    np.testing.assert_allclose(general_q, gpd_quantile(GpdParams(0.0, 5, 10), probs), atol=1e-6)
    # and the branch used just above SHAPE_EPS agrees with the limit branch
    for shape in (2e-8, -2e-8):
        np.testing.assert_allclose(gpd_cdf(GpdParams(shape, 5, 10), x), gpd_cdf(GpdParams(0.0, 5, 10), x), atol=1e-6)
        np.testing.assert_allclose(gev_cdf(GevParams(shape, 5, 10), x), gev_cdf(GevParams(0.0, 5, 10), x), atol=1e-6)


def test_samplers_empty_and_deterministic():
    assert gpd_sample(BASE, 0, np.random.default_rng(1)).size == 0
    assert gev_sample(GevParams(0, 1, 0), 0, np.random.default_rng(1)).size == 0
    a = gpd_sample(BASE, 5, np.random.default_rng(123))
    b = gpd_sample(BASE, 5, np.random.default_rng(123))
    np.testing.assert_array_equal(a, b)
    c = gev_sample(GevParams(0.1, 1, 0), 5, np.random.default_rng(9))
    d = gev_sample(GevParams(0.1, 1, 0), 5, np.random.default_rng(9))
    np.testing.assert_array_equal(c, d)


def test_gpd_sample_within_support():
    p = GpdParams(-0.3, 5.0, 10.0)
    x = gpd_sample(p, 10_000, np.random.default_rng(3))
    assert x.min() >= 10.0 and x.max() <= p.upper_bound


def test_gpd_sample_mean():
    x = gpd_sample(GpdParams(0.2, 5.0, 0.0), 1_000_000, np.random.default_rng(11))
    assert x.mean() == pytest.approx(5 / 0.8, rel=0.01)


def test_gev_sample_mean_is_euler_gamma():
    x = gev_sample(GevParams(0.0, 1.0, 0.0), 1_000_000, np.random.default_rng(12))
    assert x.mean() == pytest.approx(EULER_GAMMA, rel=0.01)


@pytest.mark.parametrize("shape", SHAPES)
def test_sampler_ks_distance(shape):
    rng = np.random.default_rng(2024)
    gpd = GpdParams(shape, 5.0, 10.0)
    assert stats.kstest(gpd_sample(gpd, 100_000, rng), lambda x: gpd_cdf(gpd, x)).statistic < 0.01
    gev = GevParams(shape, 5.0, 10.0)
    assert stats.kstest(gev_sample(gev, 100_000, rng), lambda x: gev_cdf(gev, x)).statistic < 0.01


def _integrated_lmoments(qf):
    opts = dict(epsabs=1e-10, epsrel=1e-12, limit=500)
    l1 = integrate.quad(qf, 0, 1, **opts)[0]
    l2 = integrate.quad(lambda F: qf(F) * (2 * F - 1), 0, 1, **opts)[0]
    l3 = integrate.quad(lambda F: qf(F) * (6 * F * F - 6 * F + 1), 0, 1, **opts)[0]
    return l1, l2, l3


@pytest.mark.parametrize(
    "p", [GpdParams(0.2, 5, 10), GpdParams(0.0, 1, 0), GpdParams(-0.3, 2, 1), GpdParams(0.4, 3, -2)]
)
def test_gpd_population_lmoments_by_integration(p):
    l1, l2 = gpd_population_lmoments(p)
    i1, i2, _ = _integrated_lmoments(lambda F: gpd_quantile(p, F))
    assert l1 == pytest.approx(i1, abs=1e-8)
    assert l2 == pytest.approx(i2, abs=1e-8)


def test_gpd_population_lmoments_examples():
    assert gpd_population_lmoments(BASE) == pytest.approx((16.25, 5 / (0.8 * 1.8)), rel=1e-14)
    assert gpd_population_lmoments(GpdParams(0.0, 1, 0)) == pytest.approx((1.0, 0.5), rel=1e-14)
    gpd_population_lmoments(GpdParams(0.99, 1, 0))
    with pytest.raises(ValueError):
        gpd_population_lmoments(GpdParams(1.0, 1, 0))


@pytest.mark.parametrize(
    "p", [GevParams(0.0, 1, 0), GevParams(0.2, 5, 10), GevParams(-0.3, 2, 1), GevParams(0.4, 3, -2)]
)
def test_gev_population_lmoments_by_integration(p):
    l1, l2, t3 = gev_population_lmoments(p)
    i1, i2, i3 = _integrated_lmoments(lambda F: gev_quantile(p, min(max(F, 1e-300), 1 - 1e-16)))
    assert l1 == pytest.approx(i1, abs=1e-8)
    assert l2 == pytest.approx(i2, abs=1e-8)
    assert t3 == pytest.approx(i3 / i2, abs=1e-8)


def test_gev_population_lmoments_gumbel():
    _, l2, t3 = gev_population_lmoments(GevParams(0.0, 1, 0))
    assert l2 == pytest.approx(math.log(2), rel=1e-14)
    assert t3 == pytest.approx(0.1699, abs=1e-4)
    near = gev_population_lmoments(GevParams(1e-6, 1, 0))
    assert near == pytest.approx(gev_population_lmoments(GevParams(0.0, 1, 0)), abs=1e-5)
    with pytest.raises(ValueError):
        gev_population_lmoments(GevParams(1.0, 1, 0))
