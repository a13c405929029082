import math

import numpy as np
import pytest

from domecast.bayes import McmcConfig, PosteriorChain
from domecast.forecast import (
    plugin_median_shift,
    plugin_remaining_quantile,
    predictive_curve,
    predictive_exceedance,
    predictive_quartiles,
)
from domecast.pareto import GPaParams, condition_on_age, quantile, survival

AGG = GPaParams(0.6487, 0.7018)
SHV_AGE = 7189 / 365.25
SINABUNG_AGE = 546 / 365.25


def _chain(draws, names=("alpha", "beta"), kind="aggregate"):
    draws = np.asarray(draws, dtype=float)
    return PosteriorChain(
        draws=draws,
        param_names=tuple(names),
        acceptance_rate=0.3,
        config=McmcConfig(seed=0, burn_in=0, iterations=draws.shape[0], thin=1),
        model_kind=kind,
    )


def test_plugin_quantiles_long_running():
    got = [plugin_remaining_quantile(AGG, SHV_AGE, q) for q in (0.25, 0.50, 0.75)]
    want = [11.36, 38.91, 152.18]
    for g, w in zip(got, want):
        assert g == pytest.approx(w, rel=0.005)


def test_plugin_quantiles_young():
    got = [plugin_remaining_quantile(AGG, SINABUNG_AGE, q) for q in (0.25, 0.50, 0.75)]
    want = [1.23, 4.20, 16.42]
    for g, w in zip(got, want):
        assert g == pytest.approx(w, rel=0.01)


def test_plugin_quantile_edges():
    assert plugin_remaining_quantile(AGG, 3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        plugin_remaining_quantile(AGG, 3.0, 1.0)


def test_plugin_matches_conditioned_quantile():
    for s in (0.0, 1.49, 19.68, 100.0):
        for q in (0.1, 0.5, 0.9):
            assert plugin_remaining_quantile(AGG, s, q) == pytest.approx(
                float(quantile(condition_on_age(AGG, s), q)), rel=1e-14
            )


def test_plugin_median_shift():
    assert plugin_median_shift(GPaParams(1, 1), 0.0) == pytest.approx(1.0)
    assert plugin_median_shift(AGG, 19.68) == pytest.approx(38.9, abs=0.15)
    assert plugin_median_shift(AGG, 5.0) == pytest.approx(
        plugin_remaining_quantile(AGG, 5.0, 0.5), rel=1e-14
    )
    # affine in s with slope 2^(1/alpha) - 1
    slope = 2 ** (1 / AGG.alpha) - 1
    d = plugin_median_shift(AGG, 7.0) - plugin_median_shift(AGG, 3.0)
    assert d == pytest.approx(4.0 * slope, rel=1e-12)


def test_age_monotonicity():
    vals = [plugin_remaining_quantile(AGG, s, 0.5) for s in np.linspace(0, 50, 20)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_predictive_exceedance_degenerate_chain():
    chain = _chain([[0.65, 0.70]] * 150)
    out = predictive_exceedance(chain, 2.0, None, 5.0)
    plug = float(survival(condition_on_age(GPaParams(0.65, 0.70), 2.0), 5.0))
    assert out["mean"] == pytest.approx(plug, rel=1e-12)
    assert out["low"] == pytest.approx(plug, rel=1e-12)
    assert out["high"] == pytest.approx(plug, rel=1e-12)


def test_predictive_exceedance_t_zero():
    rng = np.random.default_rng(0)
    chain = _chain(np.column_stack([rng.uniform(0.4, 1, 100), rng.uniform(0.4, 1, 100)]))
    out = predictive_exceedance(chain, 1.0, None, 0.0)
    assert out == {"mean": 1.0, "low": 1.0, "high": 1.0}


def test_predictive_exceedance_regression_needs_silica():
    chain = _chain(
        [[0.65, 0.70, 0.04, 0.13]] * 120,
        names=("alpha", "beta", "gamma_alpha", "gamma_beta"),
        kind="regression",
    )
    with pytest.raises(ValueError, match="silica"):
        predictive_exceedance(chain, 1.0, None, 5.0)
    out = predictive_exceedance(chain, 1.0, 58.0, 5.0)
    adj = GPaParams(0.65 * math.exp(0.04 * -2), 0.70 * math.exp(0.13 * -2))
    assert out["mean"] == pytest.approx(
        float(survival(condition_on_age(adj, 1.0), 5.0)), rel=1e-12
    )


def test_predictive_curve_properties():
    rng = np.random.default_rng(4)
    draws = np.column_stack([rng.uniform(0.4, 1.0, 300), rng.uniform(0.3, 1.2, 300)])
    chain = _chain(draws)
    t_grid = np.linspace(0, 50, 26)
    curve = predictive_curve(chain, 3.0, None, t_grid)
    assert np.all(np.diff(curve.mean_probability) <= 0)
    assert np.all(np.diff(curve.plug_in_probability) <= 0)
    assert np.all(curve.band_low <= curve.mean_probability + 1e-12)
    assert np.all(curve.mean_probability <= curve.band_high + 1e-12)
    assert np.all((curve.mean_probability >= 0) & (curve.mean_probability <= 1))
    assert curve.draw_curves.shape == (100, 26)
    assert curve.band_level == 0.90


def test_predictive_curve_degenerate_equals_plugin():
    chain = _chain([[0.7, 0.9]] * 150)
    curve = predictive_curve(chain, 1.0, None, np.linspace(0, 20, 11))
    np.testing.assert_allclose(
        curve.mean_probability, curve.plug_in_probability, rtol=1e-12
    )


def test_predictive_curve_t_zero_only():
    chain = _chain([[0.7, 0.9]] * 150)
    curve = predictive_curve(chain, 1.0, None, [0.0])
    assert curve.mean_probability[0] == 1.0


def test_predictive_curve_unsorted_grid():
    chain = _chain([[0.7, 0.9]] * 150)
    with pytest.raises(ValueError, match="sorted"):
        predictive_curve(chain, 1.0, None, [3.0, 1.0])


def test_predictive_quartiles_degenerate():
    chain = _chain([[AGG.alpha, AGG.beta]] * 150)
    q25, q50, q75 = predictive_quartiles(chain, SHV_AGE)
    assert q25 == pytest.approx(plugin_remaining_quantile(AGG, SHV_AGE, 0.25), rel=1e-5)
    assert q50 == pytest.approx(plugin_remaining_quantile(AGG, SHV_AGE, 0.50), rel=1e-5)
    assert q75 == pytest.approx(plugin_remaining_quantile(AGG, SHV_AGE, 0.75), rel=1e-5)


def test_quartile_exceedance_inversion():
    rng = np.random.default_rng(9)
    draws = np.column_stack([rng.uniform(0.5, 0.9, 400), rng.uniform(0.4, 1.1, 400)])
    chain = _chain(draws)
    q25, q50, q75 = predictive_quartiles(chain, 2.0)
    assert predictive_exceedance(chain, 2.0, None, q50)["mean"] == pytest.approx(
        0.5, abs=1e-5
    )
    assert predictive_exceedance(chain, 2.0, None, q25)["mean"] == pytest.approx(
        0.75, abs=1e-5
    )


def test_quartiles_vs_monte_carlo_mixture():
    # two-component parameter mixture; oracle is brute-force sampling of the
    # predictive distribution
    comp = [(0.6, 0.8), (0.9, 1.5)]
    s = 2.0
    chain = _chain(comp * 200)
    rng = np.random.default_rng(123)
    n = 10_000_000
    pick = rng.integers(0, 2, n)
    alpha = np.where(pick == 0, comp[0][0], comp[1][0])
    beta = np.where(pick == 0, comp[0][1], comp[1][1])
    u = rng.random(n)
    t = (beta + s) * np.expm1(-np.log(u) / alpha)
    mc = np.quantile(t, [0.25, 0.50, 0.75])
    got = predictive_quartiles(chain, s)
    for g, w in zip(got, mc):
        assert g == pytest.approx(w, rel=0.005)


def test_per_draw_quartiles_flag():
    comp = [(0.6, 0.8), (0.9, 1.5)]
    chain = _chain(comp * 100)
    mean_curve = predictive_quartiles(chain, 1.0)
    per_draw = predictive_quartiles(chain, 1.0, per_draw=True)
    expected = tuple(
        float(
            np.mean(
                [(b + 1.0) * (math.pow(1 - q, -1 / a) - 1) for a, b in comp]
            )
        )
        for q in (0.25, 0.50, 0.75)
    )
    for g, w in zip(per_draw, expected):
        assert g == pytest.approx(w, rel=1e-12)
    assert per_draw != mean_curve
