import numpy as np
import pytest
from scipy import integrate, stats

from src.margins.empirical import EmpiricalMargin
from src.margins.skew_t import SkewTParams, fit_margin_mle
from src.margins.transform import (
    EMPIRICAL,
    PARAMETRIC,
    fit_margins,
    margin_from_dict,
    normalize_mode,
    pit,
    pseudo_observations,
    quantile,
    to_data_scale,
)
from src.utils.errors import MarginError


# --- Margen empírico ---

def test_empirical_pit_ranks():
    np.testing.assert_allclose(pit(np.array([3.0, 1.0, 2.0]), EmpiricalMargin(np.array([3.0, 1.0, 2.0]))), [0.75, 0.25, 0.5])


def test_empirical_ties_share_value():
    x = np.array([1.0, 2.0, 2.0, 3.0])
    u = EmpiricalMargin(x).cdf(x)
    assert u[1] == u[2] == pytest.approx(3 / 5)


def test_empirical_quantile_interpolates():
    assert EmpiricalMargin(np.array([1.0, 2.0, 3.0])).ppf(0.5) == pytest.approx(2.0)


def test_unit_weights_match_plain_ecdf():
    x = np.random.default_rng(1).normal(size=50)
    np.testing.assert_array_equal(EmpiricalMargin(x, np.ones(50)).cdf(x), EmpiricalMargin(x).cdf(x))


def test_weighted_quantile_ignores_weights():
    x = np.random.default_rng(2).normal(size=30)
    u = np.linspace(0.05, 0.95, 7)
    weighted = EmpiricalMargin(x, np.random.default_rng(3).uniform(0.5, 1.5, size=30))
    np.testing.assert_array_equal(weighted.ppf(u), EmpiricalMargin(x).ppf(u))


def test_weighted_ecdf_is_monotone_with_negative_weights():
    x = np.arange(10.0)
    w = np.array([1.0, -2.0, 1.5, 0.5, -1.0, 2.0, 1.0, 1.0, -0.5, 1.5])
    values = EmpiricalMargin(x, w).cdf(x)
    assert np.all(np.diff(values) >= 0)


def test_empirical_rejects_bad_weights():
    with pytest.raises(MarginError):
        EmpiricalMargin(np.arange(5.0), np.ones(4))


# --- Skew-t ---

def test_symmetric_skew_t_median():
    assert quantile(SkewTParams(0.0, 1.0, 1e4, 1.0), 0.5) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.7, 1.0, 1.4])
def test_skew_t_quantile_round_trip(gamma):
    margin = SkewTParams(0.1, 2.0, 5.0, gamma)
    u = np.linspace(0.01, 0.99, 25)
    np.testing.assert_allclose(margin.cdf(margin.ppf(u)), u, atol=1e-8)


def test_skew_t_density_integrates_to_one():
    margin = SkewTParams(0.5, 1.5, 6.0, 1.3)
    density = lambda x: float(np.exp(margin.logpdf(x)))
    total = integrate.quad(density, -np.inf, margin.mu)[0] + integrate.quad(density, margin.mu, np.inf)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


def test_skew_t_rejects_invalid_parameters():
    with pytest.raises(MarginError):
        SkewTParams(0.0, -1.0, 5.0)


def test_fit_standard_normal():
    """
    La escala se estima con precisión. μ y γ se compensan entre sí (un γ algo mayor que 1
    desplaza μ hacia la izquierda), por eso sus bandas son más anchas en una sola muestra.
    """
    x = np.random.default_rng(21).normal(size=5000)
    margin = fit_margin_mle(x)
    assert 0.95 <= margin.sigma <= 1.05
    assert -0.15 <= margin.mu <= 0.15
    assert 0.85 <= margin.gamma <= 1.15
    assert margin.nu > 20


@pytest.mark.slow
def test_fit_standard_normal_frequency():
    """Sobre 100 muestras normales, al menos 80 caen en las bandas estrechas de μ, σ y γ."""
    hits = 0
    for seed in range(100):
        m = fit_margin_mle(np.random.default_rng(seed).normal(size=5000))
        hits += (abs(m.mu) <= 0.05) and (0.95 <= m.sigma <= 1.05) and (0.95 <= m.gamma <= 1.05)
    assert hits >= 80


def test_fit_student_t_tail():
    x = np.random.default_rng(22).standard_t(5, size=5000)
    assert 3.5 <= fit_margin_mle(x).nu <= 8.0


@pytest.mark.parametrize("series", [np.full(100, 2.0), np.arange(10.0)])
def test_fit_rejects_degenerate(series):
    with pytest.raises(MarginError):
        fit_margin_mle(series)


def test_parametric_pit_is_uniform():
    margin = SkewTParams(0.0, 1.0, 5.0, 1.2)
    x = margin.ppf(np.random.default_rng(3).uniform(size=2000))
    assert stats.kstest(pit(x, margin), "uniform").pvalue > 0.01


# --- Transformaciones ---

@pytest.mark.parametrize("alias, expected", [("par", PARAMETRIC), ("semipar", EMPIRICAL), ("empirical", EMPIRICAL)])
def test_normalize_mode(alias, expected):
    assert normalize_mode(alias) == expected


def test_normalize_mode_unknown():
    with pytest.raises(ValueError):
        normalize_mode("bayes")


def test_pseudo_observations_in_unit_interval(var_data):
    margins = fit_margins(var_data, "semipar")
    u = pseudo_observations(var_data, margins)
    assert u.shape == var_data.shape
    assert np.all((u > 0) & (u < 1))


def test_to_data_scale_cycles_columns():
    margins = [SkewTParams(0.0, 1.0, 5.0), SkewTParams(10.0, 1.0, 5.0)]
    x = to_data_scale(np.full((3, 4), 0.5), margins)
    assert x[0, 2] == pytest.approx(x[0, 0])
    assert x[0, 3] == pytest.approx(10.0, abs=1e-8)


@pytest.mark.parametrize("margin", [SkewTParams(0.2, 1.1, 7.0, 0.9), EmpiricalMargin(np.array([0.3, -1.0, 2.0]))])
def test_margin_dict_round_trip(margin):
    restored = margin_from_dict(margin.to_dict())
    u = np.array([0.2, 0.5, 0.8])
    np.testing.assert_allclose(restored.ppf(u), margin.ppf(u))


def test_margin_from_dict_unknown():
    with pytest.raises(MarginError):
        margin_from_dict({"type": "kernel"})
