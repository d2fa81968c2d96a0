import sys

import numpy as np
import pytest

from conftest import simulate_var1
from src.forecast.backtest import BacktestConfig, backtest, generate_portfolio_weights, realized_portfolio
from src.utils.errors import NumericalError
from src.utils.utils_stats import make_rng

pytestmark = pytest.mark.integration


def small_config(**overrides) -> BacktestConfig:
    values = dict(
        window=100,
        stride=30,
        n_sims=100,
        n_portfolios=3,
        families=("gaussian",),
        mode="semipar",
        seed=1,
        hac_lags=5,
    )
    values.update(overrides)
    return BacktestConfig(**values)


@pytest.fixture
def returns():
    return simulate_var1(160, 2, phi=0.3, corr=0.6, seed=11)


# --- Portafolios ---

def test_portfolio_weights_sum_to_one():
    w = generate_portfolio_weights(50, 4, -0.15, 0.25, make_rng(0, 0))
    np.testing.assert_allclose(w.sum(axis=1), 1.0)
    assert np.all((w[:, :3] >= -0.15) & (w[:, :3] <= 0.25))


def test_realized_portfolio_accumulates_steps():
    data = np.arange(12.0).reshape(6, 2)
    weights = np.array([[1.0, 0.0], [0.5, 0.5]])
    np.testing.assert_allclose(realized_portfolio(data, 2, 2, weights), [4.0 + 6.0, 0.5 * (4 + 5 + 6 + 7)])


# --- Backtest ---

def test_backtest_daily_table(returns):
    """
    T=160 con ventana de 100 y reajuste cada 30 filas:
    1. Se evalúan las filas 100..159.
    2. La tabla tiene una fila por (modelo, medida).
    3. Los errores estándar son finitos.
    """
    result = backtest(returns, small_config())
    table = result.table
    assert list(table.columns) == ["model", "measure", "mean", "se", "n"]
    assert len(table) == 8
    assert set(table["model"]) == {"svine", "independence"}
    assert (table["n"] == 60).all()
    assert np.isfinite(table["se"]).all()


def test_backtest_weekly_horizon(returns):
    result = backtest(returns, small_config(horizon="week", measures=("crps",)))
    assert (result.table["n"] == 56).all()


def test_backtest_is_reproducible(returns):
    config = small_config(measures=("crps", "var95"), baseline=False)
    first, second = backtest(returns, config), backtest(returns, config)
    assert first.table.equals(second.table)


def test_backtest_keeps_previous_model_when_refit_fails(returns, mocker):
    module = sys.modules["src.forecast.backtest"]
    original = module._fit_window
    calls = {"n": 0}

    def flaky(train, config):
        calls["n"] += 1
        if calls["n"] == 2:
            raise NumericalError("reajuste sin convergencia")
        return original(train, config)

    mocker.patch.object(module, "_fit_window", side_effect=flaky)
    result = backtest(returns, small_config(measures=("crps",)))
    assert calls["n"] == 2
    assert (result.table["n"] == 60).all()


def test_backtest_rejects_exhausted_window(returns):
    with pytest.raises(ValueError):
        backtest(returns, small_config(window=160))


def test_config_rejects_zero_portfolios():
    with pytest.raises(ValueError):
        small_config(n_portfolios=0)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="bogus"):
        BacktestConfig.from_dict({"window": 50, "bogus": 1})


def test_config_from_dict_requires_object():
    with pytest.raises(ValueError):
        BacktestConfig.from_dict([50, 10])


def test_config_from_dict_overrides():
    config = BacktestConfig.from_dict({"window": 50, "measures": ["crps"]}, window=80, stride=None)
    assert config.window == 80
    assert config.measures == ("crps",)


@pytest.mark.slow
def test_svine_beats_independence_on_dependent_data():
    """Con dependencia serial y transversal marcada el S-vine debe puntuar mejor en CRPS."""
    data = simulate_var1(700, 2, phi=0.6, corr=0.7, seed=3)
    config = small_config(window=400, stride=100, n_sims=500, n_portfolios=10, measures=("crps",))
    table = backtest(data, config).table.set_index("model")
    assert table.loc["svine", "mean"] < table.loc["independence", "mean"]
