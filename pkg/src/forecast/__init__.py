from src.forecast.backtest import BacktestConfig, BacktestResult, backtest, generate_portfolio_weights
from src.forecast.scoring import (
    MEASURES,
    Functional,
    check_loss,
    contract_portfolio,
    crps_sample,
    log_score,
    predict_functional,
    score_forecasts,
)
from src.forecast.simulation import (
    ForecastRequest,
    ForecastResult,
    SamplingPlan,
    forecast,
    simulate_conditional,
    simulate_unconditional,
)
