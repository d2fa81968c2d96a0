from pathlib import Path
from pydantic_settings import BaseSettings

class Settings(BaseSettings):
    # Paths
    # Define la raíz del proyecto basándose en la ubicación de este archivo (src/config.py)
    PROJECT_ROOT: Path = Path(__file__).resolve().parent.parent
    DATA_DIR: Path = PROJECT_ROOT / "data"
    RAW_DIR: Path = DATA_DIR / "raw"
    PROCESSED_DIR: Path = DATA_DIR / "processed"   # modelos ajustados (JSON)
    OUTPUTS_DIR: Path = DATA_DIR / "outputs"       # simulaciones, pronósticos, backtests

    # Logging
    LOG_LEVEL: str = "INFO"

    # Numérica de cópulas
    CLAMP_EPS: float = 1e-10
    HINV_XATOL: float = 1e-14
    FD_REL_STEP: float = 1e-4
    MIN_PAIR_OBS: int = 10
    STUDENT_T_NU_GRID: tuple[float, ...] = (2.5, 3.0, 4.0, 6.0, 10.0, 20.0, 30.0)
    COPULA_PARAM_BOUNDS: dict[str, tuple[tuple[float, float], ...]] = {
        "gaussian": ((-0.999, 0.999),),
        "student_t": ((-0.999, 0.999), (2.01, 50.0)),
        "clayton": ((1e-4, 28.0),),
        "gumbel": ((1.0, 28.0),),
        "frank": ((-50.0, 50.0),),
    }
    DEFAULT_FAMILIES: tuple[str, ...] = ("independence", "gaussian", "student_t", "clayton", "gumbel", "frank")

    # Estructuras
    MAX_ENUM_DIM: int = 10

    # Ejecución
    N_JOBS: int = 1               # hilos para ajuste por clase y réplicas bootstrap
    DEFAULT_SEED: int = 20240611
    SIMS_PER_OBS: int = 10        # N por defecto = 10 * T
    SIM_BLOCK_SIZE: int = 1024    # réplicas por bloque; cada bloque tiene su propio flujo aleatorio

    # Backtest
    TRADING_DAYS_PER_YEAR: int = 252
    BACKTEST_WINDOW: int = 3 * 252
    BACKTEST_STRIDE: int = 126
    WEEK_STEPS: int = 5
    HAC_LAGS: int = 30
    N_PORTFOLIOS: int = 100
    PORTFOLIO_WEIGHT_RANGE: tuple[float, float] = (-0.15, 0.25)

    class Config:
        env_file = ".env"

settings = Settings()
