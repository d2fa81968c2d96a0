import numpy as np
from scipy.stats import kendalltau


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generador Philox cuyo flujo depende sólo de (seed, *stream), no del orden de ejecución."""
    entropy = [int(seed)] + [int(s) for s in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def newey_west_se(values: np.ndarray, lags: int) -> float:
    """Error estándar de la media con pesos de Bartlett (Newey-West)."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        return float("nan")
    e = x - x.mean()
    lags = min(int(lags), n - 1)
    var = e @ e / n
    for lag in range(1, lags + 1):
        weight = 1.0 - lag / (lags + 1.0)
        var += 2.0 * weight * (e[lag:] @ e[:-lag]) / n
    return float(np.sqrt(max(var, 0.0) / n))


def tau_matrix(x: np.ndarray, lag: int = 0) -> np.ndarray:
    """τ de Kendall entre X_{t,i} y X_{t+lag,j}."""
    x = np.asarray(x, dtype=float)
    T, d = x.shape
    left, right = x[: T - lag], x[lag:]
    out = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            out[i, j] = kendalltau(left[:, i], right[:, j]).statistic
    return out
