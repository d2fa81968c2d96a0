"""
Estudios de Monte-Carlo a escala completa. Se ejecutan con `pytest -m slow`.
"""
import numpy as np
import pytest
from scipy.stats import norm

from conftest import gaussian_model, mvine_spec
from src.bootstrap.newton import bootstrap_params
from src.copulas.fitting import pair_fit_count
from src.estimation.model import PseudoSample
from src.estimation.sequential import fit_sequential
from src.forecast.simulation import simulate_unconditional
from src.margins.transform import fit_margins, normalize_mode
from src.utils.utils_stats import tau_matrix

pytestmark = [pytest.mark.integration, pytest.mark.slow]

RHO = 0.4


@pytest.fixture(scope="module")
def true_model():
    return gaussian_model(mvine_spec(2, 1), RHO)


def _fit(x: np.ndarray, mode: str):
    mode = normalize_mode(mode)
    sample = PseudoSample.from_data(x, fit_margins(x, mode), mode)
    return fit_sequential(sample, mvine_spec(2, 1), family_menu=["gaussian"]), sample


def _normal_scale(model, T: int, seed: int) -> np.ndarray:
    return norm.ppf(simulate_unconditional(model, T, seed=seed))


@pytest.mark.parametrize("mode", ["par", "semipar"])
def test_estimation_error_shrinks_with_sample_size(true_model, mode):
    errors = {}
    for T in (500, 2000):
        per_rep = []
        for rep in range(50):
            x = _normal_scale(true_model, T, seed=1000 * T + rep)
            fitted, _ = _fit(x, mode)
            per_rep.append(np.abs(fitted.parameter_vector()[-fitted.n_copula_params :] - RHO))
        errors[T] = np.median(np.array(per_rep), axis=0)
    assert np.all(errors[2000] <= 0.65 * errors[500])


def test_resimulated_dependence_matches_generating_model(true_model):
    x = simulate_unconditional(true_model, 5000, seed=1)
    fitted, _ = _fit(x, "semipar")
    y = simulate_unconditional(fitted, 5000, seed=2)
    for lag in (0, 1):
        np.testing.assert_allclose(tau_matrix(y, lag), tau_matrix(x, lag), atol=0.05)


def test_bootstrap_interval_coverage(true_model):
    """Intervalos del 90% con un paso de Newton: cobertura entre 82% y 98%, sin reajustes de cópulas."""
    covered = []
    for rep in range(100):
        x = simulate_unconditional(true_model, 2000, seed=5000 + rep)
        fitted, sample = _fit(x, "semipar")
        before = pair_fit_count()
        replicates = bootstrap_params(fitted, sample, R=500, block_length=12, seed=rep)
        assert pair_fit_count() == before
        params = np.array([r.params for r in replicates])
        lo, hi = np.quantile(params, 0.05, axis=0), np.quantile(params, 0.95, axis=0)
        covered.append((lo <= RHO) & (RHO <= hi))
    coverage = np.mean(covered, axis=0)
    assert np.all((coverage >= 0.82) & (coverage <= 0.98))
