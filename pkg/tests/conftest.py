import numpy as np
import pandas as pd
import pytest

from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.copulas.families import Family, FamilyTag
from src.estimation.model import PseudoSample, SVineModel
from src.margins.transform import fit_margins
from src.vines.builders import d_vine
from src.vines.graph import Vertex, VineStructure, label_edges
from src.vines.stationary import SVineSpec, distinct_classes, svine_window


@pytest.fixture(scope="function")
def mock_env_dirs(tmp_path, monkeypatch):
    """
    Sobrescribe las rutas de configuración para apuntar a un directorio temporal.
    Esto aísla los tests del sistema de archivos real.
    """
    (tmp_path / "data" / "raw").mkdir(parents=True)
    (tmp_path / "data" / "processed").mkdir(parents=True)
    (tmp_path / "data" / "outputs").mkdir(parents=True)

    monkeypatch.setattr(settings, "DATA_DIR", tmp_path / "data")
    monkeypatch.setattr(settings, "RAW_DIR", tmp_path / "data" / "raw")
    monkeypatch.setattr(settings, "PROCESSED_DIR", tmp_path / "data" / "processed")
    monkeypatch.setattr(settings, "OUTPUTS_DIR", tmp_path / "data" / "outputs")
    return tmp_path


def simulate_var1(T: int, d: int, phi: float = 0.4, corr: float = 0.5, seed: int = 7) -> np.ndarray:
    """VAR(1) gaussiano con innovaciones equicorrelacionadas."""
    rng = np.random.default_rng(seed)
    cov = np.full((d, d), corr) + (1.0 - corr) * np.eye(d)
    eps = rng.multivariate_normal(np.zeros(d), cov, size=T)
    x = np.zeros((T, d))
    for t in range(1, T):
        x[t] = phi * x[t - 1] + eps[t]
    return x


@pytest.fixture
def var_data():
    return simulate_var1(300, 2)


@pytest.fixture
def sample_csv(mock_env_dirs, var_data):
    """CSV de retornos con columna de fechas, como lo recibiría la línea de comandos."""
    df = pd.DataFrame(var_data, columns=["activo_a", "activo_b"])
    df.insert(0, "fecha", pd.date_range("2020-01-01", periods=len(df), freq="D").strftime("%Y-%m-%d"))
    file_path = settings.RAW_DIR / "retornos.csv"
    df.to_csv(file_path, index=False)
    return file_path


@pytest.fixture
def pseudo_sample(var_data):
    margins = fit_margins(var_data, "semipar")
    return PseudoSample.from_data(var_data, margins, "empirical")


def chain_spec(p: int = 1) -> SVineSpec:
    """Serie univariada: el S-vine es un D-vine sobre el camino temporal."""
    return SVineSpec(VineStructure(frozenset([Vertex(1, 1)])), (1,), (1,), p)


def mvine_spec(d: int, p: int = 1) -> SVineSpec:
    order = tuple(range(1, d + 1))
    return SVineSpec(d_vine(order), order, order, p)


def gaussian_model(spec: SVineSpec, rho: float, margins=()) -> SVineModel:
    """Modelo con todas las clases gaussianas con el mismo ρ."""
    tag = FamilyTag(Family.GAUSSIAN)
    copulas = {c.key: BivariateCopula(tag, (rho,)) for c in distinct_classes(svine_window(spec))}
    return SVineModel(spec, copulas, tuple(margins))


@pytest.fixture
def ar_model():
    """Cadena univariada Markov(1) con cópula gaussiana ρ=0.7."""
    return gaussian_model(chain_spec(1), 0.7)


@pytest.fixture
def mvine_model():
    return gaussian_model(mvine_spec(2, 1), 0.4)


def copar_d2_t3() -> VineStructure:
    """COPAR con d=2 en tres tiempos: raíz (t,1) unida a (t+1,1) y un D-vine sobre las raíces."""
    vertices = [(t, j) for t in (1, 2, 3) for j in (1, 2)]
    trees = [
        [((1, 1), (1, 2)), ((1, 1), (2, 1)), ((2, 1), (2, 2)), ((2, 1), (3, 1)), ((3, 1), (3, 2))],
        [(0, 1), (1, 2), (1, 3), (3, 4)],
        [(0, 1), (1, 2), (2, 3)],
        [(0, 1), (1, 2)],
        [(0, 1)],
    ]
    return label_edges(vertices, trees)
