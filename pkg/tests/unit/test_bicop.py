import numpy as np
import pytest
from scipy import integrate
from scipy.optimize import brentq
from scipy.stats import kendalltau

from src.config import settings
from src.copulas.bicop import BivariateCopula, tau_to_param
from src.copulas.families import Family, FamilyTag, expand_menu
from src.utils.errors import CopulaDomainError


def cop(family: str, *params, rotation: int = 0) -> BivariateCopula:
    return BivariateCopula(FamilyTag(Family(family), rotation), params)


# --- Densidad ---

def test_independence_density_is_one():
    assert cop("independence").pdf(0.3, 0.7) == pytest.approx(1.0)


@pytest.mark.parametrize("u, v", [(0.1, 0.9), (0.5, 0.5), (0.75, 0.2)])
def test_gaussian_zero_correlation_is_independence(u, v):
    assert cop("gaussian", 0.0).pdf(u, v) == pytest.approx(1.0)


def test_gaussian_density_at_center():
    """En (0.5, 0.5) la densidad gaussiana vale 1/sqrt(1-ρ²)."""
    assert cop("gaussian", 0.5).pdf(0.5, 0.5) == pytest.approx(1.0 / np.sqrt(0.75), rel=1e-10)


@pytest.mark.parametrize("c", [
    cop("independence"),
    cop("gaussian", 0.3),
    cop("student_t", 0.5, 4.0),
    cop("frank", 3.0),
    cop("frank", -5.0),
    cop("clayton", 0.5),
    cop("clayton", 2.0, rotation=90),
    cop("clayton", 2.0, rotation=270),
    cop("gumbel", 1.2),
    cop("gumbel", 2.0, rotation=180),
], ids=lambda c: c.tag.label)
def test_density_integrates_to_one(c):
    total, _ = integrate.dblquad(lambda v, u: float(c.pdf(u, v)), 0.0, 1.0, 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_rotation_180_reflects_both_arguments():
    base, rotated = cop("clayton", 2.0), cop("clayton", 2.0, rotation=180)
    assert rotated.pdf(0.2, 0.7) == pytest.approx(base.pdf(0.8, 0.3))


# --- CDF y h-funciones ---

def test_gaussian_cdf_at_median():
    """C(0.5, 0.5) = 1/4 + arcsin(ρ)/(2π)."""
    assert cop("gaussian", 0.5).cdf(0.5, 0.5) == pytest.approx(0.25 + np.arcsin(0.5) / (2 * np.pi), abs=1e-10)


def test_independence_hfunc_is_identity():
    u = np.array([0.1, 0.4, 0.9])
    np.testing.assert_allclose(cop("independence").hfunc(u, 0.3), u)
    np.testing.assert_allclose(cop("independence").hinv(u, 0.3), u)


@pytest.mark.parametrize("c", [
    cop("gaussian", 0.5),
    cop("student_t", 0.3, 6.0),
    cop("frank", 4.0),
    cop("clayton", 2.0),
    cop("clayton", 1.5, rotation=90),
    cop("clayton", 1.5, rotation=180),
    cop("gumbel", 1.5, rotation=270),
])
@pytest.mark.parametrize("u", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("v", [0.3, 0.7])
def test_hfunc_matches_cdf_derivative(c, u, v):
    eps = 1e-5
    dv = (c.cdf(u, v + eps) - c.cdf(u, v - eps)) / (2 * eps)
    du = (c.cdf(v + eps, u) - c.cdf(v - eps, u)) / (2 * eps)
    assert c.hfunc(u, v, direction=2) == pytest.approx(dv, abs=1e-4)
    assert c.hfunc(u, v, direction=1) == pytest.approx(du, abs=1e-4)


def test_clayton_hfunc_closed_form():
    u = v = 0.5
    theta = 2.0
    expected = (u ** -theta + v ** -theta - 1) ** (-1 / theta - 1) * v ** (-theta - 1)
    assert cop("clayton", theta).hfunc(u, v) == pytest.approx(expected, rel=1e-12)


def test_gaussian_hinv_round_trip():
    c = cop("gaussian", 0.5)
    grid = np.linspace(0.05, 0.95, 10)
    w, v = np.meshgrid(grid, grid)
    for direction in (1, 2):
        np.testing.assert_allclose(c.hfunc(c.hinv(w, v, direction), v, direction), w, atol=1e-8)


def test_gumbel_hinv_matches_bisection():
    c = cop("gumbel", 1.5)
    oracle = brentq(lambda x: c.hfunc(x, 0.1) - 0.9, 1e-12, 1 - 1e-12, xtol=1e-14)
    assert float(c.hinv(0.9, 0.1)) == pytest.approx(oracle, abs=1e-9)


MENU_PARAMS = {
    Family.INDEPENDENCE: (),
    Family.GAUSSIAN: (0.95,),
    Family.STUDENT_T: (0.7, 4.0),
    Family.CLAYTON: (2.0,),
    Family.GUMBEL: (1.8,),
    Family.FRANK: (-8.0,),
}

HINV_CASES = [BivariateCopula(tag, MENU_PARAMS[tag.family]) for tag in expand_menu(settings.DEFAULT_FAMILIES)] + [
    cop("frank", 8.0),
    cop("frank", 0.01),
    cop("student_t", -0.9, 2.5),
    cop("gaussian", -0.5),
]


@pytest.mark.parametrize("c", HINV_CASES, ids=lambda c: f"{c.tag.label}{c.params}")
@pytest.mark.parametrize("direction", [1, 2])
def test_hinv_round_trip(c, direction):
    grid = np.linspace(0.01, 0.99, 41)
    w, v = np.meshgrid(grid, grid)
    np.testing.assert_allclose(c.hfunc(c.hinv(w, v, direction), v, direction), w, rtol=0, atol=1e-8)


def test_hinv_cases_cover_whole_menu():
    labels = {c.tag.label for c in HINV_CASES}
    assert {"clayton_90", "clayton_180", "clayton_270", "gumbel_90", "gumbel_180", "gumbel_270"} <= labels


# --- Tau de Kendall ---

def test_gaussian_zero_tau():
    assert cop("gaussian", 0.0).kendall_tau() == 0.0


@pytest.mark.parametrize("c, expected", [
    (cop("clayton", 2.0), 0.5),
    (cop("gaussian", 0.5), 2 / np.pi * np.arcsin(0.5)),
    (cop("gumbel", 2.0, rotation=90), -0.5),
])
def test_kendall_tau_against_simulation(c, expected):
    assert c.kendall_tau() == pytest.approx(expected, abs=1e-12)
    sample = c.simulate(100_000, np.random.default_rng(3))
    assert kendalltau(sample[:, 0], sample[:, 1]).statistic == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("label, tau", [("clayton", 0.4), ("gumbel", 0.3), ("frank", -0.25), ("gaussian", 0.6)])
def test_tau_inversion(label, tau):
    tag = FamilyTag.parse(label)
    assert BivariateCopula(tag, tau_to_param(tag, tau)).kendall_tau() == pytest.approx(tau, abs=1e-6)


# --- Dominio y serialización ---

@pytest.mark.parametrize("family, params", [
    ("gaussian", (1.0,)),
    ("clayton", (-0.5,)),
    ("gumbel", (0.9,)),
    ("frank", (0.0,)),
    ("student_t", (0.2, 1.5)),
    ("gaussian", ()),
])
def test_domain_errors(family, params):
    with pytest.raises(CopulaDomainError):
        cop(family, *params)


def test_rotation_not_allowed_for_reflection_symmetric_families():
    with pytest.raises(CopulaDomainError):
        FamilyTag(Family.FRANK, 90)


def test_expand_menu_rotations():
    menu = expand_menu(["gaussian", "clayton", "gumbel_180"])
    assert [t.label for t in menu] == ["gaussian", "clayton", "clayton_90", "clayton_180", "clayton_270", "gumbel_180"]


def test_dict_round_trip():
    c = cop("gumbel", 1.7, rotation=270)
    assert BivariateCopula.from_dict(c.to_dict()) == c


def test_from_dict_missing_family():
    with pytest.raises(CopulaDomainError):
        BivariateCopula.from_dict({"parameters": [0.5]})
