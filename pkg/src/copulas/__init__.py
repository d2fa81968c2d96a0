from src.copulas.bicop import BivariateCopula, FitInfo, clamp, tau_to_param
from src.copulas.families import Family, FamilyTag, expand_menu
from src.copulas.fitting import fit_pair, pair_fit_count, select_family

__all__ = [
    "BivariateCopula",
    "FitInfo",
    "Family",
    "FamilyTag",
    "clamp",
    "expand_menu",
    "fit_pair",
    "pair_fit_count",
    "select_family",
    "tau_to_param",
]
