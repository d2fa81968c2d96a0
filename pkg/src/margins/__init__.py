from src.margins.empirical import EmpiricalMargin
from src.margins.skew_t import SkewTParams, fit_margin_mle
from src.margins.transform import (
    EMPIRICAL,
    PARAMETRIC,
    Margin,
    fit_margins,
    margin_from_dict,
    normalize_mode,
    pit,
    pseudo_observations,
    quantile,
    to_data_scale,
)
