from src.bootstrap.multiplier import MultiplierStream, default_block_length, gen_multipliers, unit_multipliers
from src.bootstrap.newton import (
    BootstrapReplicate,
    ScoreJacobian,
    bootstrap_forecast,
    bootstrap_params,
    export_replicates,
    replicates_frame,
    score_and_jacobian,
    score_rows,
)
