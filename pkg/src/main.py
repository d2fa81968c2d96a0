"""
Línea de comandos `svine`: fit, simulate, forecast, backtest y check-structure.

Códigos de salida: 0 ok, 1 uso, 2 error de ejecución (con un JSON {"error", "message"} en stderr).
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.bootstrap.newton import bootstrap_forecast, bootstrap_params, export_replicates
from src.config import settings
from src.estimation.model import PseudoSample, load_model, save_model
from src.estimation.selection import KINDS, select_structure
from src.estimation.sequential import aic, fit_sequential, loglik
from src.forecast.backtest import HORIZONS, BacktestConfig, backtest
from src.forecast.scoring import MEASURES, Functional
from src.forecast.simulation import ForecastRequest, forecast, simulate_unconditional
from src.margins.transform import fit_margins, normalize_mode
from src.utils.errors import SVineError
from src.utils.utils_io import read_dataset, read_json, write_json, write_matrix_csv
from src.vines.graph import VineStructure
from src.vines.stationary import SVineSpec, build_svine, is_stationary_vine

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _csv_list(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    return [item.strip() for item in text.split(",") if item.strip()]


def _report(payload: dict) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False))


# ==========================================
# Subcomandos
# ==========================================

def _load_spec(path: Path, p: int) -> SVineSpec:
    """Acepta un JSON de especificación o un modelo ajustado (clave "spec"); el orden p es el de la línea de comandos."""
    payload = read_json(path)
    spec = SVineSpec.from_dict(payload.get("spec", payload))
    return SVineSpec(spec.cross_section, spec.in_perm, spec.out_perm, p)


def cmd_fit(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.data)
    mode = normalize_mode(args.mode)
    families = _csv_list(args.families)

    logger.info(f"Ajustando márgenes ({mode})...")
    margins = fit_margins(dataset.values, mode)
    u = PseudoSample.from_data(dataset.values, margins, mode)

    if args.structure == "auto":
        spec = select_structure(u, args.markov, families, args.kind)
    else:
        spec = _load_spec(args.structure, args.markov)
        logger.info(f"Estructura leída de {args.structure}")

    model = fit_sequential(u, spec, families, margins)
    ll, model_aic = loglik(model, u), aic(model, u)
    out = args.out or settings.PROCESSED_DIR / f"{Path(args.data).stem}_svine.json"
    save_model(model, out, loglik=ll, aic=model_aic, columns=list(dataset.columns))

    _report(
        {
            "T": dataset.T,
            "d": dataset.d,
            "p": spec.markov_order,
            "loglik": ll,
            "aic": model_aic,
            "in_perm": list(spec.in_perm),
            "out_perm": list(spec.out_perm),
            "families": {key: cop.tag.label for key, cop in model.copulas.items()},
            "model": str(out),
        }
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    columns = read_json(args.model).get("fit", {}).get("columns")
    x = simulate_unconditional(model, args.n, args.seed)
    out = args.out or settings.OUTPUTS_DIR / "simulacion.csv"
    write_matrix_csv(x, out, columns)
    logger.info(f"✅ Simulación de {args.n} filas guardada en {out}")
    return EXIT_OK


def cmd_forecast(args: argparse.Namespace) -> int:
    if args.bootstrap and args.data is None:
        raise UsageError("--bootstrap requiere --data con la muestra de entrenamiento")
    model = load_model(args.model)
    history = read_dataset(args.history).values
    if history.shape[0] < model.p:
        raise ValueError(f"La historia tiene {history.shape[0]} filas y el modelo requiere p={model.p}")
    n_sims = args.n or settings.SIMS_PER_OBS * max(model.n_obs, 100)
    weights = np.array([float(w) for w in _csv_list(args.portfolio)]) if args.portfolio else None
    request = ForecastRequest(
        history=history[history.shape[0] - model.p :],
        horizon=args.horizon,
        n_sims=n_sims,
        functionals=tuple(Functional.parse(f) for f in _csv_list(args.functionals)),
        seed=args.seed,
        weights=weights,
    )

    if args.bootstrap:
        train = read_dataset(args.data).values
        sample = PseudoSample.from_data(train, model.margins, model.mode)
        replicates = bootstrap_params(model, sample, args.bootstrap, args.block_length, args.seed)
        levels = [float(x) for x in _csv_list(args.levels)]
        result = bootstrap_forecast(model, sample, request, args.bootstrap, seed=args.seed, levels=levels, replicates=replicates)
        if args.replicates_out:
            export_replicates(replicates, model.parameter_names(), args.replicates_out)
    else:
        result = forecast(model, request)

    out = args.out or settings.OUTPUTS_DIR / "pronostico.json"
    write_json({"horizon": args.horizon, "seed": args.seed, **result.to_dict()}, out)
    if args.sims_out:
        write_matrix_csv(result.simulations, args.sims_out)
    _report({name: np.asarray(v).tolist() for name, v in result.estimates.items()})
    logger.info(f"✅ Pronóstico guardado en {out}")
    return EXIT_OK


def cmd_backtest(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.data)
    payload = read_json(args.config) if args.config else {}
    config = BacktestConfig.from_dict(
        payload,
        window=args.window,
        stride=args.stride,
        horizon=args.horizon,
        n_sims=args.n,
        n_portfolios=args.portfolios,
        markov_order=args.markov,
        mode=args.mode,
        families=_csv_list(args.families),
        kind=args.kind,
        seed=args.seed,
        measures=_csv_list(args.measures),
    )
    result = backtest(dataset.values, config)
    out = args.out or settings.OUTPUTS_DIR / "backtest.csv"
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    result.table.to_csv(out, index=False)
    print(result.table.to_string(index=False))
    logger.info(f"✅ Tabla de backtest guardada en {out}")
    return EXIT_OK


def cmd_check_structure(args: argparse.Namespace) -> int:
    payload = read_json(args.structure)
    payload = payload.get("spec", payload)
    if "cross_section" in payload:
        spec = SVineSpec.from_dict(payload)
        vine = build_svine(spec, args.T)
    else:
        vine = VineStructure.from_dict(payload)

    report = is_stationary_vine(vine)
    _report(
        {
            "result": "PASS" if report else "FAIL",
            "window": list(report.window) if report.window else None,
            "reason": report.reason,
        }
    )
    return EXIT_OK


# ==========================================
# Parser
# ==========================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svine", description="Modelos S-vine para series de tiempo multivariadas")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="Ajusta márgenes, estructura y cópulas")
    fit.add_argument("data", type=Path)
    fit.add_argument("--markov", type=int, default=1)
    fit.add_argument("--mode", default="par", choices=["par", "semipar"])
    fit.add_argument("--structure", default="auto", help="'auto' o ruta a un JSON de estructura")
    fit.add_argument("--kind", default="svine", choices=KINDS)
    fit.add_argument("--families", help="Lista separada por comas, p.ej. gaussian,clayton_90")
    fit.add_argument("--out", type=Path)
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="Simula una trayectoria del modelo")
    sim.add_argument("model", type=Path)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    sim.add_argument("--out", type=Path)
    sim.set_defaults(func=cmd_simulate)

    fc = sub.add_parser("forecast", help="Pronóstico condicional por Monte-Carlo")
    fc.add_argument("model", type=Path)
    fc.add_argument("history", type=Path)
    fc.add_argument("--horizon", type=int, default=1)
    fc.add_argument("--n", type=int)
    fc.add_argument("--functionals", default="mean,quantile:0.05")
    fc.add_argument("--portfolio", help="Pesos separados por comas")
    fc.add_argument("--levels", default="0.5,0.9")
    fc.add_argument("--bootstrap", type=int, default=0)
    fc.add_argument("--block-length", type=int)
    fc.add_argument("--data", type=Path, help="Muestra de entrenamiento (requerida con --bootstrap)")
    fc.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    fc.add_argument("--out", type=Path)
    fc.add_argument("--sims-out", type=Path)
    fc.add_argument("--replicates-out", type=Path)
    fc.set_defaults(func=cmd_forecast)

    bt = sub.add_parser("backtest", help="Backtest de ventana móvil sobre portafolios aleatorios")
    bt.add_argument("data", type=Path)
    bt.add_argument("--config", type=Path, help="JSON con los campos de BacktestConfig")
    bt.add_argument("--window", type=int)
    bt.add_argument("--stride", type=int)
    bt.add_argument("--horizon", choices=list(HORIZONS))
    bt.add_argument("--n", type=int)
    bt.add_argument("--portfolios", type=int)
    bt.add_argument("--markov", type=int)
    bt.add_argument("--mode", choices=["par", "semipar"])
    bt.add_argument("--families")
    bt.add_argument("--kind", choices=KINDS)
    bt.add_argument("--measures", help=f"Subconjunto de {','.join(MEASURES)}")
    bt.add_argument("--seed", type=int)
    bt.add_argument("--out", type=Path)
    bt.set_defaults(func=cmd_backtest)

    chk = sub.add_parser("check-structure", help="Verifica si una estructura es un S-vine")
    chk.add_argument("structure", type=Path)
    chk.add_argument("--T", type=int, default=3)
    chk.set_defaults(func=cmd_check_structure)
    return parser


def _fail(error: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(error).__name__, "message": str(error)}, ensure_ascii=False) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        _fail(e)
        return EXIT_USAGE

    logging.basicConfig(level=args.log_level, format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.func(args)
    except UsageError as e:
        _fail(e)
        return EXIT_USAGE
    except (SVineError, OSError, ValueError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        _fail(e)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
