"""Configuration, persistence, studies and the command line."""

from .baseline import dt_lvt_baseline, resolve_baseline_velocity
from .config import RunConfig, load_config, parse_config
from .io import decode_matrix, encode_matrix, read_matrix, write_matrix
from .pipeline import run_oracle, run_pipeline, run_simulate, simulate_scene
from .studies import (analytic_complexity_ratio, check_snr_bound, complexity_report,
                      fold_success_rates, measure_complexity, montecarlo_rmse, snr_out_bound,
                      threshold_snr)

__all__ = [
    "RunConfig", "analytic_complexity_ratio", "check_snr_bound", "complexity_report",
    "decode_matrix", "dt_lvt_baseline", "encode_matrix", "fold_success_rates", "load_config",
    "measure_complexity", "montecarlo_rmse", "parse_config", "read_matrix",
    "resolve_baseline_velocity", "run_oracle", "run_pipeline", "run_simulate",
    "simulate_scene", "snr_out_bound", "threshold_snr", "write_matrix",
]
