"""Command line: ``sktdlvt {simulate,estimate,montecarlo,oracle,report}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, SktDlvtError
from ..sigmodel import TargetTruth
from . import io
from .config import RunConfig, load_config
from .pipeline import make_plan, run_oracle, run_pipeline, run_simulate
from .studies import (MC_COLUMNS, check_snr_bound, fold_success_rates, measure_complexity,
                      montecarlo_rmse, threshold_snr)

log = logging.getLogger("sktdlvt")


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args, cfg) -> Path:
    out = Path(args.out if args.out else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    cfg = _load(args)
    out = _out(args, cfg)
    run_simulate(cfg, out)
    log.info("wrote %s", out / "echo.sktd")


def cmd_estimate(args):
    cfg = _load(args)
    out = _out(args, cfg)
    result, summary = run_pipeline(cfg, out, timings=args.timings)
    for e in summary["estimates"]:
        log.info("cell %d  v_c %.4f m/s  a_c %.4f m/s^2  k_out %d",
                 e["range_cell"], e["v_c_mps"] or float("nan"), e["a_c_mps2"], e["k_amb_out"])
    return 1 if summary["errors"] else 0


def cmd_montecarlo(args):
    cfg = _load(args)
    out = _out(args, cfg)
    rows = montecarlo_rmse(cfg, workers=args.threads)
    io.write_table_csv(out / "montecarlo.csv", MC_COLUMNS, rows)
    summary = {"config": cfg.to_dict(),
               "threshold_snr_db": {m: threshold_snr(rows, m) for m in ("SKT-DLVT", "DT-LVT")},
               "rows": [dict(zip(MC_COLUMNS, r)) for r in rows]}
    if args.fold_snr is not None:
        fast = dataclasses.replace(cfg, targets=cfg.targets or _fast_target(cfg))
        summary["fold_study"] = fold_success_rates(fast, args.fold_snr, cfg.montecarlo.trials)
    io.write_json(out / "montecarlo.json", summary)


def _fast_target(cfg):
    return (TargetTruth.from_radial(1e4, 40.0, 0.92, cfg.radar.platform_velocity),)


def cmd_oracle(args):
    cfg = _load(args)
    out = _out(args, cfg)
    rep = run_oracle(cfg, out, cell_dump=args.input)
    log.info("DT-LVT f %.4f Hz  gamma %.4f Hz/s", rep["dt_lvt"]["f_hat_hz"],
             rep["dt_lvt"]["gamma_hat_hz_per_s"])


def cmd_report(args):
    cfg = _load(args)
    out = _out(args, cfg)
    plan = make_plan(cfg)
    bounds = [check_snr_bound(args.trials, s, cfg.radar, plan, seed=cfg.noise.seed)
              for s in args.snr]
    cx = measure_complexity(cfg.radar, plan.num_segments, cfg.pipeline.a2_max, cfg.noise.seed)
    io.write_json(out / "report.json", {"snr_bound": bounds, "complexity": cx})
    ok = all(b["passed"] is not False for b in bounds) and cx["within_tolerance"]
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sktdlvt", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (default: config output_dir)")
    common.add_argument("--seed", type=int, help="override noise and Monte Carlo seeds")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write the simulated echo matrix") \
        .set_defaults(func=cmd_simulate)
    est = sub.add_parser("estimate", parents=[common], help="run the full pipeline")
    est.add_argument("--timings", action="store_true", help="also write timings.json")
    est.set_defaults(func=cmd_estimate)
    mc = sub.add_parser("montecarlo", parents=[common], help="RMSE study")
    mc.add_argument("--fold-snr", type=float, help="also compare fold detection at this SNR")
    mc.set_defaults(func=cmd_montecarlo)
    orc = sub.add_parser("oracle", parents=[common], help="direct LVT on one azimuth cell")
    orc.add_argument("--input", help="1 x N matrix dump of an azimuth cell")
    orc.set_defaults(func=cmd_oracle)
    rep = sub.add_parser("report", parents=[common], help="output-SNR bound and complexity")
    rep.add_argument("--snr", type=float, nargs="+", default=[-30.0, -20.0, -10.0])
    rep.add_argument("--trials", type=int, default=30)
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return int(args.func(args) or 0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SktDlvtError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
