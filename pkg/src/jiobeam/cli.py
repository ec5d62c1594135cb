"""Command-line interface for the simulator and analysis tools."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import check_stability, predict_mse
from .errors import ConfigError, NumericalError
from .harness import (emit_plots, experiment_from_json, run_experiment,
                      sweep_rank, write_sweep_csv)
from .metrics import complexity_counts
from .signal_model import scenario_from_dict


def _parse_ranks(text: str) -> list[int]:
    """Parse '1..16' or a comma list like '1,4,16'."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _load_scenario(path: str):
    """Accept either a bare scenario JSON or an experiment JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return scenario_from_dict(data.get("scenario", data))


def _cmd_run(args) -> int:
    config = experiment_from_json(args.config)
    if args.trials is not None:
        config = replace(config, n_trials=args.trials)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    result = run_experiment(config)
    out_dir = Path(args.out)
    csv_path = result.write_csv(out_dir / (Path(args.config).stem + "_metrics.csv"))
    print(f"wrote {csv_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = experiment_from_json(args.config)
    rows = sweep_rank(config, _parse_ranks(args.ranks))
    csv_path = write_sweep_csv(rows, Path(args.out) / (Path(args.config).stem + "_rank_sweep.csv"))
    print(f"wrote {csv_path}")
    return 0


def _cmd_stability(args) -> int:
    scenario = _load_scenario(args.config)
    report = check_stability(scenario, args.mu_s, args.mu_w, d=args.d)
    print(f"mu_s={report.mu_s:g} mu_w={report.mu_w:g} "
          f"spectral_radius={report.spectral_radius:.9f} classification={report.stable}")
    return 0


def _cmd_predict_mse(args) -> int:
    scenario = _load_scenario(args.config)
    pred = predict_mse(scenario, args.mu_s, args.mu_w, steps=args.steps,
                       ensemble_size=args.ensemble, d=args.d)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("snapshot,predicted_mse\n")
        for i, v in enumerate(pred.trajectory):
            fh.write(f"{i},{v:.12g}\n")
    print(f"eps_min={pred.eps_min:.6g} xi_min={pred.xi_min:.6g} "
          f"steady={np.mean(pred.trajectory[-max(1, args.steps // 10):]):.6g}")
    print(f"wrote {out}")
    return 0


def _cmd_complexity(args) -> int:
    print(f"{'algorithm':<10} {'additions':>12} {'multiplications':>16}")
    for row in complexity_counts(args.m, args.d):
        print(f"{row.algorithm:<10} {row.additions:>12} {row.multiplications:>16}")
    return 0


def _cmd_plot(args) -> int:
    for path in emit_plots(args.csv, args.out):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jiobeam",
                                     description="Reduced-rank LCMV beamforming simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--trials", type=int, default=None, help="override n_trials")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep-rank", help="final SINR against rank")
    p.add_argument("config")
    p.add_argument("--ranks", default="1..16", help="e.g. 1..16 or 1,4,16")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("stability-check", help="classify SG step sizes")
    p.add_argument("config", help="scenario JSON (or experiment JSON's scenario block)")
    p.add_argument("--mu-s", type=float, required=True)
    p.add_argument("--mu-w", type=float, required=True)
    p.add_argument("--d", type=int, default=4)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("predict-mse", help="semi-analytical MSE trajectory")
    p.add_argument("config", help="scenario JSON")
    p.add_argument("--mu-s", type=float, default=0.001)
    p.add_argument("--mu-w", type=float, default=0.001)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--ensemble", type=int, default=200)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--out", default="predicted_mse.csv")
    p.set_defaults(func=_cmd_predict_mse)

    p = sub.add_parser("complexity", help="arithmetic cost table")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("plot", help="render charts from a metrics CSV")
    p.add_argument("csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NumericalError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
