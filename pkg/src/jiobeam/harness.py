"""Monte Carlo experiment runner, CSV emission, plotting, rank sweeps.

Trials advance in lockstep as one batched numpy state per algorithm, so
a 200-trial ensemble costs a few array operations per snapshot.  Every
algorithm sees the same per-trial snapshot streams, metrics are
averaged across trials in fixed order, and the whole output is a pure
function of the configuration plus the master seed.

Conventions: metrics at snapshot i evaluate the filters after they have
processed snapshot i; ensemble SINR averages the linear ratio across
trials before converting to dB; SINR covariances use nominal source
powers so curves are comparable across trials.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._math import inner, quad_form
from .errors import ConfigError
from .fullrank import (fullrank_rls_step, fullrank_sg_step, init_fullrank_rls,
                       init_fullrank_sg, optimal_full_rank)
from .jio import (effective_filter, init_jio_rls, init_jio_sg, jio_rls_step,
                  jio_sg_step)
from .metrics import mse_metric
from .rank_adapt import (init_rank_adapt_rls, init_rank_adapt_sg,
                         rank_adapt_step, selected_filters, selected_outputs)
from .signal_model import (Scenario, interference_covariance, scenario_from_dict,
                           signal_covariance, soi_steering, trial_snapshots,
                           true_covariance)

ALGORITHMS = ("opt", "fr-sg", "fr-rls", "jio-sg", "jio-rls", "jio-sg-auto", "jio-rls-auto")


@dataclass(frozen=True)
class AlgorithmSpec:
    """One algorithm entry of an experiment: name plus hyperparameters.

    ``delta``/``delta_bar`` default to 100 / sigma2 when left ``None``.
    ``label`` names the CSV rows (defaults to ``name``), letting one run
    carry the same algorithm at several ranks.
    """

    name: str
    d: int = 4
    mu: float = 1e-3
    mu_s: float = 1e-3
    mu_w: float = 1e-3
    alpha: float = 0.998
    delta: float | None = None
    delta_bar: float | None = None
    d_min: int = 3
    d_max: int = 8
    freeze_after: int | None = None
    label: str | None = None

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ConfigError(f"algorithms[].name: {self.name!r} is not one of {ALGORITHMS}")

    @property
    def csv_label(self) -> str:
        return self.label if self.label is not None else self.name


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    n_snapshots: int
    n_trials: int = 200
    seed: int | None = None
    algorithms: tuple[AlgorithmSpec, ...] = ()

    def __post_init__(self):
        if self.n_snapshots < 1:
            raise ConfigError(f"n_snapshots: must be >= 1, got {self.n_snapshots}")
        if self.n_trials < 1:
            raise ConfigError(f"n_trials: must be >= 1, got {self.n_trials}")
        if not self.algorithms:
            raise ConfigError("algorithms: at least one algorithm required")
        labels = [a.csv_label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"algorithms: duplicate labels {labels}; set 'label' to disambiguate")

    @property
    def master_seed(self) -> int:
        return self.scenario.seed if self.seed is None else self.seed


@dataclass
class AlgorithmMetrics:
    """Trial-averaged per-snapshot curves for one algorithm."""

    label: str
    sinr_db: np.ndarray
    mse: np.ndarray
    rank: np.ndarray


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    metrics: dict[str, AlgorithmMetrics] = field(default_factory=dict)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "snapshot", "sinr_db", "mse", "rank"])
            for label, m in self.metrics.items():
                for i in range(len(m.sinr_db)):
                    writer.writerow([label, i, f"{m.sinr_db[i]:.12g}",
                                     f"{m.mse[i]:.12g}", f"{m.rank[i]:.12g}"])
        return path


@dataclass(frozen=True)
class _Segment:
    start: int
    stop: int
    rs: np.ndarray
    ri: np.ndarray
    r_cov: np.ndarray
    w_opt: np.ndarray
    sinr_opt_db: float


def _segments(scenario: Scenario, n: int) -> list[_Segment]:
    a = soi_steering(scenario)
    out = []
    for lo, hi, _ in scenario.segments(n):
        rs = signal_covariance(scenario, lo)
        ri = interference_covariance(scenario, lo)
        r_cov = true_covariance(scenario, lo)
        w_opt, _ = optimal_full_rank(r_cov, a)
        opt_db = 10.0 * np.log10(quad_form(w_opt, rs) / quad_form(w_opt, ri))
        out.append(_Segment(lo, hi, rs, ri, r_cov, w_opt, float(opt_db)))
    return out


def _default_loading(spec: AlgorithmSpec, scenario: Scenario) -> tuple[float, float]:
    base = 100.0 / scenario.sigma2 if scenario.sigma2 > 0 else 100.0
    delta = base if spec.delta is None else spec.delta
    delta_bar = base if spec.delta_bar is None else spec.delta_bar
    return delta, delta_bar


def _run_algorithm(spec: AlgorithmSpec, scenario: Scenario, segments: list[_Segment],
                   r_all: np.ndarray, d_all: np.ndarray) -> AlgorithmMetrics:
    n_trials, n, m = r_all.shape
    a = soi_steering(scenario)
    delta, delta_bar = _default_loading(spec, scenario)
    sinr_lin = np.empty(n)
    mse = np.empty(n)
    rank_col = np.empty(n)

    if spec.name == "opt":
        for seg in segments:
            x = np.einsum("m,tim->ti", np.conj(seg.w_opt), r_all[:, seg.start:seg.stop])
            mse[seg.start:seg.stop] = np.mean(mse_metric(d_all[:, seg.start:seg.stop], x), axis=0)
            sinr_lin[seg.start:seg.stop] = 10.0 ** (seg.sinr_opt_db / 10.0)
        rank_col[:] = m
        return AlgorithmMetrics(spec.csv_label, 10.0 * np.log10(sinr_lin), mse, rank_col)

    if spec.name == "fr-sg":
        state = init_fullrank_sg(a, spec.mu, batch=(n_trials,))
        step = lambda st, r, i: fullrank_sg_step(st, r, a)
        filters = lambda st: st.w
        ranks = lambda st: float(m)
    elif spec.name == "fr-rls":
        state = init_fullrank_rls(a, spec.alpha, delta, batch=(n_trials,))
        step = lambda st, r, i: fullrank_rls_step(st, r, a)
        filters = lambda st: st.w
        ranks = lambda st: float(m)
    elif spec.name == "jio-sg":
        state = init_jio_sg(a, spec.d, spec.mu_s, spec.mu_w, batch=(n_trials,))
        step = lambda st, r, i: jio_sg_step(st, r, a)
        filters = effective_filter
        ranks = lambda st: float(spec.d)
    elif spec.name == "jio-rls":
        state = init_jio_rls(a, spec.d, spec.alpha, delta, delta_bar, batch=(n_trials,))
        step = lambda st, r, i: jio_rls_step(st, r, a)
        filters = effective_filter
        ranks = lambda st: float(spec.d)
    elif spec.name in ("jio-sg-auto", "jio-rls-auto"):
        variant = "sg" if spec.name == "jio-sg-auto" else "rls"
        if variant == "sg":
            state = init_rank_adapt_sg(a, spec.mu_s, spec.mu_w, spec.d_min, spec.d_max,
                                       spec.alpha, spec.freeze_after, batch=(n_trials,))
        else:
            state = init_rank_adapt_rls(a, spec.alpha, delta, delta_bar, spec.d_min,
                                        spec.d_max, spec.freeze_after, batch=(n_trials,))
        step = lambda st, r, i: rank_adapt_step(st, r, a, i, variant)
        filters = selected_filters
        ranks = lambda st: float(np.mean(st.d_current))
    else:  # pragma: no cover - guarded by AlgorithmSpec validation
        raise ConfigError(f"unknown algorithm {spec.name!r}")

    seg_of = np.empty(n, dtype=int)
    for j, seg in enumerate(segments):
        seg_of[seg.start:seg.stop] = j

    for i in range(n):
        r = r_all[:, i, :]
        state = step(state, r, i)
        w_eff = filters(state)
        if spec.name in ("jio-sg-auto", "jio-rls-auto"):
            x = selected_outputs(state, r)
        else:
            x = inner(w_eff, r)
        seg = segments[seg_of[i]]
        sinr_lin[i] = np.mean(quad_form(w_eff, seg.rs) / quad_form(w_eff, seg.ri))
        mse[i] = np.mean(mse_metric(d_all[:, i], x))
        rank_col[i] = ranks(state)

    return AlgorithmMetrics(spec.csv_label, 10.0 * np.log10(sinr_lin), mse, rank_col)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every configured algorithm over the trial ensemble.

    All algorithms consume identical per-trial snapshot streams derived
    from (master seed, trial); output curves are trial averages in fixed
    trial order.
    """
    scenario = config.scenario
    if scenario.sigma2 <= 0:
        raise ConfigError("scenario.noise_var: experiments require positive noise power")
    seed = config.master_seed
    n, n_trials = config.n_snapshots, config.n_trials
    streams = [trial_snapshots(scenario, seed, t, n) for t in range(n_trials)]
    r_all = np.stack([s[0] for s in streams])
    d_all = np.stack([s[1] for s in streams])
    segments = _segments(scenario, n)

    result = ExperimentResult(config=config)
    for spec in config.algorithms:
        result.metrics[spec.csv_label] = _run_algorithm(spec, scenario, segments, r_all, d_all)
    return result


def optimal_sinr_db(scenario: Scenario, at_snapshot: int = 0) -> float:
    """SINR of the covariance-aware optimal beamformer."""
    a = soi_steering(scenario)
    w_opt, _ = optimal_full_rank(true_covariance(scenario, at_snapshot), a)
    rs = signal_covariance(scenario, at_snapshot)
    ri = interference_covariance(scenario, at_snapshot)
    return float(10.0 * np.log10(quad_form(w_opt, rs) / quad_form(w_opt, ri)))


def sweep_rank(config: ExperimentConfig, ranks: list[int]) -> list[tuple[str, int, float]]:
    """Final-snapshot ensemble SINR of each algorithm across ranks.

    Rank-dependent algorithms are rerun per rank; the rest run once and
    their value is replicated so every curve spans the sweep.
    """
    rows = []
    fixed = tuple(s for s in config.algorithms if not s.name.startswith("jio"))
    varying = tuple(s for s in config.algorithms if s.name.startswith("jio"))
    if fixed:
        res = run_experiment(replace(config, algorithms=fixed))
        for spec in fixed:
            final = float(res.metrics[spec.csv_label].sinr_db[-1])
            rows.extend((spec.csv_label, d, final) for d in ranks)
    for d in ranks:
        specs = tuple(replace(s, d=d, label=s.csv_label) for s in varying)
        if not specs:
            break
        res = run_experiment(replace(config, algorithms=specs))
        for spec in specs:
            rows.append((spec.csv_label, d, float(res.metrics[spec.csv_label].sinr_db[-1])))
    rows.sort(key=lambda t: (t[0], t[1]))
    return rows


def write_sweep_csv(rows: list[tuple[str, int, float]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "d", "sinr_db"])
        for label, d, val in rows:
            writer.writerow([label, d, f"{val:.12g}"])
    return path


# ---------------------------------------------------------------------------
# Plotting
# ---------------------------------------------------------------------------


def emit_plots(csv_path: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    """Render one vector-image line chart per metric found in the CSV.

    Run CSVs produce SINR-vs-snapshot and MSE-vs-snapshot charts;
    rank-sweep CSVs produce SINR-vs-rank.  An empty or malformed CSV
    raises before any file is created.
    """
    csv_path = Path(csv_path)
    with open(csv_path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{csv_path}: empty CSV, nothing to plot")
    out_dir = csv_path.parent if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    def by_algorithm(xkey, ykey):
        series = {}
        for row in rows:
            series.setdefault(row["algorithm"], []).append((float(row[xkey]), float(row[ykey])))
        return series

    def line_chart(series, xlabel, ylabel, fname, logy=False):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for name in sorted(series):
            pts = sorted(series[name])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        out = out_dir / fname
        fig.savefig(out)
        plt.close(fig)
        return out

    stem = csv_path.stem
    written = []
    if fields and "snapshot" in fields:
        written.append(line_chart(by_algorithm("snapshot", "sinr_db"),
                                  "snapshot", "SINR (dB)", f"{stem}_sinr_vs_snapshot.svg"))
        written.append(line_chart(by_algorithm("snapshot", "mse"),
                                  "snapshot", "MSE", f"{stem}_mse_vs_snapshot.svg", logy=True))
    elif fields and "d" in fields:
        written.append(line_chart(by_algorithm("d", "sinr_db"),
                                  "rank D", "SINR (dB)", f"{stem}_sinr_vs_rank.svg"))
    else:
        raise ConfigError(f"{csv_path}: unrecognized CSV header {fields}")
    return written


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_SPEC_KEYS = {"name", "d", "mu", "mu_s", "mu_w", "alpha", "delta", "delta_bar",
              "d_min", "d_max", "freeze_after", "label"}


def _spec_from_dict(cfg: dict, where: str) -> AlgorithmSpec:
    if "name" not in cfg:
        raise ConfigError(f"{where}.name: missing")
    unknown = set(cfg) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return AlgorithmSpec(**cfg)


def experiment_from_dict(cfg: dict) -> ExperimentConfig:
    if "scenario" not in cfg:
        raise ConfigError("scenario: missing")
    if "n_snapshots" not in cfg:
        raise ConfigError("n_snapshots: missing")
    algorithms = tuple(
        _spec_from_dict(s, f"algorithms[{i}]") for i, s in enumerate(cfg.get("algorithms", []))
    )
    return ExperimentConfig(
        scenario=scenario_from_dict(cfg["scenario"]),
        n_snapshots=int(cfg["n_snapshots"]),
        n_trials=int(cfg.get("n_trials", 200)),
        seed=cfg.get("seed"),
        algorithms=algorithms,
    )


def experiment_from_json(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return experiment_from_dict(json.load(fh))
