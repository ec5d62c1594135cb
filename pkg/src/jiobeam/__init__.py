"""Reduced-rank LCMV beamforming by joint iterative filter optimization."""

from .analysis import (MsePrediction, StabilityReport, check_stability,
                       minimum_mse, predict_mse, verify_lagrangian_embedding,
                       verify_mv_preservation)
from .errors import ConfigError, NumericalError
from .fullrank import (FullRankState, fullrank_rls_step, fullrank_sg_step,
                       init_fullrank_rls, init_fullrank_sg, optimal_full_rank)
from .harness import (AlgorithmSpec, ExperimentConfig, ExperimentResult,
                      emit_plots, experiment_from_json, optimal_sinr_db,
                      run_experiment, sweep_rank)
from .jio import (JioState, effective_filter, init_jio_rls, init_jio_sg,
                  jio_output, jio_rls_step, jio_sg_step, reduce, reduced_mv)
from .metrics import ComplexityCount, complexity_counts, mse_metric, sinr
from .rank_adapt import (RankAdaptState, extract_subfilters, init_rank_adapt_rls,
                         init_rank_adapt_sg, rank_adapt_step, rank_cost_update,
                         select_rank)
from .signal_model import (ChangeEvent, Scenario, Snapshot, Source, TrialStream,
                           generate_snapshot, interference_covariance,
                           scenario_from_dict, scenario_from_json,
                           signal_covariance, soi_steering, steering_vector,
                           trial_snapshots, true_covariance)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
