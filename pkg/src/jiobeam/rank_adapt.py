"""Automatic rank selection for the joint iterative scheme.

Adaptation always runs at the maximum allowed rank; candidate ranks are
scored through read-only leading-slice views of the extended filters
using an exponentially weighted output-power cost, and the operating
rank is the minimizer (ties go to the smaller rank).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .fullrank import _received
from .jio import JioState, init_jio_rls, init_jio_sg, jio_rls_step, jio_sg_step, reduce


@dataclass
class RankAdaptState:
    """Extended-rank adaptive state plus per-rank cost accumulators.

    ``core`` is a plain joint-scheme state of rank ``d_max``; ``costs``
    holds one accumulator per candidate rank d_min..d_max.  ``d_current``
    is an integer array broadcast like the batch axes of ``core``.
    """

    core: JioState
    d_min: int
    d_max: int
    alpha: float
    costs: np.ndarray
    d_current: np.ndarray
    freeze_after: int | None = None

    @property
    def candidate_ranks(self) -> np.ndarray:
        return np.arange(self.d_min, self.d_max + 1)


def _check_range(d_min: int, d_max: int, m: int) -> None:
    if not 1 <= d_min <= d_max <= m:
        raise ConfigError(f"rank range: need 1 <= d_min <= d_max <= m, got [{d_min}, {d_max}], m={m}")


def init_rank_adapt_sg(a: np.ndarray, mu_s: float, mu_w: float, d_min: int = 3,
                       d_max: int = 8, alpha: float = 0.998,
                       freeze_after: int | None = None, batch: tuple = ()) -> RankAdaptState:
    _check_range(d_min, d_max, a.shape[-1])
    core = init_jio_sg(a, d_max, mu_s, mu_w, batch=batch)
    return RankAdaptState(core=core, d_min=d_min, d_max=d_max, alpha=alpha,
                          costs=np.zeros(batch + (d_max - d_min + 1,)),
                          d_current=np.full(batch, d_min, dtype=int),
                          freeze_after=freeze_after)


def init_rank_adapt_rls(a: np.ndarray, alpha: float, delta: float, delta_bar: float,
                        d_min: int = 3, d_max: int = 8,
                        freeze_after: int | None = None, batch: tuple = ()) -> RankAdaptState:
    _check_range(d_min, d_max, a.shape[-1])
    core = init_jio_rls(a, d_max, alpha, delta, delta_bar, batch=batch)
    return RankAdaptState(core=core, d_min=d_min, d_max=d_max, alpha=alpha,
                          costs=np.zeros(batch + (d_max - d_min + 1,)),
                          d_current=np.full(batch, d_min, dtype=int),
                          freeze_after=freeze_after)


def rank_cost_update(state: RankAdaptState, snapshot) -> RankAdaptState:
    """Fold one snapshot into every candidate rank's weighted output power.

    Rank d's output is the cumulative sum of the first d terms of
    conj(w) * (S^H r), so all candidates cost one pass.
    """
    r = _received(snapshot)
    r_bar = reduce(state.core.s, r)
    y = np.cumsum(np.conj(state.core.w_bar) * r_bar, axis=-1)
    powers = np.abs(y[..., state.d_min - 1:state.d_max]) ** 2
    return replace(state, costs=state.alpha * state.costs + powers)


def select_rank(state: RankAdaptState) -> np.ndarray:
    """Rank minimizing the accumulated cost; ties break toward smaller d."""
    return state.d_min + np.argmin(state.costs, axis=-1)


def extract_subfilters(state: RankAdaptState, d: int) -> dict:
    """Read-only leading-slice views of the rank-``d`` sub-filter."""
    if not state.d_min <= d <= state.d_max:
        raise ConfigError(f"d: must lie in [{state.d_min}, {state.d_max}], got {d}")
    core = state.core
    return {
        "s": core.s[..., :, :d],
        "w_bar": core.w_bar[..., :d],
        "a_bar": core.a_bar[..., :d],
        "p_bar": None if core.p_bar is None else core.p_bar[..., :d, :d],
    }


def rank_adapt_step(state: RankAdaptState, snapshot, a: np.ndarray,
                    index: int, variant: str) -> RankAdaptState:
    """Cost update with the pre-update filters, rank re-selection, then the
    rank-``d_max`` adaptation step.

    Re-selection stops after ``freeze_after`` snapshots when configured.
    """
    state = rank_cost_update(state, snapshot)
    if state.freeze_after is None or index <= state.freeze_after:
        state = replace(state, d_current=select_rank(state))
    if variant == "sg":
        core = jio_sg_step(state.core, snapshot, a)
    elif variant == "rls":
        core = jio_rls_step(state.core, snapshot, a)
    else:
        raise ConfigError(f"variant: expected 'sg' or 'rls', got {variant!r}")
    return replace(state, core=core)


def selected_outputs(state: RankAdaptState, r: np.ndarray) -> np.ndarray:
    """Output of each trial's currently selected sub-rank filter."""
    r_bar = reduce(state.core.s, r)
    y = np.cumsum(np.conj(state.core.w_bar) * r_bar, axis=-1)
    d = np.broadcast_to(state.d_current, y.shape[:-1])
    return np.take_along_axis(y, d[..., None] - 1, axis=-1)[..., 0]


def selected_filters(state: RankAdaptState) -> np.ndarray:
    """Composite full-length filter of each trial's selected sub-rank."""
    core = state.core
    d = np.broadcast_to(state.d_current, core.w_bar.shape[:-1])
    mask = np.arange(state.d_max) < d[..., None]
    w_masked = np.where(mask, core.w_bar, 0.0)
    return np.einsum("...md,...d->...m", core.s, w_masked)
