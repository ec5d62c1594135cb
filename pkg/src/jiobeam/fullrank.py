"""Full-rank LCMV beamformers.

Closed-form optimum plus two adaptive baselines that keep the unit gain
toward the SoI at every step: a projected stochastic-gradient update and
an inverse-covariance RLS recursion.  All step functions broadcast over
leading axes, so a stack of Monte Carlo trials advances in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._math import hermitize, inner, matvec, outer
from .errors import NumericalError
from .signal_model import Snapshot


@dataclass
class FullRankState:
    """Adaptive full-rank filter state.

    ``p`` is the inverse-covariance estimate and is only carried by the
    RLS variant; the SG variant leaves it ``None``.
    """

    w: np.ndarray
    p: np.ndarray | None = None
    mu: float = 0.0
    alpha: float = 1.0
    delta: float = 1.0


def optimal_full_rank(r_cov: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-output-power filter with unit gain along ``a``.

    Returns ``(w_opt, mv)`` where ``mv`` is the constrained minimum
    output power 1 / (a^H R^{-1} a).
    """
    try:
        x = np.linalg.solve(r_cov, a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"covariance is singular (cond={np.linalg.cond(r_cov):.3e})") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"covariance solve overflowed (cond={np.linalg.cond(r_cov):.3e})")
    den = inner(a, x)
    if den.real <= 0.0:
        raise NumericalError("a^H R^{-1} a is not positive; covariance is not positive definite")
    return x / den, float(1.0 / den.real)


def init_fullrank_sg(a: np.ndarray, mu: float, batch: tuple = ()) -> FullRankState:
    """Start the SG baseline at the first unit vector.

    Element 0 of a steering vector is exactly 1, so the unit-gain
    constraint already holds at this start.
    """
    m = a.shape[-1]
    w0 = np.zeros(m, dtype=complex)
    w0[0] = 1.0
    return FullRankState(w=np.broadcast_to(w0, batch + (m,)).astype(complex).copy(), mu=mu)


def init_fullrank_rls(a: np.ndarray, alpha: float, delta: float,
                      batch: tuple = ()) -> FullRankState:
    """Start the RLS baseline with P(0) = delta I (optionally batched)."""
    m = a.shape[-1]
    w0 = np.broadcast_to(a / inner(a, a).real, batch + (m,)).astype(complex).copy()
    p0 = np.broadcast_to(delta * np.eye(m), batch + (m, m)).astype(complex).copy()
    return FullRankState(w=w0, p=p0, alpha=alpha, delta=delta)


def _received(snapshot) -> np.ndarray:
    return snapshot.r if isinstance(snapshot, Snapshot) else np.asarray(snapshot)


def fullrank_sg_step(state: FullRankState, snapshot, a: np.ndarray) -> FullRankState:
    """One constrained-SG update; the gain toward ``a`` stays exactly 1."""
    r = _received(snapshot)
    w = state.w
    aa = inner(a, a).real
    x = inner(w, r)
    g = w - state.mu * np.conj(x)[..., None] * r
    w_new = g - a * (inner(a, g) / aa)[..., None] + a / aa
    return replace(state, w=w_new)


def rls_inverse_update(p: np.ndarray, r: np.ndarray, alpha: float
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Rank-one inverse-covariance update via the matrix inversion lemma.

    Returns the updated matrix before Hermitian symmetrization together
    with the gain vector.  Raises when the normalization term loses
    positivity, which cannot happen while ``p`` stays positive definite.
    """
    pr = matvec(p, r)
    den = 1.0 + inner(r, pr) / alpha
    if np.any(den.real <= 0.0):
        raise NumericalError("RLS gain denominator lost positivity; inverse update broke down")
    k = (pr / alpha) / den[..., None]
    # k (r^H p) with r^H p = (p r)^H for Hermitian p; avoids an O(M^3) product
    p_raw = (p - outer(k, pr)) / alpha
    return p_raw, k


def fullrank_rls_step(state: FullRankState, snapshot, a: np.ndarray) -> FullRankState:
    """One RLS update of P followed by the constrained filter refresh."""
    r = _received(snapshot)
    p_raw, _ = rls_inverse_update(state.p, r, state.alpha)
    p = hermitize(p_raw)
    pa = matvec(p, a)
    w = pa / inner(a, pa)[..., None]
    return replace(state, w=w, p=p)
