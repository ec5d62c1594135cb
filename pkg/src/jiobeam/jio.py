"""Joint iterative optimization of a projection matrix and a reduced-rank filter.

The scheme splits beamforming between an M x D projection matrix whose
columns act as a bank of full-rank filters and a D x 1 filter operating
on the projected data; both are adapted jointly under the unit-gain
constraint w_bar^H (S_D^H a) = 1.  SG and RLS variants are provided.

Standard initialization: S_D(0) stacks I_D over zeros and w_bar(0) is
the first unit vector, which satisfies the constraint because element 0
of any steering vector is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._math import hermitize, inner, matvec, outer
from .errors import ConfigError, NumericalError
from .fullrank import _received, rls_inverse_update


@dataclass
class JioState:
    """State of the joint scheme.

    ``p`` (M x M) and ``p_bar`` (D x D) are the full and reduced
    inverse-covariance estimates and are carried only by the RLS
    variant.
    """

    s: np.ndarray
    w_bar: np.ndarray
    a_bar: np.ndarray
    p: np.ndarray | None = None
    p_bar: np.ndarray | None = None
    mu_s: float = 0.0
    mu_w: float = 0.0
    alpha: float = 1.0
    delta: float = 1.0
    delta_bar: float = 1.0

    @property
    def rank(self) -> int:
        return self.s.shape[-1]


def initial_projection(m: int, d: int) -> np.ndarray:
    """The standard starting projection matrix, I_D stacked over zeros."""
    if not 1 <= d <= m:
        raise ConfigError(f"d: rank must satisfy 1 <= d <= m, got d={d}, m={m}")
    s0 = np.zeros((m, d), dtype=complex)
    s0[:d, :d] = np.eye(d)
    return s0


def _check_projection(s: np.ndarray) -> None:
    if not np.any(s):
        raise ConfigError("projection matrix must not be all zero; it would null the output")


def _broadcast(arr: np.ndarray, batch: tuple) -> np.ndarray:
    return np.broadcast_to(arr, batch + arr.shape).astype(complex).copy()


def init_jio_sg(a: np.ndarray, d: int, mu_s: float, mu_w: float,
                s0: np.ndarray | None = None, batch: tuple = ()) -> JioState:
    """SG-variant state at the standard initialization (optionally batched)."""
    m = a.shape[-1]
    s = initial_projection(m, d) if s0 is None else np.asarray(s0, dtype=complex)
    _check_projection(s)
    w0 = np.zeros(d, dtype=complex)
    w0[0] = 1.0
    a_bar = np.conj(s).T @ a
    return JioState(s=_broadcast(s, batch), w_bar=_broadcast(w0, batch),
                    a_bar=_broadcast(a_bar, batch), mu_s=mu_s, mu_w=mu_w)


def init_jio_rls(a: np.ndarray, d: int, alpha: float, delta: float,
                 delta_bar: float, s0: np.ndarray | None = None,
                 batch: tuple = ()) -> JioState:
    """RLS-variant state with P(0) = delta I and P_bar(0) = delta_bar I."""
    m = a.shape[-1]
    s = initial_projection(m, d) if s0 is None else np.asarray(s0, dtype=complex)
    _check_projection(s)
    w0 = np.zeros(d, dtype=complex)
    w0[0] = 1.0
    a_bar = np.conj(s).T @ a
    p0 = delta * np.eye(m)
    pb0 = delta_bar * np.eye(d)
    return JioState(s=_broadcast(s, batch), w_bar=_broadcast(w0, batch),
                    a_bar=_broadcast(a_bar, batch), p=_broadcast(p0, batch),
                    p_bar=_broadcast(pb0, batch), alpha=alpha,
                    delta=delta, delta_bar=delta_bar)


def reduce(s: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Project the received vector: r_bar = S_D^H r."""
    if s.shape[-2] != r.shape[-1]:
        raise ConfigError(f"shape mismatch: projection rows {s.shape[-2]} vs vector length {r.shape[-1]}")
    return np.einsum("...md,...m->...d", np.conj(s), r)


def jio_output(state: JioState, r: np.ndarray) -> np.ndarray:
    """Scalar output x_bar = w_bar^H S_D^H r."""
    return inner(state.w_bar, reduce(state.s, r))


def jio_sg_step(state: JioState, snapshot, a: np.ndarray) -> JioState:
    """One joint SG update.

    Both corrections are computed from the pre-update state and share
    the same output sample.  The projection-matrix correction lies in
    the orthogonal complement of ``a``, so a^H S_D is invariant; the
    reduced-rank correction is orthogonal to a_bar, so the constraint
    is preserved exactly.
    """
    r = _received(snapshot)
    s, w_bar, a_bar = state.s, state.w_bar, state.a_bar
    r_bar = reduce(s, r)
    xc = np.conj(inner(w_bar, r_bar))
    aa = inner(a, a).real
    r_perp = r - a * (inner(a, r) / aa)[..., None]
    s_new = s - state.mu_s * xc[..., None, None] * outer(r_perp, w_bar)
    rb_perp = r_bar - a_bar * (inner(a_bar, r_bar) / inner(a_bar, a_bar))[..., None]
    w_new = w_bar - state.mu_w * xc[..., None] * rb_perp
    a_bar_new = reduce(s_new, a)
    return replace(state, s=s_new, w_bar=w_new, a_bar=a_bar_new)


def jio_rls_step(state: JioState, snapshot, a: np.ndarray) -> JioState:
    """One joint RLS update.

    Order: inverse covariance P, then the projection matrix from P and
    the previous reduced steering vector, then the projected data, the
    reduced inverse covariance P_bar, and finally the reduced filter.
    By construction S_D^H a reproduces the reduced steering vector and
    the refreshed filter satisfies the constraint exactly.
    """
    r = _received(snapshot)
    p_raw, _ = rls_inverse_update(state.p, r, state.alpha)
    p = hermitize(p_raw)
    pa = matvec(p, a)
    s_new = outer(pa, state.a_bar) / inner(a, pa)[..., None, None]
    r_bar = reduce(s_new, r)
    pb_raw, _ = rls_inverse_update(state.p_bar, r_bar, state.alpha)
    p_bar = hermitize(pb_raw)
    a_bar = reduce(s_new, a)
    wb = matvec(p_bar, a_bar)
    w_new = wb / inner(a_bar, wb)[..., None]
    return replace(state, s=s_new, w_bar=w_new, a_bar=a_bar, p=p, p_bar=p_bar)


def effective_filter(state: JioState) -> np.ndarray:
    """Full-length composite filter S_D w_bar."""
    return np.einsum("...md,...d->...m", state.s, state.w_bar)


def reduced_mv(s: np.ndarray, r_cov: np.ndarray, a: np.ndarray) -> float:
    """Constrained minimum output power achievable inside the column span of ``s``.

    Equals 1 / (a^H S_D (S_D^H R S_D)^{-1} S_D^H a); never below the
    full-rank minimum, with equality iff the optimal filter lies in the
    span.
    """
    a_bar = reduce(s, a)
    r_bar = np.conj(s).T @ r_cov @ s
    if np.linalg.cond(r_bar) > 1e12:
        raise NumericalError("projected covariance is singular; projection matrix is rank deficient")
    x = np.linalg.solve(r_bar, a_bar)
    den = inner(a_bar, x).real
    if den <= 0.0:
        raise NumericalError("projected covariance lost positive definiteness")
    return float(1.0 / den)
