"""Stability, mean-squared-error prediction, and algebraic verifiers.

The SG stability check linearizes the joint error propagation around a
supplied state, replaces instantaneous outer products by their
expectations, and examines the spectral radius of the resulting block
operator restricted to the constraint-compatible subspace.  The MSE
predictor propagates the second moment of the composite weight error
through the linearized recursion, with the expectation terms estimated
by a Monte Carlo ensemble of actual adaptation runs; the trajectory then
follows from the error covariance and the eigenstructure of the true
snapshot covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._math import hermitize, inner, matvec, quad_form
from .errors import NumericalError
from .fullrank import optimal_full_rank
from .jio import JioState, effective_filter, init_jio_sg, jio_sg_step, reduce, reduced_mv
from .signal_model import Scenario, soi_steering, trial_snapshots, true_covariance

_TOL = 1e-9


@dataclass(frozen=True)
class StabilityReport:
    """Spectral-radius classification of one step-size pair."""

    spectral_radius: float
    stable: str
    mu_s: float
    mu_w: float


@dataclass(frozen=True)
class MsePrediction:
    """Semi-analytical MSE prediction output."""

    eps_min: float
    xi_min: float
    trajectory: np.ndarray
    r_ew: np.ndarray
    phi: np.ndarray
    lam: np.ndarray


def _perp_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``v``."""
    m = v.shape[0]
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(m)]))
    return q[:, 1:]


def check_stability(scenario: Scenario, mu_s: float, mu_w: float,
                    state: JioState | None = None, d: int = 4,
                    tol: float = _TOL) -> StabilityReport:
    """Classify a step-size pair for the joint SG recursions.

    Builds the expectation-linearized error-propagation operator at
    ``state`` (default: the standard initialization at rank ``d``),
    restricted to errors compatible with the constraint (projection
    error columns orthogonal to the steering vector, filter error
    orthogonal to the reduced steering vector), and reports the largest
    eigenvalue magnitude of P^H P.  Zero step sizes give exactly 1.

    Joint parameterizations are redundant: error directions with
    e_S w_bar + S_D e_w = 0 leave the composite filter unchanged and
    the operator is exactly neutral along them, so the radius is taken
    on the complement of that kernel (the kernel is invariant, making
    the compressed dynamics exact, not an approximation).
    """
    a = soi_steering(scenario)
    if state is None:
        state = init_jio_sg(a, d, mu_s, mu_w)
    s, w_bar = state.s, state.w_bar
    m, rank = s.shape
    r_cov = true_covariance(scenario)
    a_bar = np.conj(s).T @ a
    pi_a = np.eye(m) - np.outer(a, a.conj()) / inner(a, a).real
    pi_ab = np.eye(rank) - np.outer(a_bar, a_bar.conj()) / inner(a_bar, a_bar).real
    r_red = np.conj(s).T @ r_cov @ s

    n = m * rank + rank
    delta = np.zeros((n, n), dtype=complex)
    delta[:m * rank, :m * rank] = -mu_s * np.kron(np.eye(rank), pi_a @ r_cov)
    delta[:m * rank, m * rank:] = -mu_s * np.kron(np.conj(w_bar)[:, None], pi_a @ r_cov @ s)
    delta[m * rank:, :m * rank] = -mu_w * np.kron(w_bar[None, :], pi_ab @ np.conj(s).T @ r_cov)
    delta[m * rank:, m * rank:] = -mu_w * (pi_ab @ r_red)

    u_a = np.kron(np.eye(rank), _perp_basis(a))
    u_ab = _perp_basis(a_bar)
    basis = np.zeros((n, u_a.shape[1] + u_ab.shape[1]), dtype=complex)
    basis[:m * rank, :u_a.shape[1]] = u_a
    basis[m * rank:, u_a.shape[1]:] = u_ab

    delta_r = np.conj(basis).T @ delta @ basis
    if mu_s == 0.0 and mu_w == 0.0:
        radius = 1.0
    else:
        _, sv, vh = np.linalg.svd(delta_r)
        keep = sv > sv[0] * 1e-10 if sv[0] > 0 else np.zeros_like(sv, dtype=bool)
        if not np.any(keep):
            radius = 1.0
        else:
            w_basis = np.conj(vh[keep]).T
            p_obs = np.conj(w_basis).T @ (w_basis + delta_r @ w_basis)
            radius = float(np.linalg.eigvalsh(np.conj(p_obs).T @ p_obs)[-1])
    if radius < 1.0 - tol:
        label = "stable"
    elif radius > 1.0 + tol:
        label = "unstable"
    else:
        label = "marginal"
    return StabilityReport(spectral_radius=radius, stable=label, mu_s=mu_s, mu_w=mu_w)


def minimum_mse(scenario: Scenario) -> tuple[float, float, np.ndarray]:
    """Closed-form floor of |d - w^H r|^2 at the optimal filter.

    Returns ``(eps_min, xi_min, w_opt)`` using the nominal-power
    covariance; the SoI passes with unit gain, so the floor is the
    residual interference-plus-noise power.
    """
    r_cov = true_covariance(scenario)
    a = soi_steering(scenario)
    w_opt, xi_min = optimal_full_rank(r_cov, a)
    p_soi = scenario.soi.power
    eps_min = p_soi - 2.0 * p_soi * float(inner(w_opt, a).real) + float(quad_form(w_opt, r_cov))
    return eps_min, xi_min, w_opt


def _psd_clip(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitize(mat))
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ np.conj(vecs).T


def predict_mse(scenario: Scenario, mu_s: float, mu_w: float, steps: int,
                ensemble_size: int = 200, d: int = 4,
                seed: int | None = None,
                initial_state: JioState | None = None) -> MsePrediction:
    """Semi-analytical MSE trajectory of the joint SG algorithm.

    The composite-weight-error covariance is propagated through the
    linearized update, whose random coefficients are estimated at every
    step as ensemble averages over ``ensemble_size`` adaptation runs;
    the MSE follows as eps_min + tr(R R_ew).  Requires a stationary
    scenario and a positive definite covariance.  ``initial_state``
    (unbatched) overrides the standard start.
    """
    if scenario.change_events:
        raise NumericalError("predict_mse requires a stationary scenario")
    r_cov = true_covariance(scenario)
    lam, phi = np.linalg.eigh(r_cov)
    if lam[0] <= 0.0:
        raise NumericalError("covariance is not positive definite")
    eps_min, xi_min, w_opt = minimum_mse(scenario)
    a = soi_steering(scenario)
    aa = inner(a, a).real
    if seed is None:
        seed = scenario.seed

    n_e = ensemble_size
    if initial_state is None:
        state = init_jio_sg(a, d, mu_s, mu_w, batch=(n_e,))
    else:
        state = JioState(
            s=np.broadcast_to(initial_state.s, (n_e,) + initial_state.s.shape).copy(),
            w_bar=np.broadcast_to(initial_state.w_bar, (n_e,) + initial_state.w_bar.shape).copy(),
            a_bar=np.broadcast_to(initial_state.a_bar, (n_e,) + initial_state.a_bar.shape).copy(),
            mu_s=mu_s, mu_w=mu_w)
    r_all = np.stack([trial_snapshots(scenario, seed, t, steps)[0] for t in range(n_e)])

    e_w0 = effective_filter(JioState(s=state.s[0], w_bar=state.w_bar[0],
                                     a_bar=state.a_bar[0])) - w_opt
    r_ew = np.outer(e_w0, e_w0.conj())
    musw = mu_s * mu_w
    traj = np.empty(steps)
    for i in range(steps):
        r = r_all[:, i, :]
        r_bar = reduce(state.s, r)
        x = inner(state.w_bar, r_bar)
        r_perp = r - a * (inner(a, r) / aa)[:, None]
        ww = inner(state.w_bar, state.w_bar).real
        rb_perp = r_bar - state.a_bar * (
            inner(state.a_bar, r_bar) / inner(state.a_bar, state.a_bar))[:, None]
        s_rbp = np.einsum("emd,ed->em", state.s, rb_perp)
        u = mu_w * s_rbp + mu_s * ww[:, None] * r_perp
        c = inner(r, w_opt)
        v1 = -c[:, None] * u
        v2 = inner(state.w_bar, rb_perp)[:, None] * r_perp

        # (I - u r^H) R (I - u r^H)^H averaged over the ensemble
        r_row = np.einsum("em,mn->en", np.conj(r), r_ew)
        cross = np.einsum("em,en->mn", u, r_row) / n_e
        quad = np.einsum("en,en->e", r_row, r)
        t1 = r_ew - cross - np.conj(cross).T + np.einsum("e,em,en->mn", quad, u, np.conj(u)) / n_e
        t2 = np.einsum("em,en->mn", v1, np.conj(v1)) / n_e
        t3 = musw * np.einsum("e,em,en->mn", x**2, v1, np.conj(v2)) / n_e
        t5 = musw**2 * np.einsum("e,em,en->mn", np.abs(x)**4, v2, np.conj(v2)) / n_e
        r_ew = _psd_clip(t1 + t2 + t3 + np.conj(t3).T + t5)
        traj[i] = eps_min + float(np.einsum("ij,ji->", r_cov, r_ew).real)
        state = jio_sg_step(state, r, a)

    return MsePrediction(eps_min=eps_min, xi_min=xi_min, trajectory=traj,
                         r_ew=r_ew, phi=phi, lam=lam)


def embedding_operators(s: np.ndarray, w_bar: np.ndarray, r: np.ndarray,
                        a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint parameter vector and the two D(M+1)-square quadratic forms.

    ``f`` stacks the conjugate reduced filter over the column-stacked
    projection matrix; the returned operators carry block-diagonal
    copies of ``r`` and ``a`` in their lower-left blocks.
    """
    m, rank = s.shape
    f = np.concatenate([np.conj(w_bar), np.reshape(s, m * rank, order="F")])
    dim = rank * (m + 1)
    g = np.zeros((dim, dim), dtype=complex)
    g[rank:, :rank] = np.kron(np.eye(rank), r[:, None])
    a_mat = np.zeros((dim, dim), dtype=complex)
    a_mat[rank:, :rank] = np.kron(np.eye(rank), a[:, None])
    return f, g, a_mat


def verify_lagrangian_embedding(state: JioState, r: np.ndarray,
                                a: np.ndarray) -> dict:
    """Check the quadratic-form embedding of the output and the constraint.

    Stacks the conjugate reduced filter and the projection-matrix
    columns into one vector f of length D(M+1) and verifies
    f^H G f = w_bar^H S_D^H r and f^H A f = w_bar^H S_D^H a against the
    direct expressions, to 1e-12.
    """
    s, w_bar = state.s, state.w_bar
    f, g, a_mat = embedding_operators(s, w_bar, r, a)
    x_direct = inner(w_bar, reduce(s, r))
    c_direct = inner(w_bar, reduce(s, a))
    x_emb = inner(f, matvec(g, f))
    c_emb = inner(f, matvec(a_mat, f))
    x_match = bool(abs(x_emb - x_direct) <= 1e-12 * max(1.0, abs(x_direct)))
    c_match = bool(abs(c_emb - c_direct) <= 1e-12 * max(1.0, abs(c_direct)))
    return {"x_match": x_match, "c_match": c_match}


def verify_mv_preservation(s: np.ndarray, r_cov: np.ndarray,
                           a: np.ndarray) -> dict:
    """Compare the span-constrained minimum variance with the full-rank one.

    ``gap`` is their difference (never meaningfully negative); the
    optimum is preserved exactly when the full-rank optimal filter lies
    in the column span of ``s``.
    """
    _, mv_full = optimal_full_rank(r_cov, a)
    gap = reduced_mv(s, r_cov, a) - mv_full
    return {"preserved": bool(gap <= 1e-8 * mv_full), "gap": float(gap)}
