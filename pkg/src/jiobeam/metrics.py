"""Per-snapshot metrics and the arithmetic-operation cost table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._math import quad_form
from .errors import ConfigError, NumericalError


def sinr(w_bar: np.ndarray, s_d: np.ndarray | None, rs: np.ndarray,
         ri: np.ndarray) -> np.ndarray | float:
    """Output SINR in dB of the composite filter.

    ``rs`` is the SoI covariance and ``ri`` the interference-plus-noise
    covariance; full-rank callers pass ``s_d=None`` (identity
    projection).  Scale-invariant in the filter.
    """
    w = w_bar if s_d is None else np.einsum("...md,...d->...m", s_d, w_bar)
    num = quad_form(w, rs)
    den = quad_form(w, ri)
    if np.any(den <= 0.0):
        raise NumericalError("SINR undefined: interference-plus-noise output power is not positive")
    out = 10.0 * np.log10(num / den)
    return float(out) if np.ndim(out) == 0 else out


def mse_metric(d: np.ndarray | complex, x_bar: np.ndarray | complex) -> np.ndarray | float:
    """Squared error |d - x_bar|^2 of one snapshot's output."""
    out = np.abs(np.asarray(d) - np.asarray(x_bar)) ** 2
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ComplexityCount:
    """Exact additions/multiplications per snapshot for one algorithm."""

    algorithm: str
    additions: int
    multiplications: int


def complexity_counts(m: int, d: int) -> list[ComplexityCount]:
    """Evaluate the per-snapshot arithmetic cost polynomials exactly.

    Covers the full-rank SG/RLS baselines, the proposed SG/RLS pair, the
    multistage Wiener filter variants and the auxiliary-vector filter.
    """
    if m < 1:
        raise ConfigError(f"m: must be >= 1, got {m}")
    if not 1 <= d <= m:
        raise ConfigError(f"d: must satisfy 1 <= d <= m, got {d}")
    rows = [
        ("full-sg", 3 * m + 1, 3 * m + 2),
        ("full-rls", 3 * m**2 - 2 * m + 3, 6 * m**2 + 2 * m + 2),
        ("prop-sg", 3 * d * m + 2 * m + 2 * d - 2, 3 * d * m + m + 5 * d + 2),
        ("prop-rls", 3 * m**2 - 2 * m + 3 + 3 * d**2 - 8 * d + 3,
         7 * m**2 + 2 * m + 7 * d**2 + 9 * d),
        ("mswf-sg", d * m**2 - m**2 + 3 * d - 2, d * m**2 - m**2 + 2 * d * m + 4 * d + 1),
        ("mswf-rls", d * m**2 + m**2 + 6 * d**2 - 8 * d + 2,
         d * m**2 + m**2 + 2 * d * m + 3 * d + 2),
        ("avf", d * (m**2 + 3 * (m - 1) ** 2) - 1 + d * (5 * (m - 1) + 1) + 2 * m,
         d * (4 * m**2 + 4 * m + 1) + 4 * m + 2),
    ]
    return [ComplexityCount(name, int(add), int(mult)) for name, add, mult in rows]
