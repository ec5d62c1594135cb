"""Small complex linear-algebra helpers, batched over leading axes."""

from __future__ import annotations

import numpy as np


def inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hermitian inner product x^H y over the last axis."""
    return np.einsum("...i,...i->...", np.conj(x), y)


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product over the last two axes."""
    return np.einsum("...ij,...j->...i", a, x)


def outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Outer product x y^H."""
    return x[..., :, None] * np.conj(y)[..., None, :]


def hermitize(a: np.ndarray) -> np.ndarray:
    """Nearest Hermitian matrix, (A + A^H) / 2."""
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def quad_form(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Real part of x^H A x."""
    return np.einsum("...i,...ij,...j->...", np.conj(x), a, x).real
