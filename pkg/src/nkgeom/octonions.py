"""Octonion multiplication and the associated 3-form on imaginary octonions."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _conj(x):
    out = -x.copy()
    out[0] = x[0]
    return out


def cd_multiply(x, y):
    """Cayley-Dickson product ``(a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[:h], x[h:]
    c, d = y[:h], y[h:]
    return np.concatenate(
        [cd_multiply(a, c) - cd_multiply(_conj(d), b), cd_multiply(d, a) + cd_multiply(b, _conj(c))]
    )


@lru_cache(maxsize=None)
def multiplication_table() -> np.ndarray:
    """``T[i, j] = e_i e_j`` as an 8-vector."""
    E = np.eye(8)
    return np.array([[cd_multiply(E[i], E[j]) for j in range(8)] for i in range(8)])


@lru_cache(maxsize=None)
def phi0() -> np.ndarray:
    """``phi0[a, b, c] = <e_a e_b, e_c>`` on the imaginary units ``e_1..e_7``."""
    T = multiplication_table()
    return np.ascontiguousarray(T[1:, 1:, 1:])


def cross(u, v):
    """Seven-dimensional cross product ``Im(u v)`` of imaginary octonions."""
    return np.einsum("abc,a,b->c", phi0(), u, v)
