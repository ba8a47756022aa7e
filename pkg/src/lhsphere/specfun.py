"""Spherical Bessel functions and Riccati-Bessel derivatives.

Thin public layer over the recurrence kernels in :mod:`lhsphere.backend`.
Everything here accepts complex arguments; the Riccati derivative
``[z f_n(z)]'`` is evaluated through the shift identity

    [z f_n(z)]' = z f_{n-1}(z) - n f_n(z)

which holds for n >= 0 once ``f_{-1}`` is taken from the same family
(cos z / z, sin z / z and exp(iz)/z for j, y and h1 respectively).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .backend import h1n_array, jn_array, yn_array

__all__ = [
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel1",
    "riccati_deriv",
    "riccati_deriv_table",
    "log_double_factorial",
    "jn_array",
    "yn_array",
    "h1n_array",
]

_LN2 = math.log(2.0)


def sph_bessel_j(n: int, z: complex) -> complex:
    """Spherical Bessel function of the first kind, single order.

    Parameters
    ----------
    n : int
        Order, n >= 0.
    z : complex
        Argument; z = 0 is allowed (j_0(0) = 1, j_n(0) = 0 for n > 0).
    """
    return complex(jn_array(n, z)[n])


def sph_bessel_y(n: int, z: complex) -> complex:
    """Spherical Bessel function of the second kind, single order."""
    return complex(yn_array(n, z)[n])


def sph_hankel1(n: int, z: complex) -> complex:
    """Spherical Hankel function of the first kind, single order."""
    return complex(h1n_array(n, z)[n])


def _f_minus_one(kind: str, z: complex) -> complex:
    if kind == "j":
        return cmath.cos(z) / z
    if kind == "y":
        return cmath.sin(z) / z
    if kind == "h1":
        return cmath.exp(1j * z) / z
    raise ValueError(f"kind must be 'j', 'y' or 'h1', got {kind!r}")


def riccati_deriv_table(kind: str, table: np.ndarray, z: complex) -> np.ndarray:
    """Derivatives ``[z f_n(z)]'`` for all orders of a precomputed table.

    Parameters
    ----------
    kind : {'j', 'y', 'h1'}
        Family the table belongs to.
    table : ndarray
        ``f_n(z)`` for n = 0..nmax, as returned by the ``*_array`` kernels.
    z : complex
        The argument the table was built at; must be nonzero.

    Returns
    -------
    ndarray
        ``[z f_n(z)]'`` for the same orders.
    """
    z = complex(z)
    if z == 0:
        raise ValueError("Riccati derivative identity needs z != 0")
    table = np.asarray(table, dtype=np.complex128)
    shifted = np.empty_like(table)
    shifted[0] = _f_minus_one(kind, z)
    shifted[1:] = table[:-1]
    return z * shifted - np.arange(table.size) * table


def riccati_deriv(kind: str, n: int, z: complex) -> complex:
    """Single-order ``[z f_n(z)]'`` with f in {j, y, h1}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    z = complex(z)
    if z == 0:
        raise ValueError("Riccati derivative identity needs z != 0")
    if kind == "j":
        table = jn_array(n, z)
    elif kind == "y":
        table = yn_array(n, z)
    elif kind == "h1":
        table = h1n_array(n, z)
    else:
        raise ValueError(f"kind must be 'j', 'y' or 'h1', got {kind!r}")
    fm1 = _f_minus_one(kind, z) if n == 0 else table[n - 1]
    return complex(z * fm1 - n * table[n])


def log_double_factorial(m: int) -> float:
    """Natural log of the double factorial m!! for integer m >= -1.

    Uses lgamma, so it stays finite far beyond where m!! itself overflows.
    (-1)!! and 0!! are the empty product, 1.
    """
    if m < -1:
        raise ValueError("double factorial defined here for m >= -1")
    if m <= 0:
        return 0.0
    if m % 2 == 0:
        k = m // 2
        return math.lgamma(k + 1) + k * _LN2
    k = (m + 1) // 2
    return math.lgamma(2 * k + 1) - k * _LN2 - math.lgamma(k + 1)
