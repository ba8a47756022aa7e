"""Spherical-wave reflection coefficients q_n (TM) and p_n (TE).

Both polarizations come out of one kernel: with material pair
(c1, c2) = (eps1, eps2) for TM or (mu1, mu2) for TE,

    num_n = c1 [z2 j_n(z2)]' j_n(z1) - c2 [z1 j_n(z1)]' j_n(z2)
    den_n = c1 [z2 h_n(z2)]' j_n(z1) - c2 [z1 j_n(z1)]' h_n(z2)

and the coefficient is num/den.  The expression is evaluated as written,
with no algebraic re-normalization, so it stays valid for either sign of
eps and mu; the interior enters only through j_n(z1), which is even in z1,
making the branch of z1 irrelevant.

For lossless media at real size parameter the tables are exactly real and
h = j + i y splits the denominator as den = num + i*B with B the y-content;
|1 - 2 q_n| = 1 is then an algebraic identity, and the root finder in
:mod:`lhsphere.resonance` isolates modes on the real axis through B alone.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .core import Polarization, SphereSystem
from .specfun import h1n_array, jn_array, riccati_deriv_table

# |den| below this multiple of |num| flags a numerically resonant point.
_RESONANT_ABS = 1e3 * float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class MieCoefficient:
    """One reflection coefficient with its conditioning diagnostics.

    ``resonant`` marks a near-singular denominator (|den| < 1e3 eps |num|):
    the value is still returned, and ``den_abs`` lets callers tell a
    physically large coefficient from a numerical blow-up.
    """

    polarization: Polarization
    order: int
    value: complex
    den_abs: float
    resonant: bool


def _wave_args(sys: SphereSystem, x: complex) -> tuple[complex, complex]:
    """z1, z2 for a possibly complex size parameter (root-finder extension)."""
    x = complex(x)
    z1 = cmath.sqrt(sys.interior.epsilon * sys.interior.mu) * x
    z2 = cmath.sqrt(sys.exterior.epsilon * sys.exterior.mu) * x
    return z1, z2


def coefficient_tables(
    nmax: int, sys: SphereSystem, x: complex | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Numerators and denominators of q_n and p_n for n = 0..nmax.

    Returns ``(q_num, q_den, p_num, p_den)``, each indexed by order.  One
    set of Bessel tables serves both polarizations, which is what makes
    rate sweeps affordable.  Order 0 is filled but physically unused.

    Parameters
    ----------
    nmax : int
        Highest order to tabulate.
    sys : SphereSystem
        Media and (real) size parameter.
    x : complex, optional
        Override size parameter, may be complex; used by the resonance
        root finder.
    """
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    z1, z2 = _wave_args(sys, sys.size_parameter if x is None else x)
    j1 = jn_array(nmax, z1)
    j2 = jn_array(nmax, z2)
    h2 = h1n_array(nmax, z2)
    rj1 = riccati_deriv_table("j", j1, z1)
    rj2 = riccati_deriv_table("j", j2, z2)
    rh2 = riccati_deriv_table("h1", h2, z2)
    out = []
    for c1, c2 in (
        (sys.interior.epsilon, sys.exterior.epsilon),
        (sys.interior.mu, sys.exterior.mu),
    ):
        num = c1 * rj2 * j1 - c2 * rj1 * j2
        den = c1 * rh2 * j1 - c2 * rj1 * h2
        out.append(num)
        out.append(den)
    return out[0], out[1], out[2], out[3]


def _single(pol: Polarization, n: int, sys: SphereSystem, x: complex | None):
    if n < 1:
        raise ValueError("order n must be >= 1")
    q_num, q_den, p_num, p_den = coefficient_tables(n, sys, x)
    if pol is Polarization.TM:
        return complex(q_num[n]), complex(q_den[n])
    return complex(p_num[n]), complex(p_den[n])


def q_tm(n: int, sys: SphereSystem) -> complex:
    """TM reflection coefficient of order n."""
    num, den = _single(Polarization.TM, n, sys, None)
    return num / den


def p_te(n: int, sys: SphereSystem) -> complex:
    """TE reflection coefficient of order n (eps <-> mu of the TM one)."""
    num, den = _single(Polarization.TE, n, sys, None)
    return num / den


def reflection(pol: Polarization, n: int, sys: SphereSystem) -> MieCoefficient:
    """Reflection coefficient bundled with conditioning diagnostics."""
    num, den = _single(pol, n, sys, None)
    den_abs = abs(den)
    resonant = den_abs < _RESONANT_ABS * abs(num)
    if den == 0:
        value = complex("inf")
    else:
        value = num / den
    return MieCoefficient(pol, n, value, den_abs, resonant)


def denominator(
    pol: Polarization, n: int, sys: SphereSystem, x: complex | None = None
) -> complex:
    """Denominator of Eq.-(5)-type coefficients; its zeros are the modes.

    ``x`` may be complex (the root finder works in the complex size
    parameter at fixed materials).  For lossless media and real ``x`` the
    real part equals the numerator and the imaginary part is the
    y_n-content of the outgoing wave.
    """
    _, den = _single(pol, n, sys, x)
    return den


def den_split(pol: Polarization, n: int, sys: SphereSystem, x: float) -> tuple[float, float]:
    """Denominator of a lossless system at real x as the exact pair (A, B).

    Algebraically den = A + i*B with A identical to the numerator (pure
    j-function content) and B the y-function content.  A is taken from the
    numerator, not from Re(den): the upward Hankel recurrence contaminates
    the real part with eps*|y_n/j_n| relative noise, which is astronomical
    for n >> z, while the numerator comes from j-only tables and keeps
    machine accuracy.  B = Im(den) is exact for real x (the imaginary part
    of the Hankel recurrence is bitwise the y recurrence there).

    The high-Q root finder depends on this split; see
    :func:`lhsphere.resonance.find_root`.
    """
    if not sys.is_lossless:
        raise ValueError("den_split applies to lossless media only")
    # mixed-sign media give imaginary z1 and a complex numerator; the split
    # needs eps*mu > 0 on both sides so every table stays real
    if (sys.interior.epsilon * sys.interior.mu).real <= 0:
        raise ValueError("den_split needs eps1*mu1 > 0 (real wave argument)")
    if (sys.exterior.epsilon * sys.exterior.mu).real <= 0:
        raise ValueError("den_split needs eps2*mu2 > 0 (real wave argument)")
    x = float(x)
    if n < 1:
        raise ValueError("order n must be >= 1")
    q_num, q_den, p_num, p_den = coefficient_tables(n, sys, x)
    if pol is Polarization.TM:
        num, den = q_num[n], q_den[n]
    else:
        num, den = p_num[n], p_den[n]
    return float(num.real), float(den.imag)
