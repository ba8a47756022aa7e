"""Pure-Python spherical Bessel/Hankel recurrence kernels.

Reference implementation of the backend API; the compiled twin in
``_bessel_cy`` runs the identical algorithms.  All functions return numpy
complex128 arrays holding orders ``0..nmax`` at a single complex argument.

Algorithm notes
---------------
* ``j_n``: upward recurrence from the closed forms when ``nmax <= |z|``
  (pre-turning-point regime, stable); otherwise Miller's downward recurrence
  normalized against the closed-form ``j_0``/``j_1``, with the starting order
  doubled until the result stabilizes to 1e-12.
* Arguments in the lower half-plane are reflected to the upper half-plane
  and conjugated back (Schwarz symmetry; all three families have real
  Laurent coefficients, and h1(z) = conj(h2(conj z))).  Reason: upward
  recurrence through the oscillatory region injects recessive-solution
  noise of relative size eps*exp(2|Im z|) that regrows past n ~ |z|, and
  the safe direction exists only on one side of the real axis.
* ``h_n^(1)``: upward from ``h_0 = -i exp(iz)/z`` (never as j + i*y, which
  cancels off the real axis).  For Im z >= 0 the h2 admixture is damped by
  exp(-2 Im z), so upward is uniformly stable there.
* ``y_n``: upward from its closed forms while exp(2 Im z) stays below the
  accuracy budget; beyond that, y = -i*(h1 - j), which cannot cancel since
  |y| >= |j| - |h1| >= |j|*(1 - exp(-2 Im z)) in that regime.
* Overflow saturates to an exception, never to a silent Inf.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import AccuracyLossError, SaturationError

# Rescale threshold for the unnormalized downward recurrence.
_BIG = 1e250
_SMALL = 1e-250
_STAB_TOL = 1e-12
_MAX_START = 1 << 20
# Switch y_n to the h1 - j form once exp(2 Im z) exceeds 1e3.
_Y_UPWARD_IMAG = 0.5 * math.log(1e3)


def _j01(z: complex) -> tuple[complex, complex]:
    sz = cmath.sin(z)
    cz = cmath.cos(z)
    return sz / z, sz / (z * z) - cz / z


def _upward(nmax: int, z: complex, f0: complex, f1: complex) -> np.ndarray:
    out = np.empty(nmax + 1, dtype=np.complex128)
    out[0] = f0
    out[1] = f1
    fm, f = f0, f1
    for n in range(1, nmax):
        fp = (2 * n + 1) / z * f - fm
        out[n + 1] = fp
        fm, f = f, fp
    return out


def _miller_pass(nmax: int, z: complex, start: int) -> np.ndarray:
    """One downward pass from ``start``; returns the normalized j array."""
    out = np.empty(nmax + 1, dtype=np.complex128)
    fp = 0.0 + 0.0j  # f at order k+1
    f = 1.0 + 0.0j  # f at order k
    for k in range(start, 0, -1):
        fm = (2 * k + 1) / z * f - fp
        fp, f = f, fm  # window now at order k-1
        if k - 1 <= nmax:
            out[k - 1] = f
        if abs(f.real) + abs(f.imag) > _BIG:
            f *= _SMALL
            fp *= _SMALL
            out[k - 1 :] *= _SMALL  # rescale already-stored orders
    j0c, j1c = _j01(z)
    # Normalize against whichever closed form is farther from a zero of j.
    if abs(j0c) >= abs(j1c) or nmax < 1:
        ref, refc = out[0], j0c
    else:
        ref, refc = out[1], j1c
    if ref == 0 or not (math.isfinite(ref.real) and math.isfinite(ref.imag)):
        raise AccuracyLossError("downward recurrence reference underflowed")
    out *= refc / ref
    if not np.all(np.isfinite(out)):
        raise AccuracyLossError("normalization chain under/overflowed")
    return out


def _jn_upper(nmax: int, z: complex) -> np.ndarray:
    """j_n table for Im z >= 0 (branch selection, no reflection)."""
    j0, j1 = _j01(z)
    if nmax == 0:
        return np.array([j0], dtype=np.complex128)
    az = abs(z)
    if nmax <= az:
        out = _upward(nmax, z, j0, j1)
        if not np.all(np.isfinite(out)):
            raise SaturationError("j_n overflowed floating range")
        return out
    start = nmax + max(15, math.ceil(az))
    prev = _miller_pass(nmax, z, start)
    while True:
        start *= 2
        if start > _MAX_START:
            raise AccuracyLossError("downward recurrence failed to stabilize")
        cur = _miller_pass(nmax, z, start)
        ref = np.maximum(np.abs(cur), np.abs(prev))
        # Entries landing near a zero of j_n cannot agree to relative
        # tolerance (their absolute error is eps * envelope from the
        # recurrence arithmetic itself); judge those against the table
        # envelope, which is what bounds the smooth truncation error.
        env = float(np.max(ref))
        if np.all(np.abs(cur - prev) <= _STAB_TOL * np.maximum(ref, env * 1e-2)):
            return cur
        prev = cur


def _h1n_upper(nmax: int, z: complex) -> np.ndarray:
    """h^(1)_n table for Im z >= 0, upward recurrence."""
    e = cmath.exp(1j * z)
    h0 = -1j * e / z
    if nmax == 0:
        out = np.array([h0], dtype=np.complex128)
    else:
        out = _upward(nmax, z, h0, -e * (z + 1j) / (z * z))
    if not np.all(np.isfinite(out)):
        raise SaturationError("h_n overflowed floating range")
    return out


def _yn_upper(nmax: int, z: complex) -> np.ndarray:
    """y_n table for Im z >= 0."""
    if z.imag <= _Y_UPWARD_IMAG:
        cz = cmath.cos(z)
        sz = cmath.sin(z)
        y0 = -cz / z
        if nmax == 0:
            out = np.array([y0], dtype=np.complex128)
        else:
            out = _upward(nmax, z, y0, -cz / (z * z) - sz / z)
        if not np.all(np.isfinite(out)):
            raise SaturationError("y_n overflowed floating range")
        return out
    return -1j * (_h1n_upper(nmax, z) - _jn_upper(nmax, z))


def jn_array(nmax: int, z: complex) -> np.ndarray:
    """Spherical Bessel ``j_n(z)`` for n = 0..nmax, complex z."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    z = complex(z)
    if z == 0:
        out = np.zeros(nmax + 1, dtype=np.complex128)
        out[0] = 1.0
        return out
    if z.imag < 0:
        return np.conj(_jn_upper(nmax, z.conjugate()))
    return _jn_upper(nmax, z)


def yn_array(nmax: int, z: complex) -> np.ndarray:
    """Spherical Bessel ``y_n(z)`` for n = 0..nmax; z = 0 is a pole."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    z = complex(z)
    if z == 0:
        raise ValueError("y_n has a pole at z = 0")
    if z.imag < 0:
        return np.conj(_yn_upper(nmax, z.conjugate()))
    return _yn_upper(nmax, z)


def h1n_array(nmax: int, z: complex) -> np.ndarray:
    """Spherical Hankel ``h_n^(1)(z)`` for n = 0..nmax; z = 0 is a pole."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    z = complex(z)
    if z == 0:
        raise ValueError("h_n^(1) has a pole at z = 0")
    if z.imag < 0:
        w = z.conjugate()
        # h1(z) = conj(h2(w)) = conj(j(w) - i y(w)) for Im w > 0.
        return np.conj(_jn_upper(nmax, w) - 1j * _yn_upper(nmax, w))
    return _h1n_upper(nmax, z)
