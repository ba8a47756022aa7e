# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled spherical Bessel/Hankel recurrence kernels.

Cython twin of ``_bessel_py``: same algorithms, same saturation policy,
same results up to floating-point reassociation.  See that module's
docstring for the stability analysis (reflection into the upper
half-plane, Miller normalization, the y_n method switch).  Only the
recurrence loops are typed; closed-form endpoints go through cmath.
"""

import cmath
import math

import numpy as np

from libc.math cimport fabs, isfinite, log

from .errors import AccuracyLossError, SaturationError

cdef double _BIG = 1e250
cdef double _SMALL = 1e-250
cdef double _STAB_TOL = 1e-12
cdef long _MAX_START = 1 << 20
cdef double _Y_UPWARD_IMAG = 0.5 * log(1e3)


cdef inline bint _finite(double complex v) noexcept:
    return isfinite(v.real) and isfinite(v.imag)


cdef bint _upward_fill(double complex[::1] out, long nmax, double complex z,
                       double complex f0, double complex f1) noexcept:
    """Three-term upward recurrence; returns False on overflow."""
    cdef long n
    cdef double complex fm = f0, f = f1, fp
    out[0] = f0
    if nmax >= 1:
        out[1] = f1
    for n in range(1, nmax):
        fp = (2 * n + 1) / z * f - fm
        out[n + 1] = fp
        fm = f
        f = fp
    for n in range(nmax + 1):
        if not _finite(out[n]):
            return False
    return True


cdef int _miller_fill(double complex[::1] out, long nmax, double complex z,
                      long start, double complex j0c, double complex j1c) noexcept:
    """One downward pass from ``start``; 0 on success, 1 on accuracy loss."""
    cdef long k, i, lo
    cdef double complex fp = 0, f = 1, fm, ref, refc, scale
    for k in range(start, 0, -1):
        fm = (2 * k + 1) / z * f - fp
        fp = f
        f = fm
        if k - 1 <= nmax:
            out[k - 1] = f
        if fabs(f.real) + fabs(f.imag) > _BIG:
            f = f * _SMALL
            fp = fp * _SMALL
            lo = k - 1 if k - 1 < nmax + 1 else nmax + 1
            for i in range(lo, nmax + 1):
                out[i] = out[i] * _SMALL
    if abs(j0c) >= abs(j1c) or nmax < 1:
        ref = out[0]
        refc = j0c
    else:
        ref = out[1]
        refc = j1c
    if ref == 0 or not _finite(ref):
        return 1
    scale = refc / ref
    for i in range(nmax + 1):
        out[i] = out[i] * scale
        if not _finite(out[i]):
            return 1
    return 0


def _jn_upper(long nmax, double complex z):
    cdef double complex sz = cmath.sin(complex(z))
    cdef double complex cz = cmath.cos(complex(z))
    cdef double complex j0 = sz / z
    cdef double complex j1 = sz / (z * z) - cz / z
    if nmax == 0:
        return np.array([complex(j0)], dtype=np.complex128)
    cdef double az = abs(complex(z))
    out = np.empty(nmax + 1, dtype=np.complex128)
    cdef double complex[::1] mv = out
    if nmax <= az:
        if not _upward_fill(mv, nmax, z, j0, j1):
            raise SaturationError("j_n overflowed floating range")
        return out
    cdef long start = nmax + max(15, <long>math.ceil(az))
    prev = np.empty(nmax + 1, dtype=np.complex128)
    cdef double complex[::1] pmv = prev
    if _miller_fill(pmv, nmax, z, start, j0, j1):
        raise AccuracyLossError("downward recurrence reference underflowed")
    while True:
        start *= 2
        if start > _MAX_START:
            raise AccuracyLossError("downward recurrence failed to stabilize")
        if _miller_fill(mv, nmax, z, start, j0, j1):
            raise AccuracyLossError("downward recurrence reference underflowed")
        ref = np.maximum(np.abs(out), np.abs(prev))
        # near-zero entries are judged against the table envelope: their
        # absolute error is eps * envelope from the arithmetic itself
        env = float(np.max(ref))
        if np.all(np.abs(out - prev) <= _STAB_TOL * np.maximum(ref, env * 1e-2)):
            return out
        prev, out = out, prev
        mv, pmv = pmv, mv


def _h1n_upper(long nmax, double complex z):
    cdef double complex e = cmath.exp(1j * complex(z))
    out = np.empty(nmax + 1, dtype=np.complex128)
    cdef double complex[::1] mv = out
    if not _upward_fill(mv, nmax, z, -1j * e / z, -e * (z + 1j) / (z * z)):
        raise SaturationError("h_n overflowed floating range")
    return out


def _yn_upper(long nmax, double complex z):
    cdef double complex cz, sz
    if z.imag <= _Y_UPWARD_IMAG:
        cz = cmath.cos(complex(z))
        sz = cmath.sin(complex(z))
        out = np.empty(nmax + 1, dtype=np.complex128)
        mv = out
        if not _upward_fill(mv, nmax, z, -cz / z, -cz / (z * z) - sz / z):
            raise SaturationError("y_n overflowed floating range")
        return out
    return -1j * (_h1n_upper(nmax, z) - _jn_upper(nmax, z))


def jn_array(nmax, z):
    """Spherical Bessel ``j_n(z)`` for n = 0..nmax, complex z."""
    cdef long n = nmax
    if n < 0:
        raise ValueError("nmax must be >= 0")
    cdef double complex zz = complex(z)
    if zz == 0:
        arr0 = np.zeros(n + 1, dtype=np.complex128)
        arr0[0] = 1.0
        return arr0
    if zz.imag < 0:
        return np.conj(_jn_upper(n, zz.conjugate()))
    return _jn_upper(n, zz)


def yn_array(nmax, z):
    """Spherical Bessel ``y_n(z)`` for n = 0..nmax; z = 0 is a pole."""
    cdef long n = nmax
    if n < 0:
        raise ValueError("nmax must be >= 0")
    cdef double complex zz = complex(z)
    if zz == 0:
        raise ValueError("y_n has a pole at z = 0")
    if zz.imag < 0:
        return np.conj(_yn_upper(n, zz.conjugate()))
    return _yn_upper(n, zz)


def h1n_array(nmax, z):
    """Spherical Hankel ``h_n^(1)(z)`` for n = 0..nmax; z = 0 is a pole."""
    cdef long n = nmax
    if n < 0:
        raise ValueError("nmax must be >= 0")
    cdef double complex zz = complex(z)
    cdef double complex w
    if zz == 0:
        raise ValueError("h_n^(1) has a pole at z = 0")
    if zz.imag < 0:
        w = zz.conjugate()
        # h1(z) = conj(h2(w)) = conj(j(w) - i y(w)) for Im w > 0.
        return np.conj(_jn_upper(n, w) - 1j * _yn_upper(n, w))
    return _h1n_upper(n, zz)
