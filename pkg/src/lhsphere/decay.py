"""Normalized spontaneous decay rates near a sphere of arbitrary-sign media.

Electric- and magnetic-dipole rates, radial and tangential orientations,
as multipole series over n with the reflection coefficients of
:mod:`lhsphere.mie`:

    radial:     3/2 sum n(n+1)(2n+1) |j_n(z) - c_n h_n(z)|^2 / z^2
    tangential: 3/4 sum (2n+1) [ |j_n(z) - c'_n h_n(z)|^2
                                 + |([z(j_n(z) - c_n h_n(z))]') / z|^2 ]

at z = k2 r; for E1 the derivative term carries the TM coefficient q_n and
the plain term the TE one p_n, and M1 is the same with q and p interchanged.
With q = p = 0 each series sums to exactly 1 (free-space identity), which is
the main integration test of the whole stack.

Summation is in fixed ascending n; results are deterministic and the tail
is bounded geometrically from the observed term decay.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import mie, resonance
from .core import (
    AtomSite,
    Handedness,
    Orientation,
    Polarization,
    SphereSystem,
    Transition,
    classify_handedness,
)
from .errors import ConvergenceError, LossyMediumWarning
from .specfun import h1n_array, jn_array, log_double_factorial, riccati_deriv_table

# stop once this many consecutive terms fall below rel_tol * partial sum
_QUIET_RUN = 5


@dataclass(frozen=True)
class DecayRequest:
    """One rate evaluation: system, atom site, and truncation policy."""

    sys: SphereSystem
    site: AtomSite
    rel_tol: float = 1e-10
    n_cap: int = 500

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError("rel_tol must lie in (0, 1e-3]")
        if self.n_cap < 10:
            raise ValueError("n_cap must be >= 10")


@dataclass(frozen=True)
class DecayResult:
    """Converged rate with truncation diagnostics."""

    ratio: float
    n_used: int
    tail_bound: float
    resonant_terms: tuple = field(default_factory=tuple)


def _warn_if_lossy(sys: SphereSystem):
    if not sys.is_lossless:
        warnings.warn(
            "complex permittivity/permeability: the underlying rate formulas "
            "neglect losses (valid for gamma << omega)",
            LossyMediumWarning,
            stacklevel=3,
        )


def _floor_order(sys: SphereSystem, z_atom: float) -> int:
    """Initial summation depth before the quiet-run criterion may stop."""
    n0 = math.ceil(z_atom) + 20
    if classify_handedness(sys.interior) is Handedness.LEFT_HANDED:
        # LH surface-mode terms at n <= n_max can dominate long after the
        # geometric terms have decayed; never truncate below them
        for pol in (Polarization.TM, Polarization.TE):
            try:
                nm = resonance.n_max(pol, sys.interior, sys.exterior)
            except ZeroDivisionError:
                continue
            if math.isfinite(nm) and nm > 0:
                n0 = max(n0, math.ceil(nm) + 5)
    return n0


def _terms(req: DecayRequest, nmax: int, own_pol: Polarization):
    """Per-order series terms 1..nmax for (radial, tangential) at once.

    ``own_pol`` is the multipole family matching the transition character
    (TM for E1, TE for M1).  Its coefficient enters the radial series and
    the *derivative* tangential term; the dual family's coefficient enters
    the plain tangential term.  A perfectly reflecting sphere zeroes the
    tangential rate at contact only with this pairing, which pins the
    assignment unambiguously (swapping it survives both the free-space
    and the duality checks).
    """
    sys = req.sys
    wa = sys.wave_arguments()
    z = wa.z2 * req.site.rho
    # Far atoms need summation depth set by z = k2*r, but the sphere-side
    # tables at z1, z2 overflow long before that (y_n ~ (2n-1)!! / z^(n+1));
    # coefficients there are Rayleigh-suppressed below 1e-250, so cut the
    # tables where the log estimate nears the floating range and treat the
    # higher orders as exactly zero.
    n_coef = nmax
    z_min = min(abs(wa.z1), abs(wa.z2))
    if 0 < z_min < nmax:
        lzm = math.log(z_min)
        while n_coef > 1 and (
            log_double_factorial(2 * n_coef - 1) - (n_coef + 1) * lzm > 600.0
        ):
            n_coef -= 1
    q_num, q_den, p_num, p_den = mie.coefficient_tables(n_coef, sys)
    if n_coef < nmax:
        pad = nmax - n_coef
        q_num = np.concatenate([q_num, np.zeros(pad, complex)])
        q_den = np.concatenate([q_den, np.ones(pad, complex)])
        p_num = np.concatenate([p_num, np.zeros(pad, complex)])
        p_den = np.concatenate([p_den, np.ones(pad, complex)])
    c_q = q_num / q_den
    c_p = p_num / p_den
    if own_pol is Polarization.TM:
        c_own, c_dual = c_q, c_p
    else:
        c_own, c_dual = c_p, c_q
    j = jn_array(nmax, z)
    h = h1n_array(nmax, z)
    rj = riccati_deriv_table("j", j, z)
    rh = riccati_deriv_table("h1", h, z)
    n = np.arange(nmax + 1, dtype=np.float64)
    out_own = j - c_own * h
    out_deriv = rj - c_own * rh
    rad = 1.5 * n * (n + 1) * (2 * n + 1) * np.abs(out_own / z) ** 2
    tan = 0.75 * (2 * n + 1) * (
        np.abs(j - c_dual * h) ** 2 + np.abs(out_deriv / z) ** 2
    )
    rad[0] = 0.0
    tan[0] = 0.0
    # Flag resonant orders: beyond the geometric regime n ~ |z2|, an order
    # whose reflected field at the atom exceeds the free one (|c h| > |j|,
    # possible at small |c| since |h_n| explodes for n >> z) marks a surface
    # or gallery mode; series terms may grow up to the last such order, so
    # the monotone-tail property only holds past it.
    res_flags = []
    n_geo = abs(wa.z2)
    for pol, c in ((Polarization.TM, c_q), (Polarization.TE, c_p)):
        dominated = np.abs(c * h) > np.abs(j)
        for k in np.nonzero(dominated)[0]:
            if k > n_geo:
                res_flags.append((int(k), pol))
    res_flags.sort(key=lambda f: (f[0], f[1].value))
    return rad, tan, tuple(res_flags)


def _sum_series(req: DecayRequest, orientation: Orientation, own_pol: Polarization) -> DecayResult:
    _warn_if_lossy(req.sys)
    z_atom = abs(req.sys.wave_arguments().z2) * req.site.rho
    n_floor = _floor_order(req.sys, z_atom)
    nmax = min(req.n_cap, n_floor + 30)
    while True:
        rad, tan, res_flags = _terms(req, nmax, own_pol)
        terms = rad if orientation is Orientation.RADIAL else tan
        total = 0.0
        quiet = 0
        stop_n = None
        tail = 0.0
        for n in range(1, nmax + 1):
            total += terms[n]
            if n >= 2 and terms[n] <= req.rel_tol * total:
                quiet += 1
            else:
                quiet = 0
            if n >= n_floor and quiet >= _QUIET_RUN:
                # geometric tail bound from the observed decay ratio; keep
                # summing until the bound itself clears rel_tol * sum, so
                # tail_bound <= rel_tol * ratio holds on every success
                r = min(terms[n] / terms[n - 1] if terms[n - 1] > 0 else 0.0, 0.9)
                tail = terms[n] * r / (1.0 - r)
                if tail <= req.rel_tol * total:
                    stop_n = n
                    break
        if stop_n is not None:
            flags = tuple((m, p) for (m, p) in res_flags if m <= stop_n)
            return DecayResult(float(total), stop_n, float(tail), flags)
        if nmax >= req.n_cap:
            tail = float(terms[nmax])
            raise ConvergenceError(
                f"series not converged by n = {nmax}",
                best=float(total),
                residual=tail,
            )
        nmax = min(req.n_cap, nmax * 2)


def rate_e1_radial(req: DecayRequest) -> DecayResult:
    """E1 decay rate, dipole moment along the radius."""
    return _sum_series(req, Orientation.RADIAL, Polarization.TM)


def rate_e1_tangential(req: DecayRequest) -> DecayResult:
    """E1 decay rate, dipole moment tangent to the sphere."""
    return _sum_series(req, Orientation.TANGENTIAL, Polarization.TM)


def rate_m1_radial(req: DecayRequest) -> DecayResult:
    """M1 decay rate, radial orientation (E1 formula with q and p swapped)."""
    return _sum_series(req, Orientation.RADIAL, Polarization.TE)


def rate_m1_tangential(req: DecayRequest) -> DecayResult:
    """M1 decay rate, tangential orientation."""
    return _sum_series(req, Orientation.TANGENTIAL, Polarization.TE)


_DISPATCH = {
    (Transition.E1, Orientation.RADIAL): rate_e1_radial,
    (Transition.E1, Orientation.TANGENTIAL): rate_e1_tangential,
    (Transition.M1, Orientation.RADIAL): rate_m1_radial,
    (Transition.M1, Orientation.TANGENTIAL): rate_m1_tangential,
}


def rate(req: DecayRequest) -> DecayResult:
    """Rate for the transition/orientation recorded in the request's site."""
    return _DISPATCH[(req.site.transition, req.site.orientation)](req)


def rate_orientation_averaged(req: DecayRequest) -> DecayResult:
    """Isotropic average (radial + 2 tangential) / 3 for the transition."""
    site = req.site
    rad = _DISPATCH[(site.transition, Orientation.RADIAL)](req)
    tan = _DISPATCH[(site.transition, Orientation.TANGENTIAL)](req)
    flags = tuple(
        sorted(
            set(rad.resonant_terms) | set(tan.resonant_terms),
            key=lambda f: (f[0], f[1].value),
        )
    )
    return DecayResult(
        (rad.ratio + 2.0 * tan.ratio) / 3.0,
        max(rad.n_used, tan.n_used),
        (rad.tail_bound + 2.0 * tan.tail_bound) / 3.0,
        flags,
    )
