"""Sphere resonances: asymptotics, quality factors, and exact roots.

Modes are zeros of the Mie denominators in the *complex size parameter*
at fixed real materials (resonant radii at given frequency; the frequency
statement maps linearly since z is proportional to omega).

Root finding has two regimes:

* Lossless media with positive eps*mu products: on the real axis the
  denominator splits exactly as den = A + i*B with A the numerator (pure
  j content) and B the y content (see :func:`lhsphere.mie.den_split`).
  A and B carry machine accuracy *in their own scales*, which differ by
  the j/y dominance ratio -- astronomically for surface modes with
  n >> z.  The real zero x0 of B is bracketed and bisected, and the
  complex root follows from one exact first-order step,

      z_root = x0 - A (A' - i B') / (A'^2 + B'^2),

  whose imaginary part A B' / (A'^2 + B'^2) stays accurate even when it
  is ~1e-45: it is small because the scales of A and B differ, not
  because anything cancels.  A direct complex Newton iteration cannot do
  this -- evaluating den at complex points mixes the scales and buries A
  under eps*|B| rounding noise.
* Anything else (losses, mixed-sign products): damped complex Newton with
  central differences, Muller's method on stagnation, 100 iterations max.

Quality factors use Q = -beta * Re(z)/(2 Im(z)) with beta = +1 (right-
handed interior) or -1 (left-handed); a non-positive result is raised as
an error, never silently absoluted, since it signals a misclassified
branch.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import mie
from .core import Handedness, Medium, Polarization, SphereSystem, classify_handedness
from .errors import ConvergenceError, SaturationError
from .specfun import log_double_factorial

_N_CAP = 200  # scan order cap for the degenerate eps1 -> -eps2 limit


@dataclass(frozen=True)
class ResonanceEstimate:
    """Small-sphere asymptotic mode position and log-domain 1/Q."""

    polarization: Polarization
    order: int
    re_z: float
    inv_q_log: float


@dataclass(frozen=True)
class ResonanceMode:
    """A polished denominator root with its quality factor."""

    polarization: Polarization
    order: int
    z_root: complex
    q_factor: float
    residual: float
    handedness_beta: int


def _pair(pol: Polarization, interior: Medium, exterior: Medium):
    """Material pair (c1, c2) entering the given polarization."""
    if pol is Polarization.TM:
        return interior.epsilon, exterior.epsilon
    return interior.mu, exterior.mu


def _other_pair(pol: Polarization, interior: Medium, exterior: Medium):
    if pol is Polarization.TM:
        return interior.mu, exterior.mu
    return interior.epsilon, exterior.epsilon


def whispering_gallery_estimate(n: int, interior: Medium) -> float:
    """Perimeter-fit estimate x = n / sqrt(eps1 mu1); heuristic, n >> 1."""
    if n < 1:
        raise ValueError("order n must be >= 1")
    prod = (interior.epsilon * interior.mu).real
    if prod <= 0:
        raise ValueError("whispering-gallery estimate needs Re(eps1*mu1) > 0")
    return n / math.sqrt(prod)


def n_max(pol: Polarization, interior: Medium, exterior: Medium) -> float:
    """Largest angular momentum admitting a surface mode: -c2/(c1+c2).

    Surface modes exist for integer 1 <= n < n_max.  The degenerate case
    c1 = -c2 (n_max -> infinity) raises ZeroDivisionError.
    """
    c1, c2 = _pair(pol, interior, exterior)
    s = (c1 + c2).real
    if s == 0:
        raise ZeroDivisionError(
            "n_max diverges for c1 = -c2 (degenerate surface-mode spectrum)"
        )
    return -c2.real / s


def asymptotic_z(
    pol: Polarization, n: int, interior: Medium, exterior: Medium
) -> ResonanceEstimate | None:
    """Small-sphere surface-mode position; None when no mode of this order.

    For TM:  re_z = sqrt[ (e2 + n(e1+e2)) / (e1 e2 (m1/(2n+3) + m2/(2n-1))) ]
    and TE swaps eps with mu.  Valid in the regime 2 pi a / lambda << n.
    Absence has two causes: the order sits at or above n_max (no surface
    mode exists, even where the radicand happens to come out positive --
    the expansion is then self-inconsistent), or the radicand is <= 0.
    """
    if n < 1:
        raise ValueError("order n must be >= 1")
    try:
        nm = n_max(pol, interior, exterior)
    except ZeroDivisionError:
        nm = math.inf
    if not n < nm:
        return None
    c1, c2 = _pair(pol, interior, exterior)
    d1, d2 = _other_pair(pol, interior, exterior)
    c1, c2, d1, d2 = c1.real, c2.real, d1.real, d2.real
    denom = c1 * c2 * (d1 / (2 * n + 3) + d2 / (2 * n - 1))
    if denom == 0:
        return None
    radicand = (c2 + n * (c1 + c2)) / denom
    if radicand <= 0:
        return None
    re_z = math.sqrt(radicand)
    return ResonanceEstimate(pol, n, re_z, asymptotic_inv_q(pol, n, interior, exterior, re_z))


def asymptotic_inv_q(
    pol: Polarization, n: int, interior: Medium, exterior: Medium, re_z: float
) -> float:
    """ln(1/Q) of the asymptotic surface mode, evaluated in log domain.

    1/Q = | c2 / (c1/(2n+3) + c2/(2n-1)) * (sqrt(e2 m2) z)^(2n-1) / ((2n-1)!!)^2 |

    where (c1, c2) is the pair *dual* to the mode's polarization (mu for
    TM, eps for TE).  Log arithmetic keeps Q recoverable far beyond
    double-precision range (Q > 1e40 occurs already at n = 19).
    """
    if re_z <= 0:
        raise ValueError("re_z must be positive")
    d1, d2 = _other_pair(pol, interior, exterior)
    inner = d1.real / (2 * n + 3) + d2.real / (2 * n - 1)
    if inner == 0 or d2 == 0:
        raise ValueError("asymptotic 1/Q prefactor degenerates for these media")
    host = abs(cmath.sqrt(exterior.epsilon * exterior.mu))
    pref = abs(d2.real / inner)
    return (
        math.log(pref)
        + (2 * n - 1) * math.log(host * re_z)
        - 2.0 * log_double_factorial(2 * n - 1)
    )


def quality_factor(mode: ResonanceMode, interior_handedness: Handedness) -> float:
    """Q = -beta Re(z)/(2 Im(z)); raises if the sign comes out wrong."""
    return _q_from_root(mode.z_root, interior_handedness)


def _q_from_root(z_root: complex, handedness: Handedness) -> float:
    if z_root.real <= 0 or z_root.imag == 0:
        raise ValueError("quality factor needs Re(z) > 0 and Im(z) != 0")
    beta = handedness.beta
    q = -beta * z_root.real / (2.0 * z_root.imag)
    if q <= 0:
        raise ValueError(
            f"negative quality factor (beta={beta}, Im={z_root.imag:.3e}): "
            "misclassified mode or wrong branch"
        )
    return q


def _is_split_eligible(sys: SphereSystem) -> bool:
    return (
        sys.is_lossless
        and (sys.interior.epsilon * sys.interior.mu).real > 0
        and (sys.exterior.epsilon * sys.exterior.mu).real > 0
    )


def _split_b(pol: Polarization, n: int, sys: SphereSystem, x: float) -> float:
    return mie.den_split(pol, n, sys, x)[1]


def _split_b_or_nan(pol: Polarization, n: int, sys: SphereSystem, x: float) -> float:
    try:
        return _split_b(pol, n, sys, x)
    except SaturationError:
        return float("nan")


# Below this |Im z| / |z| the root is narrower than complex evaluation can
# resolve (den at complex points carries eps*|B|-scale rounding that buries
# the A content); the analytic first-order step is then the *only* accurate
# route and Newton verification is meaningless noise.  Above it, plain
# complex Newton resolves the root fine and removes the O(delta^2) error of
# the linearized step, which matters for broad (low-Q) modes.
_NEWTON_HANDOFF = 1e-8


def _polish_real(
    pol: Polarization,
    n: int,
    sys: SphereSystem,
    lo: float,
    hi: float,
    scale_hint: float = 0.0,
) -> ResonanceMode:
    """Bisection on B over a sign-change bracket, then the exact Im step.

    Broad modes (first-order |Im| above ``_NEWTON_HANDOFF`` relative) are
    handed to the complex Newton polisher seeded with the analytic step;
    narrow ones keep the analytic step, whose error is quadratically small.
    ``scale_hint`` carries the largest |denominator| seen while bracketing,
    so the reported residual is relative to the natural local scale of the
    denominator rather than to its accidentally tiny near-root values.
    """
    b_lo = _split_b(pol, n, sys, lo)
    b_hi = _split_b(pol, n, sys, hi)
    scale = max(scale_hint, abs(b_lo), abs(b_hi))
    if b_lo == 0.0:
        x0 = lo
    elif b_hi == 0.0:
        x0 = hi
    else:
        if math.copysign(1.0, b_lo) == math.copysign(1.0, b_hi):
            raise ValueError("bracket does not straddle a zero of B")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            b_mid = _split_b(pol, n, sys, mid)
            if b_mid == 0.0:
                lo = hi = mid
                break
            if math.copysign(1.0, b_mid) == math.copysign(1.0, b_lo):
                lo, b_lo = mid, b_mid
            else:
                hi, b_hi = mid, b_mid
        x0 = 0.5 * (lo + hi)
    h = 1e-6 * max(1.0, abs(x0))
    a0, _ = mie.den_split(pol, n, sys, x0)
    ap, bp = mie.den_split(pol, n, sys, x0 + h)
    am, bm = mie.den_split(pol, n, sys, x0 - h)
    da = (ap - am) / (2 * h)
    db = (bp - bm) / (2 * h)
    norm = da * da + db * db
    if norm == 0:
        raise ConvergenceError(
            "denominator derivative vanished at the real zero",
            best=complex(x0),
            residual=float("inf"),
        )
    z_root = complex(x0 - a0 * da / norm, a0 * db / norm)
    scale = max(scale, abs(a0), math.hypot(ap, bp), math.hypot(am, bm))
    if abs(z_root - x0) > _NEWTON_HANDOFF * max(1.0, abs(x0)):
        return _polish_complex(pol, n, sys, z_root, scale_hint=scale)
    residual = abs(mie.denominator(pol, n, sys, z_root))
    hand = classify_handedness(sys.interior)
    return ResonanceMode(
        pol, n, z_root, _q_from_root(z_root, hand), residual / scale, hand.beta
    )


def _bracket_near(
    pol: Polarization, n: int, sys: SphereSystem, seed: float
) -> tuple[float, float, float]:
    """Expanding scans around the seed; nearest sign-change interval wins.

    Returns (lo, hi, scale) with scale the largest |B| over the winning
    window: the natural denominator magnitude away from the resonance.
    """
    for flo, fhi, pts in ((0.8, 1.25, 121), (0.55, 1.9, 181), (0.25, 4.0, 301), (0.05, 12.0, 601)):
        xs = np.linspace(seed * flo, seed * fhi, pts)
        bs = np.array([_split_b(pol, n, sys, float(x)) for x in xs])
        sign_flip = np.nonzero(np.diff(np.sign(bs)) != 0)[0]
        if sign_flip.size:
            mids = 0.5 * (xs[sign_flip] + xs[sign_flip + 1])
            k = int(sign_flip[np.argmin(np.abs(mids - seed))])
            return float(xs[k]), float(xs[k + 1]), float(np.max(np.abs(bs)))
    raise ConvergenceError(
        f"no real denominator zero near seed {seed:g} for {pol.name} n={n}",
        best=complex(seed),
        residual=float("inf"),
    )


def _den_at(pol: Polarization, n: int, sys: SphereSystem, z: complex) -> complex:
    return mie.denominator(pol, n, sys, z)


def _polish_complex(
    pol: Polarization,
    n: int,
    sys: SphereSystem,
    seed: complex,
    scale_hint: float = 0.0,
) -> ResonanceMode:
    """Damped Newton with numerical derivative; Muller fallback; 100 iters.

    ``scale_hint`` folds bracketing-stage |denominator| values into the
    residual scale; without it a well-seeded run would normalize against
    near-root values only and spuriously fail its own convergence gate.
    """
    hand = classify_handedness(sys.interior)
    if hand is Handedness.MIXED:
        raise ValueError(
            "quality factor undefined for mixed-handedness interior; "
            "evaluate mie.denominator directly if only the root is needed"
        )
    z = complex(seed)
    f = _den_at(pol, n, sys, z)
    scale = max(abs(f), scale_hint)
    history = [(z, f)]
    stall = 0
    for _ in range(100):
        h = 1e-6 * max(1.0, abs(z))
        df = (_den_at(pol, n, sys, z + h) - _den_at(pol, n, sys, z - h)) / (2 * h)
        if df == 0:
            break
        step = -f / df
        z_new = z + step
        f_new = _den_at(pol, n, sys, z_new)
        scale = max(scale, abs(f_new))
        if abs(f_new) < abs(f):
            stall = 0
        else:
            stall += 1
        z, f = z_new, f_new
        history.append((z, f))
        if abs(f) <= 1e-13 * scale or abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
        if stall >= 3 and len(history) >= 3:
            # Muller step through the last three iterates
            (z2, f2), (z1, f1), (z0, f0) = history[-3], history[-2], history[-1]
            q = (z0 - z1) / (z1 - z2) if z1 != z2 else 0.5
            a = q * f0 - q * (1 + q) * f1 + q * q * f2
            b = (2 * q + 1) * f0 - (1 + q) ** 2 * f1 + q * q * f2
            c = (1 + q) * f0
            disc = cmath.sqrt(b * b - 4 * a * c)
            den1, den2 = b + disc, b - disc
            den_m = den1 if abs(den1) >= abs(den2) else den2
            if den_m != 0:
                z = z0 - (z0 - z1) * 2 * c / den_m
                f = _den_at(pol, n, sys, z)
                history.append((z, f))
                stall = 0
    residual = abs(f)
    if residual > 1e-10 * scale:
        raise ConvergenceError(
            f"root iteration stalled for {pol.name} n={n}",
            best=z,
            residual=residual / scale,
        )
    return ResonanceMode(
        pol, n, z, _q_from_root(z, hand), residual / scale, hand.beta
    )


def find_root(
    pol: Polarization, n: int, sys: SphereSystem, seed: complex
) -> ResonanceMode:
    """Polish a denominator root in the complex size parameter.

    Lossless systems with real wave arguments go through the real-axis
    split (accurate for arbitrarily high Q); everything else through
    complex Newton/Muller.  ``sys.size_parameter`` is a template value
    only; the search starts from ``seed``.
    """
    if n < 1:
        raise ValueError("order n must be >= 1")
    seed = complex(seed)
    if not (math.isfinite(seed.real) and math.isfinite(seed.imag)):
        raise ValueError("seed must be finite")
    if _is_split_eligible(sys) and abs(seed.imag) <= 1e-6 * max(1.0, abs(seed.real)):
        lo, hi, scale = _bracket_near(pol, n, sys, abs(seed.real))
        return _polish_real(pol, n, sys, lo, hi, scale_hint=scale)
    return _polish_complex(pol, n, sys, seed)


def winding_estimate(
    pol: Polarization,
    n: int,
    sys: SphereSystem,
    center: complex,
    radius: float,
    points: int = 4,
) -> int:
    """Winding number of the denominator around a contour (zero count).

    Sparse sampling (default 4 points) assumes the contour is tight enough
    that the phase advances less than pi between samples.
    """
    if radius <= 0 or points < 3:
        raise ValueError("need radius > 0 and at least 3 points")
    zs = [
        center + radius * cmath.exp(2j * cmath.pi * k / points)
        for k in range(points)
    ]
    args = [cmath.phase(_den_at(pol, n, sys, z)) for z in zs]
    total = 0.0
    for k in range(points):
        d = args[(k + 1) % points] - args[k]
        while d > math.pi:
            d -= 2 * math.pi
        while d < -math.pi:
            d += 2 * math.pi
        total += d
    return round(total / (2 * math.pi))


def scan_modes(
    sys: SphereSystem,
    x_range: tuple[float, float],
    n_range: tuple[int, int],
    pols: tuple[Polarization, ...] = (Polarization.TM, Polarization.TE),
    grid_points: int = 1200,
) -> list[ResonanceMode]:
    """Grid-scan sign changes of the real-axis split and polish each one.

    Returns modes sorted by (polarization, order, Re z), deduplicated.
    Only lossless systems with real wave arguments are scannable; orders
    above 200 are skipped with a warning (degenerate-spectrum cap).
    """
    lo, hi = x_range
    if not 0 < lo < hi:
        raise ValueError("x_range must satisfy 0 < lo < hi")
    n_lo, n_hi = n_range
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError("n_range must satisfy 1 <= n_lo <= n_hi")
    if not _is_split_eligible(sys):
        raise ValueError("scan_modes needs lossless media with eps*mu > 0")
    if n_hi > _N_CAP:
        warnings.warn(
            f"scan order cap reached: truncating n at {_N_CAP}", stacklevel=2
        )
        n_hi = _N_CAP
    xs = np.linspace(lo, hi, grid_points)
    modes: list[ResonanceMode] = []
    for pol in pols:
        for n in range(n_lo, n_hi + 1):
            bs = np.array([_split_b_or_nan(pol, n, sys, float(x)) for x in xs])
            # saturated points (y_n overflow) cannot sit next to a root: B is
            # astronomically far from zero there, so NaN cells simply drop out
            # of the flip detection
            ok = np.isfinite(bs[:-1]) & np.isfinite(bs[1:])
            with np.errstate(invalid="ignore"):
                flips = np.nonzero(ok & (np.diff(np.sign(bs)) != 0))[0]
            for k in flips:
                # local |B| scale: y magnitudes vary by many decades across
                # the grid at high n, so a row-global max would be vacuous
                sl = np.abs(bs[max(0, k - 10) : k + 12])
                try:
                    mode = _polish_real(
                        pol, n, sys, float(xs[k]), float(xs[k + 1]),
                        scale_hint=float(np.nanmax(sl)),
                    )
                except (ValueError, ConvergenceError):
                    continue
                if any(
                    m.polarization is pol
                    and m.order == n
                    and abs(m.z_root - mode.z_root) < 1e-8 * abs(mode.z_root)
                    for m in modes
                ):
                    continue
                modes.append(mode)
    modes.sort(key=lambda m: (m.polarization.value, m.order, m.z_root.real))
    return modes


def surface_modes(
    sys: SphereSystem,
    x_range: tuple[float, float] = (2e-2, 3.0),
    pols: tuple[Polarization, ...] = (Polarization.TM, Polarization.TE),
    grid_points: int = 1200,
) -> list[ResonanceMode]:
    """Census of surface modes: one per eligible order, volume modes excluded.

    Eligibility is the small-sphere criterion 1 <= n < n_max(pol); orders at
    or above n_max support no surface mode, and any denominator zeros they
    do have in the window are volume-type resonances.  For an eligible order
    with several zeros in the window (low n can show a broad volume root
    above the surface one) the surface branch is identified as the root
    nearest the asymptotic position when that exists, else the lowest root.
    A right-handed interior yields no eligible orders at all (n_max < 1 for
    both polarizations when all material constants are positive).
    """
    out: list[ResonanceMode] = []
    for pol in pols:
        try:
            nm = n_max(pol, sys.interior, sys.exterior)
        except ZeroDivisionError:
            nm = math.inf
        if not nm > 1:
            continue
        n_hi = _N_CAP if math.isinf(nm) else min(_N_CAP, math.ceil(nm) - 1)
        found = scan_modes(sys, x_range, (1, n_hi), pols=(pol,), grid_points=grid_points)
        for n in range(1, n_hi + 1):
            cands = [m for m in found if m.order == n]
            if not cands:
                continue
            est = asymptotic_z(pol, n, sys.interior, sys.exterior)
            if est is not None:
                out.append(min(cands, key=lambda m: abs(m.z_root.real - est.re_z)))
            else:
                out.append(min(cands, key=lambda m: m.z_root.real))
    out.sort(key=lambda m: (m.polarization.value, m.order, m.z_root.real))
    return out
