"""Planar geometric optics with signed refractive indices.

A left-handed medium carries a negative index n = -sqrt(eps mu); Snell's
law with signed indices puts the transmitted ray on the *same* side of
the interface normal as the incident one, which is what turns a sphere
from a defocusing element (conventional interior) into a focusing one.
Everything here is 2D: the plane through the source and the sphere
center contains all the geometry of interest.  Amplitudes are ignored
throughout; there are no Fresnel coefficients and partial reflections
are not traced.

The sphere has unit radius; lengths are in units of the radius a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Handedness, Medium, VACUUM, classify_handedness

_DRAW_MARGIN = 2.0  # how far past the sphere exit segments are drawn


class TotalInternalReflection(Exception):
    """Refraction impossible: |(n_from/n_to) sin(theta_i)| > 1."""


class Termination(Enum):
    EXITED = "exited"
    MAX_BOUNCES = "max_bounces"
    TOTAL_INTERNAL_REFLECTION = "total_internal_reflection"


@dataclass(frozen=True)
class SignedIndex:
    """Refractive index with the handedness sign attached."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value == 0:
            raise ValueError("signed index must be finite and nonzero")


def signed_index(medium: Medium) -> SignedIndex:
    """n = sign * sqrt(Re(eps) Re(mu)); sign -1 iff left-handed.

    Mixed-handedness media are refused: eps and mu of opposite sign give
    an evanescent (imaginary-index) medium with no real refraction angle.
    """
    hand = classify_handedness(medium)
    if hand is Handedness.MIXED:
        raise ValueError("no real ray index for a mixed-handedness medium")
    prod = medium.epsilon.real * medium.mu.real
    if prod <= 0:
        raise ValueError("index needs Re(eps) * Re(mu) > 0")
    sign = -1.0 if hand is Handedness.LEFT_HANDED else 1.0
    return SignedIndex(sign * math.sqrt(prod))


@dataclass(frozen=True)
class Ray:
    """Origin plus unit direction, both 2D."""

    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must be unit length, got |d| = {norm!r}")


@dataclass(frozen=True, eq=False)
class RayPath:
    """Ordered polyline; interface vertices sit on the unit circle."""

    vertices: np.ndarray  # shape (k, 2)
    termination: Termination


def _unit(v: np.ndarray) -> np.ndarray:
    return v / math.hypot(v[0], v[1])


def refract(
    direction: np.ndarray,
    normal: np.ndarray,
    n_from: SignedIndex,
    n_to: SignedIndex,
) -> np.ndarray:
    """Signed-index Snell refraction of a unit direction.

    ``normal`` is the unit surface normal on the incoming side, so
    direction . normal < 0.  Raises TotalInternalReflection when the
    transmitted sine exceeds 1 in magnitude.
    """
    d = np.asarray(direction, float)
    nv = np.asarray(normal, float)
    cos_i = -float(d @ nv)
    if cos_i <= 0:
        raise ValueError("direction must point into the surface (d . normal < 0)")
    tang = d + cos_i * nv
    sin_i = math.hypot(tang[0], tang[1])
    ratio = n_from.value / n_to.value
    s = ratio * sin_i
    if abs(s) > 1.0:
        raise TotalInternalReflection(
            f"sin(theta_t) = {s:.6f} out of range (sin_i = {sin_i:.6f})"
        )
    t_hat = tang / sin_i if sin_i > 0 else np.zeros(2)
    return s * t_hat - math.sqrt(1.0 - s * s) * nv


def reflect(direction: np.ndarray, normal: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, float)
    nv = np.asarray(normal, float)
    return d - 2.0 * float(d @ nv) * nv


def _circle_hit(origin: np.ndarray, direction: np.ndarray) -> float | None:
    """Smallest forward parameter t with |origin + t direction| = 1."""
    b = float(origin @ direction)
    c = float(origin @ origin) - 1.0
    disc = b * b - c
    if disc <= 0.0:
        return None
    root = math.sqrt(disc)
    for t in (-b - root, -b + root):
        if t > 1e-12:
            return t
    return None


def trace_ray(
    ray: Ray,
    interior: Medium,
    exterior: Medium = VACUUM,
    max_bounces: int = 8,
) -> RayPath:
    """Trace one ray through the unit sphere.

    Rays starting outside refract in, cross a chord, and refract out (for
    a homogeneous sphere the exit angle always exists, by reversibility).
    Rays starting inside may trap themselves through repeated total
    internal reflection; the bounce budget then ends the path.
    """
    if max_bounces < 0:
        raise ValueError("max_bounces must be >= 0")
    n_out = signed_index(exterior)
    n_in = signed_index(interior)
    pos = np.asarray(ray.origin, float)
    d = np.asarray(ray.direction, float)
    verts = [pos]
    inside = float(pos @ pos) < 1.0

    if not inside:
        t = _circle_hit(pos, d)
        if t is None:
            end = pos + (math.hypot(pos[0], pos[1]) + _DRAW_MARGIN) * d
            return RayPath(np.array([pos, end]), Termination.EXITED)
        pos = pos + t * d
        verts.append(pos)
        # outward normal faces the incoming exterior ray
        d = refract(d, _unit(pos), n_out, n_in)

    termination = Termination.MAX_BOUNCES
    for _ in range(max_bounces + 1):
        t = _circle_hit(pos, d)
        if t is None:  # origin numerically on the circle, heading out
            break
        pos = pos + t * d
        verts.append(pos)
        try:
            d = refract(d, -_unit(pos), n_in, n_out)
        except TotalInternalReflection:
            d = reflect(d, _unit(pos))
            termination = Termination.TOTAL_INTERNAL_REFLECTION
            continue
        verts.append(pos + (1.0 + _DRAW_MARGIN) * d)
        termination = Termination.EXITED
        break
    return RayPath(np.array(verts), termination)


def trace_fan(
    source: tuple[float, float],
    interior: Medium,
    fan_count: int = 61,
    max_bounces: int = 8,
    exterior: Medium = VACUUM,
) -> list[RayPath]:
    """Fan of rays from an outside point, spanning the sphere's subtense.

    Directions are uniform in angle over [-asin(1/r), +asin(1/r)] around
    the source-to-center axis; output order follows the fan angle.
    """
    src = np.asarray(source, float)
    r = math.hypot(src[0], src[1])
    if r <= 1.0:
        raise ValueError("fan source must lie outside the unit sphere")
    if fan_count < 1:
        raise ValueError("fan_count must be >= 1")
    axis = -src / r
    perp = np.array([-axis[1], axis[0]])
    half = math.asin(1.0 / r)
    if fan_count == 1:
        angles = [0.0]
    else:
        angles = np.linspace(-half, half, fan_count)
    paths = []
    for ang in angles:
        d = math.cos(ang) * axis + math.sin(ang) * perp
        paths.append(trace_ray(Ray(tuple(src), (d[0], d[1])), interior,
                               exterior=exterior, max_bounces=max_bounces))
    return paths


def snell_residuals(
    path: RayPath, interior: Medium, exterior: Medium = VACUUM
) -> np.ndarray:
    """|n_from sin(theta_i) - n_to sin(theta_t)| at each interface vertex.

    Sines are signed consistently via the 2D cross product with the
    outward normal, so the residual vanishes for negative refraction too.
    Reflection vertices satisfy the same relation with n_to = n_from.
    """
    n_out = signed_index(exterior).value
    n_in = signed_index(interior).value
    verts = path.vertices
    out = []
    for k in range(1, len(verts) - 1):
        v = verts[k]
        if abs(math.hypot(v[0], v[1]) - 1.0) > 1e-6:
            continue  # source or draw endpoint, not an interface
        u = _unit(v - verts[k - 1])
        w = _unit(verts[k + 1] - v)
        nv = _unit(v)
        sin_i = nv[0] * u[1] - nv[1] * u[0]
        sin_t = nv[0] * w[1] - nv[1] * w[0]
        going_in = float(u @ nv) < 0
        n_from = n_out if going_in else n_in
        # transmitted side: interior when entering, exterior when exiting;
        # on reflection (both segments on one side) the index is unchanged
        crossed = (float(w @ nv) < 0) == going_in
        if crossed:
            n_to = n_in if going_in else n_out
        else:
            n_to = n_from
        out.append(abs(n_from * sin_i - n_to * sin_t))
    return np.array(out)


def interior_chords(paths: list[RayPath]) -> list[tuple[np.ndarray, np.ndarray]]:
    """Entry/exit vertex pairs of every path that crossed the sphere."""
    chords = []
    for p in paths:
        on_circle = [
            v for v in p.vertices if abs(math.hypot(v[0], v[1]) - 1.0) < 1e-6
        ]
        if len(on_circle) >= 2:
            chords.append((on_circle[0], on_circle[1]))
    return chords


def crossing_spread(paths: list[RayPath]) -> float:
    """Median distance of pairwise chord-line crossings from their centroid.

    Focusing bundles (left-handed interior) cross in a tight cluster and
    give a small spread; defocusing bundles cross, if at all, in widely
    scattered virtual points and give a large one.  Near-parallel pairs
    are skipped.  Returns inf when fewer than two crossings exist.
    """
    chords = interior_chords(paths)
    pts = []
    for i in range(len(chords)):
        a0, a1 = chords[i]
        da = a1 - a0
        for j in range(i + 1, len(chords)):
            b0, b1 = chords[j]
            db = b1 - b0
            det = da[0] * db[1] - da[1] * db[0]
            if abs(det) < 1e-12:
                continue
            s = ((b0[0] - a0[0]) * db[1] - (b0[1] - a0[1]) * db[0]) / det
            pts.append(a0 + s * da)
    if len(pts) < 2:
        return float("inf")
    arr = np.array(pts)
    centroid = arr.mean(axis=0)
    return float(np.median(np.hypot(*(arr - centroid).T)))
