"""Domain types shared by all solvers.

All lengths are measured in units of the sphere radius, and frequency enters
only through the dimensionless size parameter ``x = 2*pi*a/lambda_vac``; no
absolute SI quantity appears anywhere in the library.  Fields are assumed to
evolve as ``exp(-i*omega*t)``, which fixes the sign interpretation of the
imaginary part of complex resonance positions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Medium",
    "SphereSystem",
    "Handedness",
    "WaveArguments",
    "AtomSite",
    "Transition",
    "Orientation",
    "Polarization",
    "VACUUM",
    "classify_handedness",
    "wave_argument",
]


def _finite(c: complex) -> bool:
    return math.isfinite(c.real) and math.isfinite(c.imag)


@dataclass(frozen=True)
class Medium:
    """Homogeneous medium with complex relative permittivity and permeability."""

    epsilon: complex
    mu: complex

    def __post_init__(self):
        eps = complex(self.epsilon)
        mu = complex(self.mu)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "mu", mu)
        if not (_finite(eps) and _finite(mu)):
            raise ValueError("material constants must be finite")
        if eps * mu == 0:
            raise ValueError("epsilon*mu must be nonzero")

    def swapped(self) -> "Medium":
        """Medium with epsilon and mu interchanged (duality partner)."""
        return Medium(self.mu, self.epsilon)

    @property
    def is_lossless(self) -> bool:
        return self.epsilon.imag == 0.0 and self.mu.imag == 0.0


VACUUM = Medium(1.0, 1.0)


class Handedness(Enum):
    """Sign classification of a medium; LeftHanded iff Re(eps)<0 and Re(mu)<0."""

    RIGHT_HANDED = "right-handed"
    LEFT_HANDED = "left-handed"
    MIXED = "mixed"

    @property
    def beta(self) -> int:
        """Sign entering the quality-factor definition: +1 RH, -1 LH."""
        if self is Handedness.RIGHT_HANDED:
            return 1
        if self is Handedness.LEFT_HANDED:
            return -1
        raise ValueError("beta is undefined for mixed-handedness media")


def classify_handedness(m: Medium) -> Handedness:
    """Classify a medium by the signs of Re(epsilon) and Re(mu)."""
    re_eps = m.epsilon.real
    re_mu = m.mu.real
    if re_eps < 0 and re_mu < 0:
        return Handedness.LEFT_HANDED
    if re_eps > 0 and re_mu > 0:
        return Handedness.RIGHT_HANDED
    return Handedness.MIXED


def wave_argument(m: Medium, x: float) -> complex:
    """Wave argument ``sqrt(eps*mu) * x`` on the principal branch.

    The square root is taken of the *product* eps*mu (argument in (-pi, pi]),
    never as ``sqrt(eps)*sqrt(mu)``; for a lossless left-handed medium the
    product is positive and the result is real positive.  This branch choice
    is observable-safe: the reflection coefficients are invariant under
    negating the interior argument.
    """
    if x <= 0:
        raise ValueError("size parameter must be positive")
    prod = m.epsilon * m.mu
    if prod == 0:
        raise ValueError("epsilon*mu must be nonzero")
    return cmath.sqrt(prod) * x


@dataclass(frozen=True)
class WaveArguments:
    """Interior and exterior wave arguments ``z_i = sqrt(eps_i*mu_i) * x``."""

    z1: complex
    z2: complex


@dataclass(frozen=True)
class SphereSystem:
    """A sphere (region 1) embedded in an outer medium (region 2).

    ``size_parameter`` is ``x = omega*a/c = 2*pi*a/lambda_vac``.
    """

    interior: Medium
    exterior: Medium
    size_parameter: float

    def __post_init__(self):
        x = float(self.size_parameter)
        object.__setattr__(self, "size_parameter", x)
        if not (x > 0 and math.isfinite(x)):
            raise ValueError("size parameter must be positive and finite")

    def wave_arguments(self) -> WaveArguments:
        return WaveArguments(
            z1=wave_argument(self.interior, self.size_parameter),
            z2=wave_argument(self.exterior, self.size_parameter),
        )

    def swapped(self) -> "SphereSystem":
        """System with epsilon and mu interchanged in both media."""
        return SphereSystem(
            self.interior.swapped(), self.exterior.swapped(), self.size_parameter
        )

    def with_size(self, x: float) -> "SphereSystem":
        return SphereSystem(self.interior, self.exterior, x)

    @property
    def is_lossless(self) -> bool:
        return self.interior.is_lossless and self.exterior.is_lossless


class Transition(Enum):
    E1 = "E1"
    M1 = "M1"


class Orientation(Enum):
    RADIAL = "radial"
    TANGENTIAL = "tangential"


class Polarization(Enum):
    TM = "TM"
    TE = "TE"


@dataclass(frozen=True)
class AtomSite:
    """Atom position and transition, ``rho = r/a >= 1`` (outside the sphere)."""

    rho: float
    transition: Transition = Transition.E1
    orientation: Orientation = Orientation.RADIAL

    def __post_init__(self):
        rho = float(self.rho)
        object.__setattr__(self, "rho", rho)
        if not (rho >= 1.0 and math.isfinite(rho)):
            raise ValueError("rho must be >= 1 (atom outside or on the surface)")
