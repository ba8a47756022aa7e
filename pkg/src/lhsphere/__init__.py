"""Emission rates and surface resonances of spheres with arbitrary-sign
permittivity and permeability, including the left-handed (double-negative)
regime."""

from .core import (
    VACUUM,
    AtomSite,
    Handedness,
    Medium,
    Orientation,
    Polarization,
    SphereSystem,
    Transition,
    WaveArguments,
    classify_handedness,
    wave_argument,
)
from .errors import (
    AccuracyLossError,
    ConvergenceError,
    LossyMediumWarning,
    SaturationError,
)

__version__ = "0.1.0"

__all__ = [
    "VACUUM",
    "AtomSite",
    "Handedness",
    "Medium",
    "Orientation",
    "Polarization",
    "SphereSystem",
    "Transition",
    "WaveArguments",
    "classify_handedness",
    "wave_argument",
    "AccuracyLossError",
    "ConvergenceError",
    "LossyMediumWarning",
    "SaturationError",
    "__version__",
]
