"""Limit distributions of affine processes with state-dependent branching
and constant-rate immigration.

The package takes the two functional characteristics of the process, an
immigration mechanism and a branching mechanism, and answers:

* does the process converge in law as time grows (``limit_distribution_exists``),
* what is the limit law's transform, scale function, and jump structure
  (``build_limit_law``),
* what does the law look like near the left edge of its support, does it
  carry an atom, is it self-decomposable,
* and do Monte Carlo paths agree with the transform (``simulate``).
"""

from .errors import BracketError, ConfigError, InversionError, NumericError
from .measures import (
    ExponentialDensity,
    FiniteAtoms,
    Measure,
    TabulatedTail,
    TemperedStable,
)
from .mechanisms import (
    BranchingMechanism,
    ImmigrationMechanism,
    LimitDecision,
    SubcriticalOrCritical,
    Supercritical,
    ZeroBranching,
    classify_branching,
    limit_distribution_exists,
)
from .riccati import phi, psi, solve_riccati, transient_laplace
from .scale import ScaleFunction, build_scale, effective_drift, excursion_intensity
from .limitdist import (
    AbsolutelyContinuous,
    AtomAt,
    BoundaryAsymptotics,
    HalfLine,
    LimitLaw,
    Point,
    SdVerdict,
    UndeterminedContinuity,
    build_limit_law,
    class_membership,
    density,
    k_via_excursions,
    laplace_exponent,
    support,
    triplet,
)
from .simulate import SimConfig, SimResult, empirical_laplace, simulate
from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = [
    "AbsolutelyContinuous",
    "AtomAt",
    "BoundaryAsymptotics",
    "BracketError",
    "BranchingMechanism",
    "ConfigError",
    "ExponentialDensity",
    "FiniteAtoms",
    "HalfLine",
    "ImmigrationMechanism",
    "InversionError",
    "LimitDecision",
    "LimitLaw",
    "Measure",
    "NumericError",
    "Point",
    "ScaleFunction",
    "SdVerdict",
    "SimConfig",
    "SimResult",
    "SubcriticalOrCritical",
    "Supercritical",
    "TabulatedTail",
    "TemperedStable",
    "UndeterminedContinuity",
    "ZeroBranching",
    "build_limit_law",
    "build_scale",
    "class_membership",
    "classify_branching",
    "density",
    "effective_drift",
    "empirical_laplace",
    "excursion_intensity",
    "k_via_excursions",
    "kernel_backend",
    "laplace_exponent",
    "limit_distribution_exists",
    "phi",
    "psi",
    "simulate",
    "solve_riccati",
    "support",
    "transient_laplace",
    "triplet",
]
