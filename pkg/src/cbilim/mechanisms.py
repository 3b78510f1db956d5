"""Immigration and branching mechanisms of an affine positive Markov process.

A process of this class is described by two functional characteristics: the
immigration exponent

    F(u) = b*u + integral of (1 - exp(-u*x)) m(dx)

and the branching exponent

    R(u) = -alpha*u**2 + beta*u - integral of
           (exp(-u*x) - 1 + u*x*1{x <= 1}) mu(dx),

with b >= 0, alpha >= 0, beta real, and m, mu measures on (0, inf).  F is
nonnegative, nondecreasing and concave; R is concave with R(0) = 0.  The sign
of the right derivative of R at zero separates the supercritical, critical
and subcritical regimes, and together with a logarithmic moment of m decides
whether the process has a limit distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
from scipy import integrate, optimize

from .errors import BracketError
from .measures import Measure

__all__ = [
    "ImmigrationMechanism",
    "BranchingMechanism",
    "Supercritical",
    "ZeroBranching",
    "SubcriticalOrCritical",
    "classify_branching",
    "LimitDecision",
    "limit_distribution_exists",
]


@dataclass(frozen=True)
class ImmigrationMechanism:
    """Drift ``b >= 0`` plus jump measure ``m`` integrating ``min(x, 1)``."""

    drift: float
    measure: Measure | None = None

    def __post_init__(self) -> None:
        if not self.drift >= 0.0:
            raise ValueError("immigration drift must be nonnegative")
        if self.measure is not None and not self.measure.integrable_min1:
            raise ValueError(
                "immigration measure must integrate min(x, 1); "
                "tempered-stable index >= 1 is not admissible here"
            )

    @property
    def is_zero(self) -> bool:
        return self.drift == 0.0 and self.measure is None

    def exponent(self, u: float) -> float:
        """F(u) for real u >= 0."""
        val = self.drift * u
        if self.measure is not None:
            val += self.measure.exp_integral(u)
        return val

    def exponent_mp(self, u):
        val = mp.mpf(self.drift) * u
        if self.measure is not None:
            val += self.measure.exp_integral_mp(u)
        return val

    def mean_rate(self) -> float:
        """Right derivative of F at zero: b plus the first moment of m."""
        val = self.drift
        if self.measure is not None:
            val += self.measure.moment1_between(0.0, math.inf)
        return val


@dataclass(frozen=True)
class BranchingMechanism:
    """Diffusion ``alpha >= 0``, drift ``beta`` and jump measure ``mu``
    integrating ``min(x**2, x)``."""

    diffusion: float
    drift: float
    measure: Measure | None = None

    def __post_init__(self) -> None:
        if not self.diffusion >= 0.0:
            raise ValueError("branching diffusion coefficient must be nonnegative")

    @property
    def is_zero(self) -> bool:
        return self.diffusion == 0.0 and self.drift == 0.0 and self.measure is None

    def exponent(self, u: float) -> float:
        """R(u) for real u >= 0."""
        val = -self.diffusion * u * u + self.drift * u
        if self.measure is not None:
            val -= self.measure.compensated_integral(u)
        return val

    def exponent_mp(self, u):
        val = -mp.mpf(self.diffusion) * u * u + mp.mpf(self.drift) * u
        if self.measure is not None:
            val -= self.measure.compensated_integral_mp(u)
        return val

    def mean_rate(self) -> float:
        """Right derivative of R at zero: beta plus the mass-weighted mean
        jump above one.  May be +inf."""
        val = self.drift
        if self.measure is not None:
            val += self.measure.moment1_between(1.0, math.inf)
        return val

    def small_jump_mean(self) -> float:
        """First moment of mu over (0, 1]; inf for unbounded variation."""
        if self.measure is None:
            return 0.0
        return self.measure.moment1_between(0.0, 1.0)


@dataclass(frozen=True)
class Supercritical:
    """Positive mean growth.  ``root`` is the positive zero of R, or ``inf``
    when R is increasing (the branching part is a subordinator) and no such
    zero exists."""

    rate: float
    root: float


@dataclass(frozen=True)
class ZeroBranching:
    """R vanishes identically."""


@dataclass(frozen=True)
class SubcriticalOrCritical:
    """Nonpositive mean growth rate; R < 0 on (0, inf)."""

    rate: float


BranchingClass = Supercritical | ZeroBranching | SubcriticalOrCritical


def classify_branching(bran: BranchingMechanism) -> BranchingClass:
    """Resolve the trichotomy for a branching mechanism.

    Raises
    ------
    BracketError
        If the mean rate is positive, a finite root must exist, and the
        bracket search still finds no sign change (numerical range problem).
    """
    if bran.is_zero:
        return ZeroBranching()
    rate = bran.mean_rate()
    if rate <= 0.0:
        return SubcriticalOrCritical(rate=rate)

    # Supercritical.  If the branching part is a subordinator (no diffusion,
    # bounded variation, nonnegative effective drift) then R is increasing
    # and has no positive zero.
    small_mean = bran.small_jump_mean()
    if bran.diffusion == 0.0 and math.isfinite(small_mean) and bran.drift >= small_mean:
        return Supercritical(rate=rate, root=math.inf)

    lo = 1e-8
    while bran.exponent(lo) <= 0.0:
        lo /= 8.0
        if lo < 1e-300:
            raise BracketError("could not find a point with R > 0 near zero")
    hi = max(1.0, 2.0 * lo)
    while bran.exponent(hi) >= 0.0:
        hi *= 8.0
        if hi > 1e15:
            raise BracketError(
                "R has positive mean rate but no sign change up to u = 1e15"
            )
    root = optimize.brentq(bran.exponent, lo, hi, xtol=1e-14, rtol=1e-14)
    return Supercritical(rate=rate, root=float(root))


@dataclass(frozen=True)
class LimitDecision:
    """Outcome of the limit-distribution existence test."""

    verdict: str  # "exists" | "not_exists" | "inconclusive"
    reason: str

    @property
    def exists(self) -> bool:
        return self.verdict == "exists"


def _critical_integral_converges(
    imm: ImmigrationMechanism, bran: BranchingMechanism, rtol: float = 1e-8
) -> tuple[bool, float]:
    """Dyadic convergence test of the integral of -F/R near zero for the
    critical case.  Returns (converged, value over (0, 1])."""

    def g(s: float) -> float:
        return -imm.exponent(s) / bran.exponent(s)

    incs: list[float] = []
    total = 0.0
    for k in range(41):
        lo, hi = 2.0 ** -(k + 1), 2.0**-k
        inc, _ = integrate.quad(g, lo, hi, epsabs=1e-14, epsrel=1e-10)
        incs.append(inc)
        total += inc
        if k < 10:
            continue
        window = incs[-6:]
        if all(abs(w) <= rtol * max(abs(total), 1e-300) for w in window):
            return True, total
        # settled geometric decay of the shells certifies convergence; the
        # remaining tail is bounded by the geometric series
        ratios = [b / a for a, b in zip(window, window[1:]) if a > 0.0]
        if len(ratios) == len(window) - 1 and all(r <= 0.95 for r in ratios):
            r = max(ratios)
            return True, total + incs[-1] * r / (1.0 - r)
    return False, total


def limit_distribution_exists(
    imm: ImmigrationMechanism, bran: BranchingMechanism
) -> LimitDecision:
    """Decide whether the process converges in law to a limit distribution.

    The limit exists iff the branching mean rate is nonpositive and the
    integral of -F/R over (0, u] is finite.  For a strictly negative rate
    that is equivalent to a finite logarithmic tail moment of the immigration
    measure; in the critical (zero-rate) case the integral is probed
    numerically, and a verdict of ``inconclusive`` means the partial
    integrals did not settle, not a proof of divergence.
    """
    regime = classify_branching(bran)
    if isinstance(regime, ZeroBranching):
        return LimitDecision(
            "not_exists", "branching exponent vanishes identically; state never relaxes"
        )
    if isinstance(regime, Supercritical):
        return LimitDecision(
            "not_exists", f"supercritical branching (mean rate {regime.rate:g})"
        )

    if imm.is_zero:
        return LimitDecision("exists", "no immigration; limit is the point mass at 0")

    if regime.rate < 0.0:
        logm = 0.0 if imm.measure is None else imm.measure.log_moment()
        if math.isfinite(logm):
            return LimitDecision(
                "exists", f"subcritical with finite log-moment {logm:.6g}"
            )
        return LimitDecision(
            "not_exists", "immigration measure has infinite logarithmic tail moment"
        )

    converged, value = _critical_integral_converges(imm, bran)
    if converged:
        return LimitDecision(
            "exists", f"critical case: integral of -F/R converged ({value:.6g} over (0,1])"
        )
    return LimitDecision(
        "inconclusive",
        "critical case: partial integrals of -F/R did not converge at the "
        "requested tolerance",
    )
