"""Jump-size measures on (0, infinity) and the integral queries the rest of
the package needs.

Every family answers the same small set of questions:

* ``mass()``            total mass (may be ``inf``),
* ``tail(x)``           measure of ``(x, inf)``,
* ``moment1_between``   first moment over an interval,
* ``log_moment()``      integral of ``log(x)`` over ``(1, inf)``,
* ``exp_integral(u)``   integral of ``1 - exp(-u*x)``,
* ``compensated_integral(u)``
                        integral of ``exp(-u*x) - 1 + u*x*1{x <= 1}``.

The two Laplace-type integrals also come in ``*_mp`` variants that accept and
return mpmath numbers (real or complex) and are evaluated under the caller's
working precision.  Those are what the high-precision transform inversion
routines consume; the float versions are used everywhere else.

All closed forms are exact identities for the family in question, not
quadrature, except where noted (logarithmic moments of tempered-stable tails).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import mpmath as mp
import numpy as np
from scipy import integrate, special

__all__ = [
    "Measure",
    "FiniteAtoms",
    "ExponentialDensity",
    "TemperedStable",
    "TabulatedTail",
    "SamplerSpec",
]

_EULER = float(np.euler_gamma)


def _upper_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma for real s <= 1, extended to negative
    non-integer s by the downward recursion in s."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return float(special.gamma(s)) if s > 0.0 else math.inf
    if s > 0.0:
        return float(special.gamma(s) * special.gammaincc(s, x))
    if s == 0.0:
        return float(special.exp1(x))
    return (_upper_gamma(s + 1.0, x) - x**s * math.exp(-x)) / s


@dataclass(frozen=True)
class SamplerSpec:
    """Plan for drawing jump sizes conditioned on exceeding a cutoff.

    ``kind`` selects the algorithm in the path kernels: 1 discrete atoms,
    2 shifted exponential, 3 tempered-stable rejection, 4 tabulated-tail
    inversion.  ``rate`` is the jump intensity (tail mass above the cutoff);
    a zero rate disables the jump channel entirely.
    """

    kind: int
    rate: float
    params: np.ndarray
    xs: np.ndarray
    aux: np.ndarray


def _spec(kind: int, rate: float, params=(), xs=(), aux=()) -> SamplerSpec:
    return SamplerSpec(
        kind=kind,
        rate=float(rate),
        params=np.asarray(params, dtype=np.float64),
        xs=np.asarray(xs, dtype=np.float64),
        aux=np.asarray(aux, dtype=np.float64),
    )


class Measure(ABC):
    """A (possibly infinite) measure on (0, inf) with a density or atoms."""

    @abstractmethod
    def mass(self) -> float: ...

    @abstractmethod
    def tail(self, x: float) -> float: ...

    @abstractmethod
    def moment1_between(self, lo: float, hi: float) -> float: ...

    @abstractmethod
    def moment2_between(self, lo: float, hi: float) -> float: ...

    @abstractmethod
    def log_moment(self) -> float: ...

    @abstractmethod
    def exp_integral(self, u: float) -> float: ...

    @abstractmethod
    def exp_integral_mp(self, u): ...

    @abstractmethod
    def sampler_spec(self, cutoff: float) -> SamplerSpec: ...

    #: finite total mass (jumps arrive at a finite rate)
    is_finite_activity: bool = True
    #: integral of min(x, 1) is finite; required of immigration measures
    integrable_min1: bool = True

    def compensated_integral(self, u: float) -> float:
        # valid whenever the first moment near zero is finite
        return -self.exp_integral(u) + u * self.moment1_between(0.0, 1.0)

    def compensated_integral_mp(self, u):
        return -self.exp_integral_mp(u) + u * mp.mpf(self.moment1_between(0.0, 1.0))


@dataclass(frozen=True)
class FiniteAtoms(Measure):
    """Finitely many atoms: weight ``w_i`` at location ``x_i > 0``."""

    weights: tuple[float, ...]
    locations: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.locations) or not self.weights:
            raise ValueError("weights and locations must be nonempty, same length")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "locations", tuple(float(x) for x in self.locations))
        if any(w <= 0.0 for w in self.weights):
            raise ValueError("atom weights must be positive")
        if any(x <= 0.0 for x in self.locations):
            raise ValueError("atom locations must be positive")

    def mass(self) -> float:
        return sum(self.weights)

    def tail(self, x: float) -> float:
        return sum(w for w, loc in zip(self.weights, self.locations) if loc > x)

    def moment1_between(self, lo: float, hi: float) -> float:
        return sum(
            w * loc
            for w, loc in zip(self.weights, self.locations)
            if lo < loc <= hi
        )

    def moment2_between(self, lo: float, hi: float) -> float:
        return sum(
            w * loc * loc
            for w, loc in zip(self.weights, self.locations)
            if lo < loc <= hi
        )

    def log_moment(self) -> float:
        return sum(
            w * math.log(loc)
            for w, loc in zip(self.weights, self.locations)
            if loc > 1.0
        )

    def exp_integral(self, u: float) -> float:
        return sum(
            w * -math.expm1(-u * loc)
            for w, loc in zip(self.weights, self.locations)
        )

    def exp_integral_mp(self, u):
        return mp.fsum(
            w * (1 - mp.exp(-u * loc))
            for w, loc in zip(self.weights, self.locations)
        )

    def sampler_spec(self, cutoff: float) -> SamplerSpec:
        kept = [(w, loc) for w, loc in zip(self.weights, self.locations) if loc > cutoff]
        if not kept:
            return _spec(1, 0.0)
        rate = sum(w for w, _ in kept)
        cum = np.cumsum([w for w, _ in kept]) / rate
        cum[-1] = 1.0
        return _spec(1, rate, xs=[loc for _, loc in kept], aux=cum)


@dataclass(frozen=True)
class ExponentialDensity(Measure):
    """Density ``c * exp(-rho * x)`` on (0, inf)."""

    c: float
    rho: float

    def __post_init__(self) -> None:
        if not (self.c > 0.0 and self.rho > 0.0):
            raise ValueError("ExponentialDensity requires c > 0 and rho > 0")

    def mass(self) -> float:
        return self.c / self.rho

    def tail(self, x: float) -> float:
        return self.c / self.rho * math.exp(-self.rho * x)

    def moment1_between(self, lo: float, hi: float) -> float:
        c, r = self.c, self.rho

        def anti(x: float) -> float:
            # antiderivative of -x*c*exp(-r*x), evaluated so hi=inf gives 0
            if math.isinf(x):
                return 0.0
            return c * (x / r + 1.0 / r**2) * math.exp(-r * x)

        return max(anti(lo) - anti(hi), 0.0)

    def moment2_between(self, lo: float, hi: float) -> float:
        c, r = self.c, self.rho

        def anti(x: float) -> float:
            if math.isinf(x):
                return 0.0
            return c * (x * x / r + 2.0 * x / r**2 + 2.0 / r**3) * math.exp(-r * x)

        return max(anti(lo) - anti(hi), 0.0)

    def log_moment(self) -> float:
        return self.c / self.rho * float(special.exp1(self.rho))

    def exp_integral(self, u: float) -> float:
        return self.c * u / (self.rho * (self.rho + u))

    def exp_integral_mp(self, u):
        rho = mp.mpf(self.rho)
        return mp.mpf(self.c) * u / (rho * (rho + u))

    def sampler_spec(self, cutoff: float) -> SamplerSpec:
        return _spec(2, self.tail(cutoff), params=[self.rho, cutoff])


@dataclass(frozen=True)
class TemperedStable(Measure):
    """Density ``c * x**(-1 - alpha) * exp(-rho * x)`` on (0, inf).

    Infinite activity for every ``alpha`` in (0, 2); the small-jump first
    moment is finite only for ``alpha < 1``, so only that range is admissible
    as an immigration measure.  ``rho = 0`` (no tempering) is allowed.
    """

    c: float
    alpha: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not (self.c > 0.0 and 0.0 < self.alpha < 2.0 and self.rho >= 0.0):
            raise ValueError("TemperedStable requires c > 0, 0 < alpha < 2, rho >= 0")

    is_finite_activity = False

    @property
    def integrable_min1(self) -> bool:  # type: ignore[override]
        return self.alpha < 1.0

    def mass(self) -> float:
        return math.inf

    def tail(self, x: float) -> float:
        if x <= 0.0:
            return math.inf
        if self.rho == 0.0:
            return self.c * x ** (-self.alpha) / self.alpha
        return self.c * self.rho**self.alpha * _upper_gamma(-self.alpha, self.rho * x)

    def moment1_between(self, lo: float, hi: float) -> float:
        c, a, r = self.c, self.alpha, self.rho
        if lo >= hi:
            return 0.0
        if lo == 0.0 and a >= 1.0:
            return math.inf
        if r == 0.0:
            if a == 1.0:
                if math.isinf(hi):
                    return math.inf
                return c * math.log(hi / lo)
            hi_term = 0.0 if math.isinf(hi) and a > 1.0 else hi ** (1.0 - a)
            if math.isinf(hi_term):
                return math.inf
            return c * (hi_term - lo ** (1.0 - a)) / (1.0 - a)
        top = 0.0 if math.isinf(hi) else _upper_gamma(1.0 - a, r * hi)
        return c * r ** (a - 1.0) * (_upper_gamma(1.0 - a, r * lo) - top)

    def moment2_between(self, lo: float, hi: float) -> float:
        # x**2 tames the small-jump singularity for every alpha < 2
        c, a, r = self.c, self.alpha, self.rho
        if lo >= hi:
            return 0.0
        if r == 0.0:
            if math.isinf(hi):
                return math.inf
            return c * (hi ** (2.0 - a) - lo ** (2.0 - a)) / (2.0 - a)
        top = 0.0 if math.isinf(hi) else _upper_gamma(2.0 - a, r * hi)
        return c * r ** (a - 2.0) * (_upper_gamma(2.0 - a, r * lo) - top)

    def log_moment(self) -> float:
        if self.rho == 0.0:
            return self.c / self.alpha**2
        val, _ = integrate.quad(
            lambda x: math.log(x) * self.c * x ** (-1.0 - self.alpha) * math.exp(-self.rho * x),
            1.0,
            math.inf,
        )
        return val

    def exp_integral(self, u: float) -> float:
        if self.alpha >= 1.0:
            return math.inf if u > 0.0 else 0.0
        if u == 0.0:
            return 0.0
        c, a, r = self.c, self.alpha, self.rho
        if r == 0.0:
            return c * float(special.gamma(1.0 - a)) / a * u**a
        return c * float(special.gamma(-a)) * (r**a - (r + u) ** a)

    def exp_integral_mp(self, u):
        if self.alpha >= 1.0:
            raise ValueError("exp_integral diverges for alpha >= 1")
        c, a, r = mp.mpf(self.c), mp.mpf(self.alpha), mp.mpf(self.rho)
        if r == 0:
            return c * mp.gamma(1 - a) / a * mp.power(u, a)
        return c * mp.gamma(-a) * (mp.power(r, a) - mp.power(r + u, a))

    def compensated_integral(self, u: float) -> float:
        if u == 0.0:
            return 0.0
        c, a, r = self.c, self.alpha, self.rho
        if r == 0.0:
            if a < 1.0:
                return -self.exp_integral(u) + u * self.moment1_between(0.0, 1.0)
            if a == 1.0:
                return c * u * (_EULER + math.log(u) - 1.0)
            return c * float(special.gamma(-a)) * u**a - u * c / (a - 1.0)
        if a == 1.0:
            full = c * ((r + u) * math.log(r + u) - r * math.log(r) - u - u * math.log(r))
        else:
            full = c * float(special.gamma(-a)) * (
                (r + u) ** a - r**a - a * r ** (a - 1.0) * u
            )
        return full - u * self.moment1_between(1.0, math.inf)

    def compensated_integral_mp(self, u):
        c, a, r = mp.mpf(self.c), mp.mpf(self.alpha), mp.mpf(self.rho)
        if r == 0:
            if a < 1:
                return -self.exp_integral_mp(u) + u * mp.mpf(self.moment1_between(0.0, 1.0))
            if a == 1:
                return c * u * (mp.euler + mp.log(u) - 1)
            return c * mp.gamma(-a) * mp.power(u, a) - u * c / (a - 1)
        if a == 1:
            full = c * ((r + u) * mp.log(r + u) - r * mp.log(r) - u - u * mp.log(r))
        else:
            full = c * mp.gamma(-a) * (
                mp.power(r + u, a) - mp.power(r, a) - a * mp.power(r, a - 1) * u
            )
        return full - u * mp.mpf(self.moment1_between(1.0, math.inf))

    def sampler_spec(self, cutoff: float) -> SamplerSpec:
        if cutoff <= 0.0:
            raise ValueError("TemperedStable sampling requires a positive cutoff")
        return _spec(3, self.tail(cutoff), params=[self.alpha, self.rho, cutoff])


@dataclass(frozen=True)
class TabulatedTail(Measure):
    """Measure given by tail values on a finite grid.

    Between consecutive knots the tail is interpolated linearly, i.e. the
    measure has a piecewise-constant density.  There is no mass below the
    first knot.  A positive terminal tail value is kept as an atom at the
    last knot for all moment and transform queries, but ``log_moment``
    reports ``inf`` in that case: mass beyond the tabulated horizon is at an
    unknown location, and the conservative answer is the one that refuses to
    certify a finite logarithmic moment.  Grids that resolve the tail to
    zero are exact.
    """

    xs: tuple[float, ...]
    tails: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "xs", tuple(float(x) for x in self.xs))
        object.__setattr__(self, "tails", tuple(float(t) for t in self.tails))
        if len(self.xs) != len(self.tails) or len(self.xs) < 2:
            raise ValueError("need at least two (x, tail) pairs of equal length")
        if self.xs[0] <= 0.0 or any(a >= b for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("x grid must be strictly increasing and positive")
        if self.tails[0] <= 0.0 or any(t < 0.0 for t in self.tails):
            raise ValueError("tail values must be nonnegative with positive total mass")
        if any(a < b for a, b in zip(self.tails, self.tails[1:])):
            raise ValueError("tail values must be nonincreasing")

    @cached_property
    def _x(self) -> np.ndarray:
        return np.asarray(self.xs)

    @cached_property
    def _t(self) -> np.ndarray:
        return np.asarray(self.tails)

    @property
    def _atom(self) -> float:
        return self.tails[-1]

    def _segments(self):
        # (p, q, density) triples for the piecewise-constant density part
        for p, q, tp, tq in zip(self.xs, self.xs[1:], self.tails, self.tails[1:]):
            d = (tp - tq) / (q - p)
            if d > 0.0:
                yield p, q, d

    def mass(self) -> float:
        return self.tails[0]

    def tail(self, x: float) -> float:
        if x >= self.xs[-1]:
            return 0.0
        if x <= self.xs[0]:
            return self.tails[0]
        return float(np.interp(x, self._x, self._t))

    def moment1_between(self, lo: float, hi: float) -> float:
        total = 0.0
        for p, q, d in self._segments():
            a, b = max(p, lo), min(q, hi)
            if a < b:
                total += d * (b * b - a * a) / 2.0
        if self._atom > 0.0 and lo < self.xs[-1] <= hi:
            total += self._atom * self.xs[-1]
        return total

    def moment2_between(self, lo: float, hi: float) -> float:
        total = 0.0
        for p, q, d in self._segments():
            a, b = max(p, lo), min(q, hi)
            if a < b:
                total += d * (b**3 - a**3) / 3.0
        if self._atom > 0.0 and lo < self.xs[-1] <= hi:
            total += self._atom * self.xs[-1] ** 2
        return total

    def log_moment(self) -> float:
        if self._atom > 0.0:
            return math.inf
        total = 0.0
        for p, q, d in self._segments():
            a, b = max(p, 1.0), q
            if a < b:
                total += d * ((b * math.log(b) - b) - (a * math.log(a) - a))
        return total

    def exp_integral(self, u: float) -> float:
        if u == 0.0:
            return 0.0
        total = self._atom * -math.expm1(-u * self.xs[-1])
        for p, q, d in self._segments():
            # integral of (1 - exp(-u*x)) over [p, q]
            total += d * ((q - p) + math.exp(-u * p) * math.expm1(-u * (q - p)) / u)
        return total

    def exp_integral_mp(self, u):
        total = mp.mpf(self._atom) * (1 - mp.exp(-u * self.xs[-1]))
        for p, q, d in self._segments():
            total += d * ((q - p) - (mp.exp(-u * p) - mp.exp(-u * q)) / u)
        return total

    def sampler_spec(self, cutoff: float) -> SamplerSpec:
        rate = self.tail(cutoff)
        if rate <= 0.0:
            return _spec(4, 0.0)
        start = max(cutoff, self.xs[0])
        keep = self._x > start
        knots = np.concatenate(([start], self._x[keep]))
        # left-limit tail values: linear through the knots, so the terminal
        # entry is the atom mass
        vals = np.interp(knots, self._x, self._t)
        return _spec(4, rate, xs=knots, aux=vals)
