"""Numerical inversion of Laplace transforms in extended precision.

Two classical fixed-abscissa schemes are provided:

* Gaver-Stehfest: real abscissas only, spectacular accuracy for transforms
  of smooth completely-monotone-like originals, but the alternating weights
  grow like 10**(order/2), so it must run in extended precision and it fails
  (oscillates) on originals with oscillatory or discontinuous behaviour.

* Fixed Talbot: deformed Bromwich contour, needs the transform at complex
  points, much more robust.

``invert`` runs Stehfest at two consecutive even orders (sharing transform
evaluations) and accepts the result when they agree; otherwise it reruns
with Talbot at two term counts, and raises if that disagrees too.  The
transform callable must accept mpmath numbers -- real for Stehfest, complex
for Talbot -- and is evaluated under this module's working precision.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from .errors import InversionError

__all__ = ["stehfest_weights", "invert_stehfest", "invert_talbot", "invert"]


@lru_cache(maxsize=None)
def stehfest_weights(order: int) -> tuple[Fraction, ...]:
    """Exact rational Gaver-Stehfest weights V_1..V_order (order even)."""
    if order % 2 != 0 or order < 2:
        raise ValueError("Stehfest order must be a positive even integer")
    half = order // 2
    weights = []
    for k in range(1, order + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            num = Fraction(j**half) * math.factorial(2 * j)
            den = (
                math.factorial(half - j)
                * math.factorial(j)
                * math.factorial(j - 1)
                * math.factorial(k - j)
                * math.factorial(2 * j - k)
            )
            acc += num / den
        sign = -1 if (k + half) % 2 else 1
        weights.append(sign * acc)
    return tuple(weights)


def _stehfest_dps(order: int) -> int:
    # the alternating sum loses roughly order digits; keep ample headroom
    return max(30, int(2.2 * order) + 8)


def invert_stehfest(transform, x: float, order: int = 16, dps: int | None = None) -> float:
    """Gaver-Stehfest inversion of ``transform`` at ``x > 0``."""
    val, _ = _stehfest_pair(transform, x, order, dps)
    return val


def _stehfest_pair(transform, x: float, order: int, dps: int | None):
    """Stehfest values at ``order`` and ``order - 2`` sharing evaluations."""
    if x <= 0.0:
        raise ValueError("inversion point must be positive")
    w_hi = stehfest_weights(order)
    w_lo = stehfest_weights(order - 2) if order > 2 else None
    with mp.workdps(dps or _stehfest_dps(order)):
        ln2x = mp.log(2) / x
        evals = [transform(ln2x * k) for k in range(1, order + 1)]
        hi = mp.fsum(mp.mpf(w.numerator) / w.denominator * f for w, f in zip(w_hi, evals))
        hi = float(hi * ln2x)
        if w_lo is None:
            return hi, hi
        lo = mp.fsum(mp.mpf(w.numerator) / w.denominator * f for w, f in zip(w_lo, evals))
        lo = float(lo * ln2x)
    return hi, lo


def invert_talbot(transform, x: float, terms: int = 32, dps: int | None = None) -> float:
    """Fixed-Talbot inversion; ``transform`` must accept complex arguments."""
    if x <= 0.0:
        raise ValueError("inversion point must be positive")
    with mp.workdps(dps or max(30, int(1.8 * terms))):
        r = mp.mpf(2 * terms) / (5 * x)
        acc = mp.exp(r * x) * transform(r) / 2
        for k in range(1, terms):
            theta = mp.pi * k / terms
            cot = mp.cos(theta) / mp.sin(theta)
            p = r * theta * (cot + 1j)
            gamma = 1 + 1j * theta * (1 + cot * cot) - 1j * cot
            acc += mp.re(mp.exp(x * p) * gamma * transform(p))
        return float(mp.re(acc) * r / terms)


def invert(
    transform,
    x: float,
    *,
    order: int = 16,
    talbot_terms: int = 32,
    agree_rtol: float = 1e-7,
    dps: int | None = None,
) -> tuple[float, str]:
    """Invert with Stehfest, falling back to Talbot on disagreement.

    Returns ``(value, method)``.  Raises :class:`InversionError` when neither
    scheme is self-consistent at ``agree_rtol``.
    """
    hi, lo = _stehfest_pair(transform, x, order, dps)
    scale = max(abs(hi), abs(lo), 1e-300)
    if abs(hi - lo) <= agree_rtol * scale:
        return hi, "stehfest"
    t1 = invert_talbot(transform, x, talbot_terms, dps)
    t2 = invert_talbot(transform, x, talbot_terms + 8, dps)
    if abs(t1 - t2) <= 10.0 * agree_rtol * max(abs(t1), abs(t2), 1e-300):
        return t2, "talbot"
    raise InversionError(
        f"Laplace inversion did not stabilize at x = {x:g}: "
        f"stehfest {hi:.9g}/{lo:.9g}, talbot {t1:.9g}/{t2:.9g}"
    )
