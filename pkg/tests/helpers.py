"""Shared factories for randomized test instances.

Mechanisms produced here are always valid; subcritical factories pick the
linear drift after the jump measure so the mean branching rate is strictly
negative by construction.
"""

from __future__ import annotations

import math

import numpy as np

from cbilim import (
    BranchingMechanism,
    ExponentialDensity,
    FiniteAtoms,
    ImmigrationMechanism,
    TabulatedTail,
    TemperedStable,
)

FAMILIES = ("atoms", "exponential", "tempered_stable", "tabulated")


def random_measure(rng: np.random.Generator, family: str, *, for_immigration: bool):
    if family == "atoms":
        n = int(rng.integers(1, 4))
        locs = np.sort(rng.uniform(0.05, 3.0, size=n))
        w = rng.uniform(0.1, 1.5, size=n)
        return FiniteAtoms(weights=tuple(w), locations=tuple(locs))
    if family == "exponential":
        return ExponentialDensity(
            c=float(rng.uniform(0.2, 2.0)), rho=float(rng.uniform(0.5, 3.0))
        )
    if family == "tempered_stable":
        if for_immigration:
            alpha = float(rng.uniform(0.2, 0.9))
        else:
            alpha = float(rng.uniform(0.2, 1.7))
        return TemperedStable(
            c=float(rng.uniform(0.1, 0.8)),
            alpha=alpha,
            rho=float(rng.uniform(0.8, 3.0)),
        )
    if family == "tabulated":
        xs = np.sort(rng.uniform(0.05, 3.0, size=4))
        tails = list(np.sort(rng.uniform(0.05, 2.0, size=4))[::-1])
        # a positive terminal tail leaves an atom at the last knot and an
        # infinite log-moment, which immigration-side tests must avoid
        if for_immigration or rng.random() < 0.5:
            tails[-1] = 0.0
        return TabulatedTail(xs=tuple(xs), tails=tuple(tails))
    raise AssertionError(family)


def random_immigration(rng: np.random.Generator, *, allow_zero: bool = False):
    if allow_zero and rng.random() < 0.15:
        return ImmigrationMechanism(drift=0.0)
    drift = float(rng.uniform(0.0, 2.0)) if rng.random() < 0.8 else 0.0
    measure = None
    if rng.random() < 0.75:
        family = FAMILIES[rng.integers(0, len(FAMILIES))]
        measure = random_measure(rng, family, for_immigration=True)
    if drift == 0.0 and measure is None:
        drift = 1.0
    return ImmigrationMechanism(drift=drift, measure=measure)


def random_subcritical_branching(
    rng: np.random.Generator, *, with_jumps: bool | None = None
):
    jumps = rng.random() < 0.5 if with_jumps is None else with_jumps
    measure = None
    if jumps:
        family = FAMILIES[rng.integers(0, len(FAMILIES))]
        measure = random_measure(rng, family, for_immigration=False)
    diffusion = float(rng.uniform(0.1, 1.0)) if rng.random() < 0.6 else 0.0
    tail_mean = measure.moment1_between(1.0, math.inf) if measure is not None else 0.0
    drift = -(tail_mean + float(rng.uniform(0.2, 2.0)))
    bran = BranchingMechanism(diffusion=diffusion, drift=drift, measure=measure)
    if diffusion == 0.0 and measure is None and rng.random() < 0.2:
        # pure linear case now and then
        bran = BranchingMechanism(diffusion=0.0, drift=drift)
    return bran


def random_instance(rng: np.random.Generator, *, with_jumps: bool | None = None):
    return random_immigration(rng), random_subcritical_branching(
        rng, with_jumps=with_jumps
    )
