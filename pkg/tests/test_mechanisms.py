"""Mechanism exponents, the branching trichotomy, and limit existence."""

import math

import mpmath as mp
import numpy as np
import pytest

from cbilim import (
    BranchingMechanism,
    ExponentialDensity,
    FiniteAtoms,
    ImmigrationMechanism,
    SubcriticalOrCritical,
    Supercritical,
    TabulatedTail,
    TemperedStable,
    ZeroBranching,
    classify_branching,
    limit_distribution_exists,
)

from helpers import random_immigration, random_instance, random_subcritical_branching


# ---------------------------------------------------------------------------
# exponent values


def test_immigration_exponent_examples():
    m = ImmigrationMechanism(drift=0.0, measure=ExponentialDensity(c=1.0, rho=1.0))
    # integral of (1 - e^{-s}) e^{-s} over (0, inf) = 1/2
    assert m.exponent(1.0) == pytest.approx(0.5, rel=1e-12)
    assert ImmigrationMechanism(drift=3.0).exponent(2.0) == 6.0
    assert m.exponent(0.0) == 0.0


def test_immigration_exponent_against_quadrature():
    imm = ImmigrationMechanism(
        drift=0.7, measure=TemperedStable(c=0.4, alpha=0.6, rho=1.1)
    )

    def density(s):
        return 0.4 * s ** mp.mpf(-1.6) * mp.exp(-1.1 * s)

    for u in (0.3, 1.0, 5.0):
        with mp.workdps(40):
            # s = t^8 softens the power singularity at zero
            jump = mp.quad(
                lambda t: (1 - mp.exp(-u * t**8)) * density(t**8) * 8 * t**7, [0, 1]
            ) + mp.quad(lambda s: (1 - mp.exp(-u * s)) * density(s), [1, mp.inf])
        assert imm.exponent(u) == pytest.approx(0.7 * u + float(jump), rel=1e-9)


def test_branching_exponent_assembles_parts():
    mu = ExponentialDensity(c=1.0, rho=1.0)
    bran = BranchingMechanism(diffusion=0.5, drift=-1.0, measure=mu)
    for u in (0.2, 1.0, 3.0):
        want = -0.5 * u * u - u - mu.compensated_integral(u)
        assert bran.exponent(u) == pytest.approx(want, rel=1e-14)
    assert bran.exponent(0.0) == 0.0


def test_mean_rates():
    imm = ImmigrationMechanism(drift=0.5, measure=ExponentialDensity(c=1.0, rho=1.0))
    assert imm.mean_rate() == pytest.approx(1.5, rel=1e-12)

    mu = ExponentialDensity(c=1.0, rho=1.0)
    bran = BranchingMechanism(diffusion=0.5, drift=-1.0, measure=mu)
    # beta + integral of x e^{-x} over (1, inf) = -1 + 2/e
    assert bran.mean_rate() == pytest.approx(-1.0 + 2.0 / math.e, rel=1e-12)
    assert bran.small_jump_mean() == pytest.approx(1.0 - 2.0 / math.e, rel=1e-12)


def test_validation():
    with pytest.raises(ValueError):
        ImmigrationMechanism(drift=-0.1)
    with pytest.raises(ValueError):
        # alpha >= 1 does not integrate min(x, 1)
        ImmigrationMechanism(drift=0.0, measure=TemperedStable(c=1.0, alpha=1.2, rho=1.0))
    with pytest.raises(ValueError):
        BranchingMechanism(diffusion=-1.0, drift=0.0)


# ---------------------------------------------------------------------------
# trichotomy


def test_classify_zero():
    assert isinstance(
        classify_branching(BranchingMechanism(diffusion=0.0, drift=0.0)), ZeroBranching
    )


def test_classify_supercritical_diffusion_root():
    # R(u) = -u^2 + 2u has rate 2 and positive root 2
    cls = classify_branching(BranchingMechanism(diffusion=1.0, drift=2.0))
    assert isinstance(cls, Supercritical)
    assert cls.rate == pytest.approx(2.0)
    assert cls.root == pytest.approx(2.0, rel=1e-10)


def test_classify_supercritical_subordinator_has_no_root():
    mu = FiniteAtoms(weights=(0.5,), locations=(2.0,))
    cls = classify_branching(BranchingMechanism(diffusion=0.0, drift=1.0, measure=mu))
    assert isinstance(cls, Supercritical)
    assert cls.rate == pytest.approx(2.0)
    assert math.isinf(cls.root)


def test_classify_subcritical():
    mu = ExponentialDensity(c=1.0, rho=1.0)
    cls = classify_branching(BranchingMechanism(diffusion=0.5, drift=-1.0, measure=mu))
    assert isinstance(cls, SubcriticalOrCritical)
    assert cls.rate == pytest.approx(-1.0 + 2.0 / math.e, rel=1e-12)


def test_classify_critical():
    cls = classify_branching(BranchingMechanism(diffusion=1.0, drift=0.0))
    assert isinstance(cls, SubcriticalOrCritical)
    assert cls.rate == 0.0


def test_classify_matches_rate_sign_on_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(60):
        bran = random_subcritical_branching(rng)
        cls = classify_branching(bran)
        assert isinstance(cls, SubcriticalOrCritical)
        assert cls.rate < 0.0
        # R is negative on (0, inf) in this regime
        for u in (0.1, 1.0, 7.0):
            assert bran.exponent(u) < 0.0


def test_exponent_shape_properties():
    rng = np.random.default_rng(21)
    grid = np.linspace(0.05, 8.0, 41)
    for _ in range(25):
        imm, bran = random_instance(rng)
        F = np.array([imm.exponent(u) for u in grid])
        R = np.array([bran.exponent(u) for u in grid])
        assert np.all(F >= -1e-12)
        assert np.all(np.diff(F) >= -1e-10)  # nondecreasing
        for vals in (F, R):
            d2 = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
            assert np.all(d2 <= 1e-8 * (1.0 + np.abs(vals[1:-1])))  # concave


# ---------------------------------------------------------------------------
# limit existence


def _subcritical():
    return BranchingMechanism(
        diffusion=0.5, drift=-1.0, measure=ExponentialDensity(c=1.0, rho=1.0)
    )


def test_exists_subcritical_finite_log_moment():
    imm = ImmigrationMechanism(drift=1.0, measure=ExponentialDensity(c=1.0, rho=1.0))
    decision = limit_distribution_exists(imm, _subcritical())
    assert decision.verdict == "exists"
    assert decision.exists


def test_not_exists_infinite_log_moment():
    # terminal tail mass sits as an atom at the last knot, carrying an
    # infinite logarithmic moment by our tail-extension convention
    imm = ImmigrationMechanism(
        drift=0.0, measure=TabulatedTail(xs=(0.5, 1.0), tails=(1.0, 0.4))
    )
    decision = limit_distribution_exists(imm, _subcritical())
    assert decision.verdict == "not_exists"
    assert not decision.exists


def test_not_exists_supercritical_and_zero_branching():
    imm = ImmigrationMechanism(drift=1.0)
    sup = BranchingMechanism(diffusion=1.0, drift=2.0)
    assert limit_distribution_exists(imm, sup).verdict == "not_exists"
    zero = BranchingMechanism(diffusion=0.0, drift=0.0)
    assert limit_distribution_exists(imm, zero).verdict == "not_exists"


def test_exists_trivially_without_immigration():
    decision = limit_distribution_exists(ImmigrationMechanism(drift=0.0), _subcritical())
    assert decision.verdict == "exists"


def test_critical_stable_branching_converges():
    # R(u) = -Gamma(-3/2) u^{3/2} exactly: the drift cancels the tail mean
    bran = BranchingMechanism(
        diffusion=0.0, drift=-2.0, measure=TemperedStable(c=1.0, alpha=1.5, rho=0.0)
    )
    assert classify_branching(bran).rate == 0.0
    imm = ImmigrationMechanism(drift=1.0)
    decision = limit_distribution_exists(imm, bran)
    assert decision.verdict == "exists"
    assert "critical" in decision.reason


def test_critical_diffusion_is_inconclusive():
    # integrand -F/R ~ b/(alpha*u) near zero: truly divergent, but the
    # numeric probe only ever reports a failure to settle
    imm = ImmigrationMechanism(drift=1.0)
    bran = BranchingMechanism(diffusion=1.0, drift=0.0)
    decision = limit_distribution_exists(imm, bran)
    assert decision.verdict == "inconclusive"
    assert not decision.exists


def test_log_moment_decision_matches_direct_integrability():
    # subcritical: existence <=> the integral of -F/R converges at zero,
    # probed directly by dyadic shells
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(40):
        imm = random_immigration(rng)
        bran = random_subcritical_branching(rng)
        if imm.is_zero or imm.measure is None:
            continue
        decision = limit_distribution_exists(imm, bran)
        shells = []
        for j in range(60):
            lo, hi = 2.0 ** -(j + 1), 2.0**-j
            mids = np.linspace(lo, hi, 9)
            vals = [-imm.exponent(s) / bran.exponent(s) for s in mids]
            shells.append(np.trapezoid(vals, mids))
        head = sum(shells[:20])
        tail = sum(shells[40:])
        if decision.verdict == "exists":
            assert tail < 0.05 * max(head, 1e-12)
        else:
            assert tail > 0.25 * shells[0]
        checked += 1
    assert checked >= 10
