"""Riccati flow against closed-form solutions and semigroup invariants.

Closed forms used as oracles:

* linear branching R(u) = -lam*u:
      psi(t, u) = u * exp(-lam*t)
      phi(t, u) = b*u*(1 - exp(-lam*t))/lam
                  + (c/(rho*lam)) * log((rho + u) / (rho + u*exp(-lam*t)))
  for immigration drift b plus jump density c*exp(-rho*x).

* diffusion branching R(u) = -a*u^2 + beta*u, beta < 0:
      psi(t, u) = u*e^{beta t} / (1 - (a/beta)*u*(1 - e^{beta t}))
      phi(t, u) = (b/a) * log(1 - (a/beta)*u*(1 - e^{beta t}))
  for drift-only immigration b.
"""

import math

import numpy as np
import pytest

from cbilim import (
    BranchingMechanism,
    ExponentialDensity,
    ImmigrationMechanism,
    laplace_exponent,
    phi,
    psi,
    solve_riccati,
    transient_laplace,
)

from helpers import random_instance, random_subcritical_branching


def _ou(lam):
    return BranchingMechanism(diffusion=0.0, drift=-lam)


def _ou_phi(b, c, rho, lam, t, u):
    decay = math.exp(-lam * t)
    val = b * u * (1.0 - decay) / lam
    if c is not None:
        val += (c / (rho * lam)) * math.log((rho + u) / (rho + u * decay))
    return val


def test_linear_branching_psi_value():
    # psi(1, 3) with lam = 2
    assert psi(_ou(2.0), 1.0, 3.0) == pytest.approx(3.0 * math.exp(-2.0), rel=1e-9)


def test_linear_branching_phi_with_jump_immigration():
    imm = ImmigrationMechanism(drift=1.0, measure=ExponentialDensity(c=1.0, rho=1.0))
    lam = 2.0
    got = phi(imm, _ou(lam), 1.0, 1.0)
    assert got == pytest.approx(_ou_phi(1.0, 1.0, 1.0, lam, 1.0, 1.0), rel=1e-9)


def test_diffusion_branching_closed_form():
    a, beta = 0.5, -1.0
    bran = BranchingMechanism(diffusion=a, drift=beta)
    imm = ImmigrationMechanism(drift=1.0)
    for t, u in [(1.0, 1.0), (0.3, 4.0), (5.0, 0.7)]:
        grow = 1.0 - (a / beta) * u * (1.0 - math.exp(beta * t))
        want_psi = u * math.exp(beta * t) / grow
        want_phi = (1.0 / a) * math.log(grow)
        res = solve_riccati(imm, bran, t, u)
        assert res.psi == pytest.approx(want_psi, rel=1e-8, abs=1e-10)
        assert res.phi == pytest.approx(want_phi, rel=1e-8, abs=1e-10)


def test_feller_psi_spot_value():
    bran = BranchingMechanism(diffusion=0.5, drift=-1.0)
    want = math.exp(-1.0) / (1.0 + 0.5 * (1.0 - math.exp(-1.0)))
    assert psi(bran, 1.0, 1.0) == pytest.approx(want, rel=1e-9)


def test_trivial_arguments():
    bran = _ou(1.0)
    imm = ImmigrationMechanism(drift=1.0)
    res = solve_riccati(imm, bran, 0.0, 2.5)
    assert res.psi == 2.5 and res.phi == 0.0 and res.steps == 0
    res = solve_riccati(imm, bran, 3.0, 0.0)
    assert res.psi == 0.0 and res.phi == 0.0
    # zero immigration accumulates nothing
    assert phi(ImmigrationMechanism(drift=0.0), bran, 2.0, 1.0) == 0.0


def test_transient_laplace_spot_value():
    # drift-only immigration over linear branching, started at zero
    imm = ImmigrationMechanism(drift=1.0)
    got = transient_laplace(imm, _ou(1.0), 0.0, 1.0, 1.0)
    assert got == pytest.approx(math.exp(-(1.0 - math.exp(-1.0))), rel=1e-9)


def test_transient_laplace_initial_state_factor():
    imm = ImmigrationMechanism(drift=0.5)
    bran = BranchingMechanism(diffusion=0.5, drift=-1.0)
    t, u, x0 = 0.8, 1.7, 2.3
    res = solve_riccati(imm, bran, t, u)
    want = math.exp(-res.phi - x0 * res.psi)
    assert transient_laplace(imm, bran, x0, t, u) == pytest.approx(want, rel=1e-12)


def test_validation():
    bran = _ou(1.0)
    with pytest.raises(ValueError):
        solve_riccati(None, bran, -1.0, 1.0)
    with pytest.raises(ValueError):
        solve_riccati(None, bran, 1.0, -1.0)
    with pytest.raises(ValueError):
        transient_laplace(ImmigrationMechanism(drift=1.0), bran, -0.5, 1.0, 1.0)


def test_flow_property_random_instances():
    # psi(t + s, u) = psi(t, psi(s, u))
    rng = np.random.default_rng(5)
    for _ in range(6):
        bran = random_subcritical_branching(rng)
        t, s = rng.uniform(0.2, 2.0, size=2)
        u = rng.uniform(0.1, 8.0)
        direct = psi(bran, t + s, u)
        nested = psi(bran, t, psi(bran, s, u))
        assert direct == pytest.approx(nested, rel=1e-8, abs=1e-8)


def test_psi_decays_monotonically():
    rng = np.random.default_rng(11)
    for _ in range(5):
        bran = random_subcritical_branching(rng)
        u = rng.uniform(0.5, 5.0)
        vals = [psi(bran, t, u) for t in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)]
        assert all(b <= a * (1.0 + 1e-9) + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.1 * vals[0]


def test_phi_increases_towards_limit_exponent():
    imm = ImmigrationMechanism(drift=1.0, measure=ExponentialDensity(c=1.0, rho=1.0))
    bran = _ou(1.0)
    u = 1.0
    target = laplace_exponent(imm, bran, u)  # u + log(1 + u)
    assert target == pytest.approx(1.0 + math.log(2.0), rel=1e-9)
    vals = [phi(imm, bran, t, u) for t in (0.5, 1.0, 2.0, 5.0, 15.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert all(v <= target * (1.0 + 1e-8) for v in vals)
    assert vals[-1] == pytest.approx(target, rel=1e-6)


def test_long_horizon_floor_patch_matches_closed_form():
    # forces the event-stop path: psi hits the floor well before t
    imm = ImmigrationMechanism(drift=1.0, measure=ExponentialDensity(c=1.0, rho=1.0))
    lam = 2.0
    t, u = 60.0, 3.0
    res = solve_riccati(imm, _ou(lam), t, u)
    assert res.psi == pytest.approx(u * math.exp(-lam * t), rel=1e-6, abs=1e-40)
    assert res.phi == pytest.approx(_ou_phi(1.0, 1.0, 1.0, lam, t, u), rel=1e-8)


def test_result_metadata():
    imm = ImmigrationMechanism(drift=1.0)
    res = solve_riccati(imm, BranchingMechanism(diffusion=0.5, drift=-1.0), 1.0, 1.0)
    assert res.steps > 0 and res.nfev > 0
    assert res.error_target > 0.0


def test_random_mixed_instances_stay_finite():
    rng = np.random.default_rng(17)
    for _ in range(10):
        imm, bran = random_instance(rng)
        res = solve_riccati(imm, bran, 2.5, 3.0)
        assert math.isfinite(res.psi) and res.psi >= 0.0
        assert math.isfinite(res.phi) and res.phi >= 0.0
