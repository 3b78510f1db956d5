"""Monte Carlo engine: backend agreement, exactness on degenerate inputs,
agreement with the transient transform, and configuration validation."""

import math

import numpy as np
import pytest

from cbilim import (
    BranchingMechanism,
    ExponentialDensity,
    FiniteAtoms,
    ImmigrationMechanism,
    SimConfig,
    SimResult,
    TabulatedTail,
    TemperedStable,
    empirical_laplace,
    simulate,
    transient_laplace,
)
from cbilim._kernels import BACKEND
from cbilim.errors import ConfigError

needs_compiled = pytest.mark.skipif(
    BACKEND != "cython", reason="compiled kernel unavailable"
)


def _feller(b=1.0):
    return (
        ImmigrationMechanism(drift=b),
        BranchingMechanism(diffusion=0.5, drift=-1.0),
    )


# ---------------------------------------------------------------------------
# backend agreement


@needs_compiled
@pytest.mark.parametrize(
    "imm,bran",
    [
        _feller(),
        (
            ImmigrationMechanism(drift=0.2, measure=ExponentialDensity(c=1.0, rho=2.0)),
            BranchingMechanism(
                diffusion=0.0,
                drift=-1.0,
                measure=FiniteAtoms(weights=(1.0, 0.25), locations=(0.5, 2.0)),
            ),
        ),
        (
            ImmigrationMechanism(drift=0.0, measure=TemperedStable(c=0.3, alpha=0.5, rho=1.0)),
            BranchingMechanism(diffusion=0.2, drift=-1.5),
        ),
        (
            ImmigrationMechanism(
                drift=0.0, measure=TabulatedTail(xs=(0.5, 1.0, 2.0), tails=(0.8, 0.2, 0.0))
            ),
            BranchingMechanism(diffusion=0.0, drift=-0.5, measure=ExponentialDensity(c=0.5, rho=1.0)),
        ),
    ],
    ids=["diffusion", "finite-jumps", "infinite-activity", "tabulated"],
)
def test_backends_bit_identical(imm, bran):
    cfg = SimConfig(
        immigration=imm, branching=bran, horizon=0.5, dt=0.01, paths=64, seed=7, x0=0.4
    )
    py = simulate(cfg, backend="python")
    cy = simulate(cfg, backend="cython")
    assert py.backend == "python" and cy.backend == "cython"
    assert np.array_equal(py.terminal, cy.terminal)


# ---------------------------------------------------------------------------
# degenerate configurations are exact


def test_zero_immigration_from_zero_stays_at_zero():
    imm = ImmigrationMechanism(drift=0.0)
    bran = BranchingMechanism(
        diffusion=0.5, drift=-1.0, measure=ExponentialDensity(c=1.0, rho=1.0)
    )
    out = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=1.0, dt=0.05, paths=32, seed=1)
    )
    assert np.all(out.terminal == 0.0)


def test_deterministic_drift_follows_the_ode():
    # no diffusion, no jumps: every path is the Euler solution of
    # x' = b + beta x, and the scheme's error is first order in dt
    imm = ImmigrationMechanism(drift=2.0)
    bran = BranchingMechanism(diffusion=0.0, drift=-1.0)
    cfg = SimConfig(
        immigration=imm, branching=bran, horizon=2.0, dt=1e-3, paths=8, seed=3, x0=0.25
    )
    out = simulate(cfg)
    exact = 2.0 * (1.0 - math.exp(-2.0)) + 0.25 * math.exp(-2.0)
    assert np.ptp(out.terminal) == 0.0
    assert out.terminal[0] == pytest.approx(exact, abs=5e-3)


def test_euler_error_halves_with_the_step():
    imm = ImmigrationMechanism(drift=2.0)
    bran = BranchingMechanism(diffusion=0.0, drift=-1.0)
    exact = 2.0 * (1.0 - math.exp(-1.0))

    def err(dt):
        cfg = SimConfig(
            immigration=imm, branching=bran, horizon=1.0, dt=dt, paths=1, seed=0
        )
        return abs(float(simulate(cfg).terminal[0]) - exact)

    ratio = err(0.01) / err(0.005)
    assert 1.8 < ratio < 2.2


# ---------------------------------------------------------------------------
# agreement with the transient transform


def test_matches_transient_transform_diffusion():
    imm, bran = _feller()
    cfg = SimConfig(
        immigration=imm,
        branching=bran,
        horizon=2.0,
        dt=1e-3,
        paths=2000,
        seed=2026,
        x0=0.3,
        u_values=(0.5, 1.5),
    )
    out = simulate(cfg)
    for u, est, se in out.laplace:
        want = transient_laplace(imm, bran, 0.3, 2.0, u)
        assert abs(est - want) <= 4.0 * se + 2e-3


def test_matches_transient_transform_with_jumps():
    imm = ImmigrationMechanism(drift=0.5, measure=ExponentialDensity(c=1.0, rho=2.0))
    bran = BranchingMechanism(
        diffusion=0.0, drift=-1.0, measure=FiniteAtoms(weights=(1.0,), locations=(0.5,))
    )
    cfg = SimConfig(
        immigration=imm,
        branching=bran,
        horizon=2.0,
        dt=1e-3,
        paths=2000,
        seed=99,
        u_values=(1.0,),
    )
    out = simulate(cfg)
    u, est, se = out.laplace[0]
    want = transient_laplace(imm, bran, 0.0, 2.0, u)
    assert abs(est - want) <= 4.0 * se + 2e-3


def test_matches_transient_transform_infinite_activity():
    imm = ImmigrationMechanism(
        drift=0.0, measure=TemperedStable(c=0.3, alpha=0.5, rho=1.0)
    )
    bran = BranchingMechanism(diffusion=0.0, drift=-1.0)
    cfg = SimConfig(
        immigration=imm,
        branching=bran,
        horizon=2.0,
        dt=1e-3,
        paths=1500,
        seed=11,
        cutoff=1e-3,
        u_values=(1.0,),
    )
    out = simulate(cfg)
    u, est, se = out.laplace[0]
    want = transient_laplace(imm, bran, 0.0, 2.0, u)
    assert abs(est - want) <= 4.0 * se + 2e-3


# ---------------------------------------------------------------------------
# reproducibility


def test_seed_reproducibility_and_distinctness():
    imm, bran = _feller()
    mk = lambda seed: SimConfig(
        immigration=imm, branching=bran, horizon=0.5, dt=0.01, paths=50, seed=seed
    )
    a = simulate(mk(5)).terminal
    b = simulate(mk(5)).terminal
    c = simulate(mk(6)).terminal
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_paths_are_independent_streams():
    # first path is unchanged when more paths are appended (per-path spawning)
    imm, bran = _feller()
    short = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=0.5, dt=0.01, paths=3, seed=42)
    ).terminal
    long = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=0.5, dt=0.01, paths=6, seed=42)
    ).terminal
    assert np.array_equal(short, long[:3])


# ---------------------------------------------------------------------------
# bookkeeping


def test_step_count_rounds_up():
    imm, bran = _feller()
    out = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=1.0, dt=0.3, paths=1, seed=0)
    )
    assert out.nsteps == 4
    assert out.step == pytest.approx(0.25)
    even = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=1.0, dt=0.25, paths=1, seed=0)
    )
    assert even.nsteps == 4


def test_summary_keys_and_values():
    imm, bran = _feller()
    out = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=0.5, dt=0.05, paths=40, seed=8)
    )
    s = out.summary()
    assert set(s) == {"paths", "mean", "sd", "min", "max"}
    assert s["paths"] == 40
    assert s["mean"] == pytest.approx(float(np.mean(out.terminal)))
    assert s["min"] <= s["mean"] <= s["max"]


def test_empirical_laplace_basics():
    arr = np.array([0.0, 1.0, 2.0])
    est, se = empirical_laplace(arr, 0.0)
    assert est == 1.0 and se == 0.0
    est, se = empirical_laplace(np.array([3.0]), 2.0)
    assert est == pytest.approx(math.exp(-6.0)) and se == 0.0
    imm, bran = _feller()
    out = simulate(
        SimConfig(immigration=imm, branching=bran, horizon=0.5, dt=0.05, paths=20, seed=8)
    )
    direct = empirical_laplace(out, 1.0)
    assert direct == empirical_laplace(out.terminal, 1.0)
    assert isinstance(out, SimResult)


# ---------------------------------------------------------------------------
# validation


def test_config_validation_messages():
    imm, bran = _feller()
    with pytest.raises(ConfigError, match="horizon"):
        SimConfig(immigration=imm, branching=bran, horizon=0.0, dt=0.1, paths=1, seed=0)
    with pytest.raises(ConfigError, match="dt"):
        SimConfig(immigration=imm, branching=bran, horizon=1.0, dt=2.0, paths=1, seed=0)
    with pytest.raises(ConfigError, match="path"):
        SimConfig(immigration=imm, branching=bran, horizon=1.0, dt=0.1, paths=0, seed=0)
    with pytest.raises(ConfigError, match="nonnegative"):
        SimConfig(
            immigration=imm, branching=bran, horizon=1.0, dt=0.1, paths=1, seed=0, x0=-1.0
        )
    with pytest.raises(ConfigError, match="u values"):
        SimConfig(
            immigration=imm,
            branching=bran,
            horizon=1.0,
            dt=0.1,
            paths=1,
            seed=0,
            u_values=(-0.5,),
        )


def test_refuses_supercritical_branching():
    imm = ImmigrationMechanism(drift=1.0)
    up = BranchingMechanism(diffusion=0.5, drift=2.0)
    with pytest.raises(ConfigError, match="no stationary target"):
        SimConfig(immigration=imm, branching=up, horizon=1.0, dt=0.1, paths=1, seed=0)


def test_requires_cutoff_for_infinite_activity():
    imm = ImmigrationMechanism(
        drift=0.0, measure=TemperedStable(c=1.0, alpha=0.5, rho=1.0)
    )
    bran = BranchingMechanism(diffusion=0.0, drift=-1.0)
    with pytest.raises(ConfigError, match="cutoff"):
        SimConfig(
            immigration=imm,
            branching=bran,
            horizon=1.0,
            dt=0.1,
            paths=1,
            seed=0,
            cutoff=0.0,
        )
