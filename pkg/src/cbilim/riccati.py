"""Transient Laplace transforms via the generalized Riccati flow.

For an affine positive process with immigration exponent F and branching
exponent R, the Laplace transform of the state at time t is

    E_x[exp(-u * X_t)] = exp(-phi(t, u) - x * psi(t, u)),

where psi solves  d/dt psi = R(psi), psi(0) = u  and phi accumulates
phi(t, u) = integral of F(psi(s, u)) ds over [0, t].  Both are computed with
an adaptive embedded Runge-Kutta 5(4) pair at tight tolerances.

For subcritical mechanisms psi decays towards zero; once it falls below a
floor the integration stops and the remaining contribution is patched in
with the linearization of R at zero, which keeps long horizons cheap and
avoids needlessly small steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError
from .mechanisms import BranchingMechanism, ImmigrationMechanism

__all__ = ["RiccatiResult", "solve_riccati", "psi", "phi", "transient_laplace"]

_PSI_FLOOR = 1e-12


@dataclass(frozen=True)
class RiccatiResult:
    """Solver output at a single (t, u) query point."""

    psi: float
    phi: float
    steps: int
    nfev: int
    error_target: float  # accuracy goal the adaptive controller enforced


def solve_riccati(
    imm: ImmigrationMechanism | None,
    bran: BranchingMechanism,
    t: float,
    u: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    psi_floor: float = _PSI_FLOOR,
) -> RiccatiResult:
    """Solve for psi(t, u) and, if ``imm`` is given, phi(t, u)."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if u < 0.0:
        raise ValueError("u must be nonnegative")
    with_phi = imm is not None
    if t == 0.0 or u == 0.0:
        return RiccatiResult(psi=u, phi=0.0, steps=0, nfev=0, error_target=atol)

    if with_phi:

        def rhs(_t, y):
            p = max(y[0], 0.0)
            return (bran.exponent(p), imm.exponent(p))

        y0 = (u, 0.0)
    else:

        def rhs(_t, y):
            return (bran.exponent(max(y[0], 0.0)),)

        y0 = (u,)

    def hit_floor(_t, y):
        return y[0] - psi_floor

    hit_floor.terminal = True
    hit_floor.direction = -1.0

    sol = solve_ivp(
        rhs,
        (0.0, t),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        events=hit_floor,
        dense_output=False,
    )
    if sol.status == -1:
        raise NumericError(f"Riccati integration failed: {sol.message}")

    p_end = float(sol.y[0, -1])
    f_end = float(sol.y[1, -1]) if with_phi else 0.0
    if sol.status == 1:  # stopped at the floor; patch the linearized tail
        t_star = float(sol.t_events[0][0])
        dt = t - t_star
        rate = bran.mean_rate()
        if rate < 0.0:
            decay = math.exp(rate * dt)
            if with_phi:
                f_end += imm.exponent(p_end) * -math.expm1(rate * dt) / -rate
            p_end *= decay
        else:
            if with_phi:
                f_end += imm.exponent(p_end) * dt

    if p_end < -atol:
        raise NumericError(f"psi went negative beyond tolerance: {p_end}")
    return RiccatiResult(
        psi=max(p_end, 0.0),
        phi=f_end,
        steps=len(sol.t) - 1,
        nfev=int(sol.nfev),
        error_target=atol + rtol * max(abs(u), abs(p_end)),
    )


def psi(bran: BranchingMechanism, t: float, u: float, **kw) -> float:
    """State-dependence factor psi(t, u) of the transient transform."""
    return solve_riccati(None, bran, t, u, **kw).psi


def phi(
    imm: ImmigrationMechanism, bran: BranchingMechanism, t: float, u: float, **kw
) -> float:
    """Immigration accumulator phi(t, u) of the transient transform."""
    return solve_riccati(imm, bran, t, u, **kw).phi


def transient_laplace(
    imm: ImmigrationMechanism,
    bran: BranchingMechanism,
    x0: float,
    t: float,
    u: float,
    **kw,
) -> float:
    """E[exp(-u * X_t)] for the process started at ``x0 >= 0``."""
    if x0 < 0.0:
        raise ValueError("initial state must be nonnegative")
    res = solve_riccati(imm, bran, t, u, **kw)
    return float(np.exp(-res.phi - x0 * res.psi))
