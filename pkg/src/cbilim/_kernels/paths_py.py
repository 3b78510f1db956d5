"""Reference path kernel in pure Python.

Draw-for-draw identical to the compiled kernel: same bit generators, same
call order into numpy's C distribution routines, same floating-point
expression shapes.  Keep the two files in sync; equivalence is enforced by
tests that compare terminal states bitwise.
"""

from __future__ import annotations

import math

import numpy as np


def _sample(kind, params, xs, aux, rng):
    # one jump size conditioned on exceeding the cutoff
    if kind == 1:  # discrete atoms, inverse transform on cumulative weights
        u = rng.random()
        lo, hi = 0, len(aux) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if aux[mid] >= u:
                hi = mid
            else:
                lo = mid + 1
        return xs[lo]
    if kind == 2:  # exponential density: memoryless beyond the cutoff
        return params[1] + rng.standard_exponential() / params[0]
    if kind == 3:  # tempered stable: Pareto proposal, exponential thinning
        a, rho, cutoff = params[0], params[1], params[2]
        pexp = -1.0 / a
        tries = 0
        while True:
            u = rng.random()
            x = cutoff * u**pexp
            if rho == 0.0:
                return x
            v = rng.random()
            if v <= math.exp(-rho * (x - cutoff)):
                return x
            tries += 1
            if tries >= 1000000:
                raise RuntimeError("tempered-stable rejection sampler stalled")
    if kind == 4:  # tabulated tail: piecewise-linear inverse, terminal atom
        u = rng.random()
        v = u * aux[0]
        n = len(aux)
        if v <= aux[n - 1]:
            return xs[n - 1]
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if aux[mid] >= v:
                lo = mid
            else:
                hi = mid
        den = aux[lo] - aux[hi]
        if den <= 0.0:
            return xs[hi]
        return xs[lo] + (aux[lo] - v) / den * (xs[hi] - xs[lo])
    raise ValueError(f"unknown sampler kind {kind}")


def run_paths(
    bitgens,
    x0,
    nsteps,
    dt,
    b_eff,
    beta_eff,
    alpha,
    imm_kind,
    imm_rate,
    imm_params,
    imm_xs,
    imm_aux,
    br_kind,
    br_rate,
    br_params,
    br_xs,
    br_aux,
):
    out = np.empty(len(bitgens), dtype=np.float64)
    imm_params = tuple(float(p) for p in imm_params)
    br_params = tuple(float(p) for p in br_params)
    imm_lam = imm_rate * dt
    br_coef = br_rate * dt
    sqrtdt = math.sqrt(dt)
    two_alpha = 2.0 * alpha
    for i, bg in enumerate(bitgens):
        rng = np.random.Generator(bg)
        x = float(x0)
        for _ in range(nsteps):
            z = rng.standard_normal() if alpha > 0.0 else 0.0
            acc = 0.0
            if imm_rate > 0.0:
                n = rng.poisson(imm_lam)
                for _ in range(n):
                    acc += _sample(imm_kind, imm_params, imm_xs, imm_aux, rng)
            if br_rate > 0.0 and x > 0.0:
                n = rng.poisson(br_coef * x)
                for _ in range(n):
                    acc += _sample(br_kind, br_params, br_xs, br_aux, rng)
            x = x + (b_eff + beta_eff * x) * dt + math.sqrt(two_alpha * x) * sqrtdt * z + acc
            if x < 0.0:
                x = 0.0
        out[i] = x
    return out
