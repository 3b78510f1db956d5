# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernel.

Mirrors paths_py.py draw for draw: the two must stay in sync so that
terminal states agree bitwise across backends for identical bit generators.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, pow, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_poisson,
    random_standard_exponential,
    random_standard_normal,
    random_standard_uniform,
)

cnp.import_array()


cdef double _sample(int kind, double[::1] params, double[::1] xs, double[::1] aux,
                    bitgen_t *bg) except -1.0:
    cdef double u, v, x, den, a, rho, cutoff, pexp
    cdef Py_ssize_t lo, hi, mid, n
    cdef long tries
    if kind == 1:
        u = random_standard_uniform(bg)
        lo = 0
        hi = aux.shape[0] - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if aux[mid] >= u:
                hi = mid
            else:
                lo = mid + 1
        return xs[lo]
    if kind == 2:
        return params[1] + random_standard_exponential(bg) / params[0]
    if kind == 3:
        a = params[0]
        rho = params[1]
        cutoff = params[2]
        pexp = -1.0 / a
        tries = 0
        while True:
            u = random_standard_uniform(bg)
            x = cutoff * pow(u, pexp)
            if rho == 0.0:
                return x
            v = random_standard_uniform(bg)
            if v <= exp(-rho * (x - cutoff)):
                return x
            tries += 1
            if tries >= 1000000:
                raise RuntimeError("tempered-stable rejection sampler stalled")
    if kind == 4:
        u = random_standard_uniform(bg)
        v = u * aux[0]
        n = aux.shape[0]
        if v <= aux[n - 1]:
            return xs[n - 1]
        lo = 0
        hi = n - 1
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
    double x0,
    Py_ssize_t nsteps,
    double dt,
    double b_eff,
    double beta_eff,
    double alpha,
    int imm_kind,
    double imm_rate,
    imm_params_o,
    imm_xs_o,
    imm_aux_o,
    int br_kind,
    double br_rate,
    br_params_o,
    br_xs_o,
    br_aux_o,
):
    cdef double[::1] imm_params = np.ascontiguousarray(imm_params_o, dtype=np.float64)
    cdef double[::1] imm_xs = np.ascontiguousarray(imm_xs_o, dtype=np.float64)
    cdef double[::1] imm_aux = np.ascontiguousarray(imm_aux_o, dtype=np.float64)
    cdef double[::1] br_params = np.ascontiguousarray(br_params_o, dtype=np.float64)
    cdef double[::1] br_xs = np.ascontiguousarray(br_xs_o, dtype=np.float64)
    cdef double[::1] br_aux = np.ascontiguousarray(br_aux_o, dtype=np.float64)

    cdef Py_ssize_t npaths = len(bitgens)
    out = np.empty(npaths, dtype=np.float64)
    cdef double[::1] out_v = out

    cdef double imm_lam = imm_rate * dt
    cdef double br_coef = br_rate * dt
    cdef double sqrtdt = sqrt(dt)
    cdef double two_alpha = 2.0 * alpha

    cdef bitgen_t *bg
    cdef double x, z, acc
    cdef Py_ssize_t i, s
    cdef long long n, j

    for i in range(npaths):
        capsule = bitgens[i].capsule
        bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        x = x0
        for s in range(nsteps):
            z = random_standard_normal(bg) if alpha > 0.0 else 0.0
            acc = 0.0
            if imm_rate > 0.0:
                n = random_poisson(bg, imm_lam)
                for j in range(n):
                    acc += _sample(imm_kind, imm_params, imm_xs, imm_aux, bg)
            if br_rate > 0.0 and x > 0.0:
                n = random_poisson(bg, br_coef * x)
                for j in range(n):
                    acc += _sample(br_kind, br_params, br_xs, br_aux, bg)
            x = x + (b_eff + beta_eff * x) * dt + sqrt(two_alpha * x) * sqrtdt * z + acc
            if x < 0.0:
                x = 0.0
        out_v[i] = x
    return out
