# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loop of the Schmidt-eigenvalue Langevin integrator.

Mirrors entflow.dynamics._reference.evolve_block: Euler-Maruyama steps with
the analytic noise factorization B = diag(sqrt(lam)) - lam sqrt(lam)^T,
reflection at zero, renormalization to the simplex and descending re-sort.
"""

import numpy as np
cimport numpy as cnp

from libc.math cimport sqrt, fabs


def evolve_block(cnp.float64_t[:, ::1] lam, cnp.float64_t[:, :, ::1] noise,
                 double dt, double beta, double nu_e, double eta, double eps):
    cdef Py_ssize_t n_steps = noise.shape[0]
    cdef Py_ssize_t n_traj = lam.shape[0]
    cdef Py_ssize_t n = lam.shape[1]
    cdef Py_ssize_t t, i, j, m, k
    cdef double amp = sqrt(2.0 * dt)
    cdef double coul, d, s, total, tmp, drift, new_j, f
    cdef long guard = 0

    cdef cnp.float64_t[::1] work = np.empty(n)
    cdef cnp.float64_t[::1] sq = np.empty(n)

    for t in range(n_steps):
        for i in range(n_traj):
            s = 0.0
            for j in range(n):
                sq[j] = sqrt(lam[i, j])
                s += sq[j] * noise[t, i, j]
            total = 0.0
            for j in range(n):
                coul = 0.0
                for m in range(n):
                    if m == j:
                        continue
                    d = lam[i, j] - lam[i, m]
                    # denominator floor at the diffusive splitting scale
                    # sqrt(lam dt) keeps near-degenerate kicks physical
                    f = sqrt(dt * (lam[i, j] + lam[i, m]))
                    if f < eps:
                        f = eps
                    if fabs(d) < f:
                        if d > 0.0:
                            d = f
                        elif d < 0.0:
                            d = -f
                        else:
                            # rows sorted descending: ties follow index order
                            d = f if j < m else -f
                    coul += lam[i, j] / d
                drift = beta * (coul + nu_e - eta * lam[i, j])
                new_j = (lam[i, j] + drift * dt
                         + amp * (sq[j] * noise[t, i, j] - lam[i, j] * s))
                if new_j < -10.0 * amp * sq[j]:
                    guard += 1
                if new_j < 0.0:
                    new_j = -new_j
                work[j] = new_j
                total += new_j
            # renormalize and insertion-sort descending (rows nearly sorted)
            for j in range(n):
                work[j] /= total
            for j in range(1, n):
                tmp = work[j]
                k = j
                while k > 0 and work[k - 1] < tmp:
                    work[k] = work[k - 1]
                    k -= 1
                work[k] = tmp
            for j in range(n):
                lam[i, j] = work[j]
    return int(guard)
