"""Pure-numpy backend for the Schmidt-eigenvalue Langevin integrator.

Same block contract as the compiled kernel: advance every trajectory by
``noise.shape[0]`` Euler-Maruyama steps of size ``dt``, in place.  Negative
excursions are reflected at zero (clipping would absorb coordinates at the
hard edge), then the simplex constraint is restored by renormalization and
the coordinates are re-sorted descending.

The noise uses the exact analytic factorization of D = diag(lam) - lam lam^T
on the simplex: B = diag(sqrt(lam)) - lam sqrt(lam)^T satisfies B B^T = D,
so one matrix-vector product per step replaces an eigendecomposition.
"""

from __future__ import annotations

import numpy as np


def evolve_block(lam: np.ndarray, noise: np.ndarray, dt: float,
                 beta: float, nu_e: float, eta: float, eps: float) -> int:
    """Advance ``lam`` (n_traj, n) through len(noise) steps; returns the
    number of blow-up-guard trips (lambda' below -10 sqrt(2 lambda dt))."""
    n_traj, n = lam.shape
    idx = np.arange(n)
    # rows are kept sorted descending, so the sign of lam_n - lam_m is fixed
    # by the index order; ties regularize consistently with that order
    sgn = np.sign(idx[None, :, None] - idx[None, None, :]) * -1.0
    guard = 0
    amp = np.sqrt(2.0 * dt)
    for xi in noise:
        diff = lam[:, :, None] - lam[:, None, :]
        # near-degenerate pairs split diffusively at scale sqrt(lam dt); a
        # fixed tiny floor would give unphysical O(lam/eps) kicks, so the
        # denominator floor tracks the per-step splitting scale
        floor = np.maximum(np.sqrt(dt * (lam[:, :, None] + lam[:, None, :])),
                           eps)
        reg = sgn * np.maximum(np.abs(diff), floor)
        reg[:, idx, idx] = 1.0  # dummy, masked out below
        ratio = lam[:, :, None] / reg
        ratio[:, idx, idx] = 0.0
        drift = beta * (ratio.sum(axis=2) + nu_e - eta * lam)

        sqrt_lam = np.sqrt(lam)
        s = np.einsum("ij,ij->i", sqrt_lam, xi)
        new = lam + drift * dt + amp * (sqrt_lam * xi - lam * s[:, None])

        guard += int(np.count_nonzero(new < -10.0 * amp * sqrt_lam))
        np.abs(new, out=new)
        new /= new.sum(axis=1, keepdims=True)
        new.sort(axis=1)
        lam[:] = new[:, ::-1]
    return guard
