"""Compare the compiled Langevin kernel against the pure-numpy fallback.

Runs the same trajectory ensemble through both backends on identical noise
and reports wall time, speedup, and the maximum deviation between the final
spectra (the two integrators consume the same noise stream, so they should
agree to rounding).

Usage:  python3 benchmarks/bench_langevin.py [--traj 500] [--steps 2000]
"""

import argparse
import time

import numpy as np

from entflow.dynamics import core, _reference


def run_backend(evolve_block, lam0, noise_blocks, dt, nu_e, eta):
    lam = lam0.copy()
    t0 = time.perf_counter()
    trips = 0
    for noise in noise_blocks:
        trips += evolve_block(lam, noise, dt, 1.0, nu_e, eta,
                              core.EPS_DEGENERACY)
    return lam, time.perf_counter() - t0, trips


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--traj", type=int, default=500)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--n", type=int, default=8, help="N_A = N_B")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n = args.n
    cfg = core.LangevinConfig(N_A=n, N_B=n, ensemble_size=args.traj,
                              lambda_grid=np.array([1.0]), seed=args.seed)
    lam0 = np.tile(core.init_lambda(cfg), (args.traj, 1))
    dt = cfg.d_lambda
    rng = np.random.default_rng(args.seed)
    block = 256
    noise_blocks = [rng.standard_normal((min(block, args.steps - s),
                                         args.traj, n))
                    for s in range(0, args.steps, block)]

    print(f"backend in use: {core.BACKEND}")
    print(f"{args.traj} trajectories x {args.steps} steps, N_A=N_B={n}, "
          f"d_lambda={dt:.2e}")

    lam_k, t_k, trips_k = run_backend(core._backend.evolve_block, lam0,
                                      noise_blocks, dt, cfg.nu_e, cfg.eta)
    lam_r, t_r, trips_r = run_backend(_reference.evolve_block, lam0,
                                      noise_blocks, dt, cfg.nu_e, cfg.eta)

    rate_k = args.traj * args.steps / t_k
    rate_r = args.traj * args.steps / t_r
    print(f"active backend : {t_k:8.3f} s  ({rate_k:10.0f} traj-steps/s, "
          f"{trips_k} guard trips)")
    print(f"numpy fallback : {t_r:8.3f} s  ({rate_r:10.0f} traj-steps/s, "
          f"{trips_r} guard trips)")
    print(f"speedup        : {t_r / t_k:8.2f}x")
    print(f"max |lambda diff| after {args.steps} steps: "
          f"{np.max(np.abs(lam_k - lam_r)):.3e}")


if __name__ == "__main__":
    main()
