"""Schmidt-eigenvalue Langevin ensemble and the entropy moment equations.

The Fokker-Planck dynamics of the Schmidt eigenvalues is integrated as an
Ito ensemble with drift

    A_n = beta [ sum_{m != n} lam_n/(lam_n - lam_m) + nu_e - eta lam_n ],

nu_e = (N_B - N_A + 1)/2, eta = N_A N_B / 2, and diffusion matrix
D = diag(lam) - lam lam^T (per-step noise covariance 2 D dLambda).  The
compiled kernel is used when available; set ``ENTFLOW_FORCE_PYTHON=1`` to
force the numpy fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..entangle import SchmidtSpectrum, ensemble_stats, measures

if os.environ.get("ENTFLOW_FORCE_PYTHON"):
    from . import _reference as _backend
    BACKEND = "python"
else:
    try:
        from . import _kernel as _backend  # type: ignore
        BACKEND = "cython"
    except ImportError:
        from . import _reference as _backend
        BACKEND = "python"

EPS_DEGENERACY = 1e-12
_BLOCK_STEPS = 256


class LangevinError(RuntimeError):
    pass


@dataclass
class LangevinConfig:
    N_A: int
    N_B: int
    ensemble_size: int
    lambda_grid: np.ndarray           # ascending output checkpoints (Lambda)
    d_lambda: float | None = None     # default 1e-5 * 2/N
    dyson_beta: int = 1
    init: str = "weak_separability"   # or "uniform" / "custom"
    q: float = 2.0                    # weak-separability exponent, q > 1
    lambda0: np.ndarray | None = None  # for init == "custom"
    seed: int = 0

    def __post_init__(self):
        self.lambda_grid = np.asarray(self.lambda_grid, dtype=float)
        if self.d_lambda is None:
            self.d_lambda = 1e-5 * 2.0 / self.N
        if self.d_lambda <= 0:
            raise LangevinError("d_lambda must be positive")
        if self.init == "weak_separability" and self.q <= 1:
            raise LangevinError("weak separability requires q > 1")
        if np.any(np.diff(self.lambda_grid) <= 0) or np.any(self.lambda_grid < 0):
            raise LangevinError("lambda_grid must be ascending and nonnegative")

    @property
    def N(self) -> int:
        return self.N_A * self.N_B

    @property
    def nu_e(self) -> float:
        # (N_B - N_A + 1)/2: the trace-conserving constant of the
        # simplex-projected Wishart eigenvalue flow.  The opposite sign makes
        # the hard edge at 0 absorbing and collapses the ensemble.
        return (self.N_B - self.N_A + 1) / 2.0

    @property
    def eta(self) -> float:
        return self.N_A * self.N_B / 2.0


@dataclass
class Trajectory:
    checkpoints: list  # [(Lambda, lambda-vector), ...]


@dataclass
class EvolveResult:
    config: LangevinConfig
    lambda_grid: np.ndarray            # includes Lambda = 0
    lambdas: np.ndarray                # (n_checkpoints, n_traj, N_A)
    moments: dict                      # column name -> array over checkpoints
    guard_trips: int = 0

    def trajectories(self) -> list[Trajectory]:
        return [Trajectory([(float(l), self.lambdas[i, t].copy())
                            for i, l in enumerate(self.lambda_grid)])
                for t in range(self.lambdas.shape[1])]


def init_lambda(config: LangevinConfig) -> np.ndarray:
    """Initial Schmidt spectrum, descending, summing to one."""
    n = config.N_A
    if config.init == "uniform":
        lam = np.full(n, 1.0 / n)
    elif config.init == "weak_separability":
        lam = np.full(n, float(n) ** -(config.q + 1.0))
        lam[0] = 1.0 - float(n) ** -config.q
        lam /= lam.sum()
    elif config.init == "custom":
        if config.lambda0 is None:
            raise LangevinError("custom init requires lambda0")
        lam = np.sort(np.asarray(config.lambda0, dtype=float))[::-1].copy()
        lam /= lam.sum()
    else:
        raise LangevinError(f"unknown init {config.init!r}")
    return lam


def drift(lam: np.ndarray, N_A: int, N_B: int, beta: int = 1,
          eps: float = EPS_DEGENERACY,
          d_lambda: float | None = None) -> np.ndarray:
    """Fokker-Planck drift A_n; degenerate pairs regularized to +-eps.

    When ``d_lambda`` is given the denominator floor is raised to the
    per-step diffusive splitting scale sqrt(d_lambda (lam_n + lam_m)), the
    regularization the integrators use."""
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    diff = lam[:, None] - lam[None, :]
    idx = np.arange(n)
    # exact ties break by index order (rows are kept sorted descending) so
    # the regularized pair term stays antisymmetric and conserves the trace
    tie = np.where(idx[:, None] < idx[None, :], 1.0, -1.0)
    sgn = np.where(diff > 0, 1.0, np.where(diff < 0, -1.0, tie))
    floor = eps
    if d_lambda is not None:
        floor = np.maximum(np.sqrt(d_lambda * (lam[:, None] + lam[None, :])),
                           eps)
    reg = sgn * np.maximum(np.abs(diff), floor)
    np.fill_diagonal(reg, 1.0)
    ratio = lam[:, None] / reg
    np.fill_diagonal(ratio, 0.0)
    nu_e = (N_B - N_A + 1) / 2.0  # see LangevinConfig.nu_e
    eta = N_A * N_B / 2.0
    return beta * (ratio.sum(axis=1) + nu_e - eta * lam)


def diffusion_matrix(lam: np.ndarray) -> np.ndarray:
    """D = diag(lam) - lam lam^T; PSD with zero row sums on the simplex."""
    lam = np.asarray(lam, dtype=float)
    return np.diag(lam) - np.outer(lam, lam)


def diffusion_factor(lam: np.ndarray) -> np.ndarray:
    """Analytic B with B B^T = D exactly when sum(lam) = 1:
    B = diag(sqrt(lam)) - lam sqrt(lam)^T."""
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(lam)
    return np.diag(s) - np.outer(lam, s)


def step(lam: np.ndarray, d_lambda: float, rng: np.random.Generator,
         N_A: int | None = None, N_B: int | None = None, beta: int = 1,
         _depth: int = 0) -> np.ndarray:
    """One Euler-Maruyama step; rejected and retried as two half steps when
    any coordinate falls below the blow-up guard -10 sqrt(2 lam d_lambda)."""
    lam = np.asarray(lam, dtype=float)
    if N_A is None:
        N_A = N_B = len(lam)
    if d_lambda == 0:
        return lam.copy()
    if _depth > 30:
        raise LangevinError("step size underflow in blow-up guard")
    a = drift(lam, N_A, N_B, beta, d_lambda=d_lambda)
    xi = rng.standard_normal(len(lam))
    new = lam + a * d_lambda + math.sqrt(2.0 * d_lambda) * (diffusion_factor(lam) @ xi)
    guard = -10.0 * np.sqrt(2.0 * lam * d_lambda)
    if np.any(new < guard):
        half = step(lam, d_lambda / 2.0, rng, N_A, N_B, beta, _depth + 1)
        return step(half, d_lambda / 2.0, rng, N_A, N_B, beta, _depth + 1)
    new = np.abs(new)
    new /= new.sum()
    return np.sort(new)[::-1].copy()


def evolve(config: LangevinConfig, store_trajectories: bool = True) -> EvolveResult:
    """Integrate the trajectory ensemble through the checkpoint grid and
    compute the entropy moment curves at every checkpoint."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    n_traj, n = config.ensemble_size, config.N_A
    lam = np.tile(init_lambda(config), (n_traj, 1))

    grid = config.lambda_grid
    if grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
    checkpoints = np.empty((len(grid), n_traj, n))
    checkpoints[0] = lam
    guard_total = 0

    for i in range(1, len(grid)):
        span = grid[i] - grid[i - 1]
        n_steps = max(1, int(math.ceil(span / config.d_lambda)))
        dt = span / n_steps
        done = 0
        while done < n_steps:
            block = min(_BLOCK_STEPS, n_steps - done)
            noise = rng.standard_normal((block, n_traj, n))
            guard_total += _backend.evolve_block(
                lam, noise, dt, float(config.dyson_beta),
                config.nu_e, config.eta, EPS_DEGENERACY)
            done += block
        checkpoints[i] = lam

    moments = _moment_curves(grid, checkpoints, config.N)
    return EvolveResult(config=config, lambda_grid=grid,
                        lambdas=checkpoints if store_trajectories
                        else checkpoints[-1:],
                        moments=moments, guard_trips=guard_total)


def _moment_curves(grid: np.ndarray, checkpoints: np.ndarray, N: int) -> dict:
    cols = {k: [] for k in
            ("Lambda", "N_Lambda", "mean_R1", "var_R1", "mean_R0", "Q",
             "cov_R0_R1", "q_minus_r1sq", "se_mean_R1", "se_var_R1",
             "se_mean_R0", "se_cov_R0_R1")}
    for i, lam_val in enumerate(grid):
        recs = [measures(SchmidtSpectrum(row)) for row in checkpoints[i]]
        st = ensemble_stats(recs)
        m = st["n"]
        r0 = np.array([r.R0 for r in recs])
        var_r0 = float(r0.var(ddof=1))
        cols["Lambda"].append(float(lam_val))
        cols["N_Lambda"].append(float(N * lam_val))
        cols["mean_R1"].append(st["mean_R1"])
        cols["var_R1"].append(st["var_R1"])
        cols["mean_R0"].append(st["mean_R0"])
        cols["Q"].append(st["mean_Q"])
        cols["cov_R0_R1"].append(st["cov_R0_R1"])
        cols["q_minus_r1sq"].append(st["mean_Q"] - st["mean_R1sq"])
        cols["se_mean_R1"].append(math.sqrt(st["var_R1"] / m))
        cols["se_var_R1"].append(st["var_R1"] * math.sqrt(2.0 / (m - 1)))
        cols["se_mean_R0"].append(math.sqrt(var_r0 / m))
        cols["se_cov_R0_R1"].append(
            math.sqrt((var_r0 * st["var_R1"] + st["cov_R0_R1"] ** 2) / m))
    return {k: np.array(v) for k, v in cols.items()}


def r1_ode_rhs(mean_r1: float, mean_r0: float, N_A: int, N_B: int) -> float:
    """d<R1>/dLambda = alpha + (N_B/2)<R0> - (N_A N_B/2)<R1>, in nats,
    with alpha = 1 - N_A(N_A+1)/2."""
    alpha = 1.0 - N_A * (N_A + 1) / 2.0
    return alpha + N_B / 2.0 * mean_r0 - N_A * N_B / 2.0 * mean_r1


def r1_closed_form(lam: np.ndarray | float, N: int, alpha0: float):
    """Weak-separability particular solution <R1>(Lambda) = alpha0 (1 - e^{-N Lambda/2})."""
    return alpha0 * (1.0 - np.exp(-N * np.asarray(lam, dtype=float) / 2.0))


def var_ode_rhs(var_r1: float, q: float, mean_r1sq: float,
                cov_r0_r1: float, N_A: int, N_B: int) -> float:
    """d<dR1^2>/dLambda = 2(Q - <R1^2>) + N_B cov(R0,R1) - N <dR1^2>."""
    return (2.0 * (q - mean_r1sq) + N_B * cov_r0_r1
            - N_A * N_B * var_r1)


def var_large_lambda(lam: np.ndarray | float, N: int, q_minus_r1sq: float):
    """Large-Lambda asymptote <dR1^2> = 2 (Q - <R1^2>)(1 - e^{-N Lambda})/N."""
    return 2.0 * q_minus_r1sq * (1.0 - np.exp(-N * np.asarray(lam, float))) / N
