"""Bipartite state matrices, Schmidt spectra and entanglement measures.

Conventions: the bit split assigns the most significant L/2 bits of a
configuration label to subsystem A, so a full-space vector reshapes directly
into the N_A x N_B state matrix.  Entropies are computed in nats internally;
R1 and the Renyi entropies honor an optional log base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log

import numpy as np

LAMBDA_FLOOR = 1e-30  # regularizes R0 and Q at (near-)separability


class EntangleError(ValueError):
    pass


@dataclass
class StateMatrix:
    C: np.ndarray
    N_A: int
    N_B: int

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        if self.C.shape != (self.N_A, self.N_B):
            raise EntangleError(f"C shape {self.C.shape} != ({self.N_A},{self.N_B})")
        norm2 = float(np.sum(self.C ** 2))
        if abs(norm2 - 1.0) > 1e-10:
            raise EntangleError(f"state not normalized: |C|^2 = {norm2}")


@dataclass
class SchmidtSpectrum:
    lambdas: np.ndarray  # descending, nonnegative, sums to 1

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if np.any(lam < -1e-12):
            raise EntangleError("negative Schmidt eigenvalue")
        if abs(lam.sum() - 1.0) > 1e-8:
            raise EntangleError(f"Schmidt eigenvalues sum to {lam.sum()}")
        self.lambdas = lam


@dataclass
class EntanglementRecord:
    R1: float                       # von Neumann entropy (log_base units)
    R0: float                       # -sum ln lambda (nats, floored)
    Q: float                        # sum lambda (ln lambda)^2 (nats^2)
    renyi: dict = field(default_factory=dict)
    energy: float = float("nan")
    log_base: float = np.e


def state_matrix(vector: np.ndarray, N_A: int, N_B: int,
                 basis=None) -> StateMatrix:
    """Reshape an eigenvector into the state matrix C_{kl} = psi_{(k,l)}.

    ``vector`` either lives on the full N_A*N_B space (then ``basis`` may be
    omitted) or on a magnetization sector, in which case ``basis`` supplies
    the configuration labels and the vector is zero-embedded first.
    """
    vector = np.asarray(vector, dtype=float)
    N = N_A * N_B
    if basis is not None and len(vector) != N:
        if len(vector) != len(basis):
            raise EntangleError("vector length matches neither basis nor full space")
        full = np.zeros(N)
        full[[int(lab, 2) for lab in basis.labels]] = vector
        vector = full
    if len(vector) != N:
        raise EntangleError(f"vector length {len(vector)} != N_A*N_B = {N}")
    if abs(np.linalg.norm(vector) - 1.0) > 1e-8:
        raise EntangleError("vector not normalized")
    return StateMatrix(vector.reshape(N_A, N_B), N_A, N_B)


def schmidt_spectrum(state: StateMatrix) -> SchmidtSpectrum:
    """Eigenvalues of rho_A = C C^T, clipped at 0, descending."""
    lam = np.linalg.eigvalsh(state.C @ state.C.T)[::-1]
    drift = abs(lam.sum() - 1.0)
    if drift > 1e-8:
        raise EntangleError(f"Schmidt trace drift {drift:.2e}; upstream bug")
    lam = np.clip(lam, 0.0, None)
    lam /= lam.sum()
    return SchmidtSpectrum(lam)


def measures(spectrum: SchmidtSpectrum, log_base: float = np.e,
             alphas: tuple[float, ...] = (), energy: float = float("nan")
             ) -> EntanglementRecord:
    """All entanglement measures of one Schmidt spectrum.

    R1 = -sum lam log lam (0 log 0 := 0, in ``log_base`` units),
    R0 = -sum ln max(lam, floor), Q = sum lam (ln lam)^2,
    R_alpha = ln(sum lam^alpha)/(1 - alpha).
    """
    lam = spectrum.lambdas
    safe = np.maximum(lam, LAMBDA_FLOOR)
    ln_lam = np.log(safe)
    r1_nats = float(-np.sum(np.where(lam > 0, lam * ln_lam, 0.0)))
    r0 = float(-np.sum(ln_lam))
    q = float(np.sum(lam * ln_lam ** 2))
    renyi = {}
    for a in alphas:
        if a == 1:
            renyi[a] = r1_nats / log(log_base)
        else:
            renyi[a] = float(np.log(np.sum(safe ** a)) / (1.0 - a)) / log(log_base)
    return EntanglementRecord(R1=r1_nats / log(log_base), R0=r0, Q=q,
                              renyi=renyi, energy=energy, log_base=log_base)


def haar_sample(N_A: int, N_B: int, rng: np.random.Generator) -> StateMatrix:
    """Ergodic reference state: i.i.d. normal entries, unit Frobenius norm."""
    C = rng.standard_normal((N_A, N_B))
    C /= np.linalg.norm(C)
    return StateMatrix(C, N_A, N_B)


def page_value(N_A: int, N_B: int) -> float:
    """Haar-average von Neumann entropy, log N_A - N_A/(2 N_B), in nats."""
    return log(N_A) - N_A / (2.0 * N_B)


def ensemble_stats(records: list[EntanglementRecord]) -> dict:
    """Unbiased sample moments over an ensemble of records (R1 in nats)."""
    if len(records) < 2:
        raise EntangleError("need >= 2 records for ensemble statistics")
    to_nats = np.array([log(r.log_base) for r in records])
    r1 = np.array([r.R1 for r in records]) * to_nats
    r0 = np.array([r.R0 for r in records])
    q = np.array([r.Q for r in records])
    n = len(records)
    mean_r1 = float(r1.mean())
    cov = float((r0 * r1).sum() / (n - 1) - r0.sum() * r1.sum() / (n * (n - 1)))
    return {
        "mean_R1": mean_r1,
        "var_R1": float(r1.var(ddof=1)),
        "mean_R0": float(r0.mean()),
        "mean_Q": float(q.mean()),
        "cov_R0_R1": cov,
        "mean_R1sq": float((r1 ** 2).mean()),
        "n": n,
    }
