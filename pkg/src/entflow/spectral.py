"""Dense diagonalization, spectral windows around a target energy, and the
spectral inputs to the strength complexity parameter: local mean level
spacing, inverse participation ratio, and the correlation volume Omega_e."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENSE_LIMIT = 4096

OMEGA_ESTIMATORS = ("cross_abs", "cross_raw", "ipr")


class SpectralError(RuntimeError):
    pass


@dataclass
class EigenWindow:
    """Eigenpairs nearest a target energy plus their spectral summaries."""

    target_E: float
    eigenvalues: np.ndarray          # ascending, length N_f
    eigenvectors: np.ndarray         # (N, N_f) unit-norm columns
    N: int                           # full space dimension
    delta_e: float                   # local mean level spacing
    ipr_norm: float                 # <I2> with the 1/N prefactor
    ipr_std: float                   # plain sum |psi|^4, averaged over window
    center: int                      # column index of the state closest to E

    @property
    def N_f(self) -> int:
        return len(self.eigenvalues)


def diagonalize(sample) -> tuple[np.ndarray, np.ndarray]:
    """Full dense symmetric eigendecomposition; eigenvalues ascending."""
    H = sample.matrix
    if H.shape[0] > DENSE_LIMIT:
        raise SpectralError(
            f"matrix dimension {H.shape[0]} exceeds dense limit {DENSE_LIMIT}")
    try:
        evals, evecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(
            f"eigensolver failed on realization {sample.realization_index}: {exc}"
        ) from exc
    return evals, evecs


def ipr(vector: np.ndarray) -> tuple[float, float]:
    """(window-normalized, standard) inverse participation ratio of a
    unit-norm vector: ipr_std = sum |psi|^4, ipr_norm = ipr_std / N."""
    v = np.asarray(vector)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-8:
        raise SpectralError(f"vector not normalized: |norm-1| = {abs(norm-1):.2e}")
    i2 = float(np.sum(np.abs(v) ** 4))
    return i2 / v.size, i2


def select_window(eigenvalues: np.ndarray, eigenvectors: np.ndarray,
                  E: float, count: int | None = None,
                  fraction: float | None = None) -> EigenWindow:
    """Keep the N_f eigenpairs closest to E.

    Ties at equal distance resolve to the lower index.  delta_e is the
    window-extent estimator (e_max - e_min)/(N_f - 1).
    """
    eigenvalues = np.asarray(eigenvalues)
    N = len(eigenvalues)
    if N == 0:
        raise SpectralError("empty spectrum")
    if count is None:
        if fraction is None:
            raise SpectralError("need count or fraction")
        count = max(2, int(round(fraction * N)))
    if count < 2 or count > N:
        raise SpectralError(f"window count {count} out of range [2, {N}]")

    dist = np.abs(eigenvalues - E)
    # stable sort => deterministic lower-index tie-break
    order = np.argsort(dist, kind="stable")[:count]
    keep = np.sort(order)
    evals = eigenvalues[keep]
    evecs = eigenvectors[:, keep]
    delta_e = float((evals[-1] - evals[0]) / (count - 1))

    iprs = np.sum(np.abs(evecs) ** 4, axis=0)
    center = int(np.argmin(np.abs(evals - E)))
    return EigenWindow(
        target_E=E, eigenvalues=evals, eigenvectors=evecs, N=N,
        delta_e=delta_e, ipr_norm=float(np.mean(iprs)) / N,
        ipr_std=float(np.mean(iprs)), center=center)


def omega_e(windows: list[EigenWindow], estimator: str = "cross_abs") -> float:
    """Correlation volume around the target energy.

    ``cross_abs`` (default): mean over consecutive realization pairs and over
    the partner window's states n of |sum_mu |U_mu(e0)| |U_mu(e_n)||^2, clamped
    to [1/N, 1].  ``cross_raw``: same with signed overlaps.  ``ipr``:
    N <I2> Delta_local with kappa = 1 (energy units).
    """
    if estimator not in OMEGA_ESTIMATORS:
        raise SpectralError(f"unknown estimator {estimator!r}")
    if len(windows) < 2 and estimator != "ipr":
        raise SpectralError("need >= 2 realizations for cross-realization overlap")
    N_f = windows[0].N_f
    N = windows[0].N
    if any(w.N_f != N_f or w.N != N for w in windows):
        raise SpectralError("mismatched window sizes across realizations")

    if estimator == "ipr":
        i2 = np.mean([w.ipr_norm for w in windows])
        dloc = np.mean([w.delta_e for w in windows])
        return float(N * i2 * dloc)

    vals = []
    for wa, wb in zip(windows[:-1], windows[1:]):
        u0 = wa.eigenvectors[:, wa.center]
        if estimator == "cross_abs":
            ov = np.abs(u0) @ np.abs(wb.eigenvectors)
        else:
            ov = u0 @ wb.eigenvectors
        mask = np.ones(N_f, dtype=bool)
        if N_f > 1:  # n runs over the N_f - 1 partner states away from e0
            mask[wb.center] = False
        vals.extend((ov[mask] ** 2).tolist())
    val = float(np.mean(vals))
    return float(min(1.0, max(1.0 / N, val)))
