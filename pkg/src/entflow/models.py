"""Ensemble specifications and Hamiltonian matrix sampling.

Three ensembles of real-symmetric matrices are supported:

* ``GenericGaussian`` -- independent Gaussian entries with user-supplied
  mean/variance tables,
* ``QREM`` -- random diagonal energies plus Hamming-distance-one hopping with
  power-law decaying variance (an Anderson model on the L-hypercube),
* ``RFHM`` -- the random-field XXZ chain restricted to the total-Sz = 0
  sector.

All sampling is pure given ``(spec, realization_index)``; per-realization
random streams are derived with ``numpy.random.SeedSequence`` so parallel
runs are order independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class Model(str, Enum):
    GENERIC = "GenericGaussian"
    QREM = "QREM"
    RFHM = "RFHM"


class SpecError(ValueError):
    """Invalid ensemble specification or sampling input."""


@dataclass(frozen=True)
class BasisMap:
    """Ordered configuration basis with inverse lookup.

    ``labels[i]`` is an L-character string of '0'/'1' (bit 1 = spin up),
    site 0 is the most significant bit of the integer row label.
    """

    labels: tuple[str, ...]
    sector: Optional[int] = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise SpecError("basis labels must be distinct")

    @property
    def index_of(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class EnsembleSpec:
    model: Model
    L: int
    N: int
    params: dict
    gamma: float
    master_seed: int
    dyson_beta: int = 1
    periodic: bool = True  # RFHM boundary condition; open chain if False

    def to_json(self) -> str:
        doc = {
            "model": self.model.value,
            "L": self.L,
            "params": dict(self.params),
            "gamma": self.gamma,
            "master_seed": self.master_seed,
        }
        if self.model is Model.RFHM and not self.periodic:
            doc["periodic"] = False
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "EnsembleSpec":
        doc = json.loads(text)
        return build_spec(
            doc["model"],
            doc["L"],
            doc["params"],
            doc["gamma"],
            doc["master_seed"],
            periodic=doc.get("periodic", True),
        )


@dataclass(frozen=True)
class HamiltonianSample:
    matrix: np.ndarray
    basis: BasisMap
    realization_index: int
    seed_used: int
    sparsity: str = "dense"  # "hypercube" | "sector-adjacent" | "dense"

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


def build_spec(model, L: int, params: dict, gamma: float, master_seed: int,
               periodic: bool = True) -> EnsembleSpec:
    """Validate parameters and compute the matrix dimension N."""
    model = Model(model)
    if L < 2:
        raise SpecError(f"L must be >= 2, got {L}")
    if gamma <= 0:
        raise SpecError(f"gamma must be positive, got {gamma}")
    params = dict(params)

    if model is Model.QREM:
        b = params.get("b")
        if b is None or b < 0:
            raise SpecError("QREM requires b >= 0")
        N = 2 ** L
    elif model is Model.RFHM:
        if L % 2 != 0:
            raise SpecError(f"RFHM requires even L, got {L}")
        for key in ("J", "D", "h"):
            if key not in params:
                raise SpecError(f"RFHM requires parameter {key!r}")
        if params["h"] < 0:
            raise SpecError("RFHM requires h >= 0")
        N = math.comb(L, L // 2)
    else:
        N = int(params.get("N", 2 ** L))

    return EnsembleSpec(model=model, L=L, N=N, params=params, gamma=float(gamma),
                        master_seed=int(master_seed), periodic=periodic)


def realization_rng(master_seed: int, realization_index: int):
    """Per-realization random stream: SeedSequence(master_seed) spawned on the
    realization index.  Returns (Generator, 64-bit seed fingerprint)."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(realization_index,))
    seed_used = int(ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(ss), seed_used


def qrem_offdiag_variance(mu: int, nu: int, b: float) -> float:
    """Variance of the hopping element between configurations mu, nu at unit
    Hamming distance: v = [1 + (|mu-nu|/b)^2]^(-1); 0 at b = 0."""
    if bin(mu ^ nu).count("1") != 1:
        raise SpecError(
            f"({mu},{nu}) are not at unit Hamming distance; element is "
            "deterministically zero, not sampled")
    if b == 0:
        return 0.0
    return 1.0 / (1.0 + (abs(mu - nu) / b) ** 2)


def _qrem_basis(L: int) -> BasisMap:
    return BasisMap(tuple(format(i, f"0{L}b") for i in range(2 ** L)))


def _rfhm_basis(L: int) -> BasisMap:
    labels = tuple(format(i, f"0{L}b") for i in range(2 ** L)
                   if bin(i).count("1") == L // 2)
    return BasisMap(labels, sector=0)


def sample_qrem(spec: EnsembleSpec, realization_index: int) -> HamiltonianSample:
    """One QREM realization: i.i.d. N(0, L/2) diagonal, independent zero-mean
    Gaussian hopping on the L-hypercube edges, zero elsewhere."""
    if spec.model is not Model.QREM:
        raise SpecError(f"sample_qrem needs a QREM spec, got {spec.model}")
    L, N, b = spec.L, spec.N, spec.params["b"]
    rng, seed_used = realization_rng(spec.master_seed, realization_index)

    H = np.zeros((N, N))
    H[np.diag_indices(N)] = rng.normal(0.0, math.sqrt(L / 2.0), size=N)
    # hopping pairs (mu, mu + 2^r) for every mu with bit r clear
    mu_all = np.arange(N)
    for r in range(L):
        step = 1 << r
        mu = mu_all[(mu_all >> r) & 1 == 0]
        if b == 0:
            continue
        sd = math.sqrt(1.0 / (1.0 + (step / b) ** 2))
        vals = rng.normal(0.0, sd, size=mu.size)
        H[mu, mu + step] = vals
        H[mu + step, mu] = vals
    return HamiltonianSample(H, _qrem_basis(L), realization_index, seed_used,
                             sparsity="hypercube")


def sample_rfhm(spec: EnsembleSpec, realization_index: int) -> HamiltonianSample:
    """One RFHM realization in the Sz_tot = 0 sector.

    Diagonal of row mu: sum_k [D mu_k mu_{k+1} - h_k mu_k] with mu_k = +-1/2
    and h_k i.i.d. N(0, h^2); off-diagonal J/2 between configurations related
    by one adjacent anti-aligned exchange.  Boundary periodic by default.
    """
    if spec.model is not Model.RFHM:
        raise SpecError(f"sample_rfhm needs an RFHM spec, got {spec.model}")
    L = spec.L
    J, D, h = spec.params["J"], spec.params["D"], spec.params["h"]
    basis = _rfhm_basis(L)
    N = len(basis)
    rng, seed_used = realization_rng(spec.master_seed, realization_index)
    fields = rng.normal(0.0, h, size=L)

    # spins[i, k] = +-1/2 for basis state i, site k
    spins = np.array([[0.5 if c == "1" else -0.5 for c in lab]
                      for lab in basis.labels])
    bonds = range(L) if spec.periodic else range(L - 1)
    diag = -spins @ fields
    for k in bonds:
        diag += D * spins[:, k] * spins[:, (k + 1) % L]

    H = np.zeros((N, N))
    H[np.diag_indices(N)] = diag
    index_of = basis.index_of
    for i, lab in enumerate(basis.labels):
        for k in bonds:
            k2 = (k + 1) % L
            if lab[k] != lab[k2]:
                flipped = list(lab)
                flipped[k], flipped[k2] = lab[k2], lab[k]
                j = index_of["".join(flipped)]
                if j > i:
                    H[i, j] = H[j, i] = J / 2.0
    return HamiltonianSample(H, basis, realization_index, seed_used,
                             sparsity="sector-adjacent")


def sample_generic(spec: EnsembleSpec, b_table: np.ndarray, v_table: np.ndarray,
                   realization_index: int) -> HamiltonianSample:
    """Independent Gaussian entries H_{mu nu} ~ N(b_table, v_table),
    symmetrized by sampling the upper triangle only."""
    b_table = np.asarray(b_table, dtype=float)
    v_table = np.asarray(v_table, dtype=float)
    N = b_table.shape[0]
    if b_table.shape != (N, N) or v_table.shape != (N, N):
        raise SpecError("mean/variance tables must be square and same shape")
    if not (np.array_equal(b_table, b_table.T) and np.array_equal(v_table, v_table.T)):
        raise SpecError("mean/variance tables must be symmetric")
    if np.any(v_table < 0):
        raise SpecError("variances must be nonnegative")

    rng, seed_used = realization_rng(spec.master_seed, realization_index)
    noise = rng.standard_normal((N, N))
    iu = np.triu_indices(N)
    H = np.zeros((N, N))
    H[iu] = b_table[iu] + np.sqrt(v_table[iu]) * noise[iu]
    H = H + np.triu(H, 1).T
    basis = BasisMap(tuple(str(i) for i in range(N)))
    return HamiltonianSample(H, basis, realization_index, seed_used)


def qrem_tables(spec: EnsembleSpec) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance tables of the QREM ensemble (for sample_generic and
    for the generic complexity-parameter functional)."""
    L, N, b = spec.L, spec.N, spec.params["b"]
    v = np.zeros((N, N))
    v[np.diag_indices(N)] = L / 2.0
    for r in range(L):
        step = 1 << r
        mu = np.arange(N)[(np.arange(N) >> r) & 1 == 0]
        if b > 0:
            v[mu, mu + step] = v[mu + step, mu] = 1.0 / (1.0 + (step / b) ** 2)
    return np.zeros((N, N)), v
