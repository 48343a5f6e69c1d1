"""Ensemble complexity parameter Y - Y0 and the strength complexity
parameter Lambda with the empirical chi0 recipes.

The QREM closed form uses the 1/(2 (N+1) gamma) prefactor; the recipe
exponents (2.4, 1.1, 3.5, -0.4) are empirical constants exposed through
``CustomRecipe`` for refitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class ComplexityError(ValueError):
    pass


RECIPES = ("QREM_mean", "QREM_var", "RFHM_both")


@dataclass(frozen=True)
class CustomRecipe:
    """Lambda = (Y - Y0) * delta_e**a * omega_e**b / ipr**c."""
    a: float
    b: float
    c: float = 0.0

    @property
    def name(self) -> str:
        return f"custom(a={self.a},b={self.b},c={self.c})"


@dataclass
class ComplexityPoint:
    y_minus_y0: float
    delta_e: float
    omega_e: float
    ipr_norm: float
    chi0_recipe: str
    lam: float
    n_lambda: float
    lambda_e: float  # spectral complexity parameter (Y-Y0)/delta_e^2


def y_generic(v_table: np.ndarray, b_table: np.ndarray,
              v0_table: np.ndarray, b0_table: np.ndarray,
              gamma: float, beta: int = 1) -> float:
    """Generic uncorrelated-ensemble complexity parameter difference.

    Y - Y0 = -(1/2 M gamma) sum over evolving entries (mu <= nu) of
    [ln|g - 2 gamma v| + ln|b|^2] evaluated at current minus initial tables,
    g = 2 on the diagonal and 1 off it.  An entry participates only if its
    mean or variance actually changed; M counts the participating terms.
    """
    v, b = np.asarray(v_table, float), np.asarray(b_table, float)
    v0, b0 = np.asarray(v0_table, float), np.asarray(b0_table, float)
    N = v.shape[0]
    iu = np.triu_indices(N)
    g = np.where(iu[0] == iu[1], 2.0, 1.0)

    dv = v[iu] != v0[iu]
    db = b[iu] != b0[iu]
    evolving = dv | db
    M = int(np.count_nonzero(evolving))
    if M == 0:
        return 0.0

    fv = g[evolving] - 2.0 * gamma * v[iu][evolving]
    fv0 = g[evolving] - 2.0 * gamma * v0[iu][evolving]
    if np.any(fv == 0) or np.any(fv0 == 0):
        idx = np.where((fv == 0) | (fv0 == 0))[0]
        mu, nu = iu[0][evolving][idx[0]], iu[1][evolving][idx[0]]
        raise ComplexityError(
            f"singular term |g - 2 gamma v| = 0 at entry ({mu},{nu}): "
            "ergodic (GOE) fixed point")

    total = float(np.sum(np.log(np.abs(fv)) - np.log(np.abs(fv0))))
    bc, bc0 = b[iu][evolving], b0[iu][evolving]
    mask = db[evolving]
    if np.any(mask):
        total += float(np.sum(np.log(bc[mask] ** 2) - np.log(bc0[mask] ** 2)))
    return -beta * total / (2.0 * M * gamma)


def y_qrem(b: float, L: int, gamma: float = 0.5) -> float:
    """QREM closed form:
    Y - Y0 = -(1/(2 (N+1) gamma)) sum_{r=0}^{L-1} ln|1 - 2 gamma/(1+(2^r/b)^2)|
    with initial condition b = 0."""
    if b < 0:
        raise ComplexityError("b must be >= 0")
    if b == 0:
        return 0.0
    N = 2 ** L
    total = 0.0
    for r in range(L):
        total += math.log(abs(1.0 - 2.0 * gamma / (1.0 + (2.0 ** r / b) ** 2)))
    return -total / (2.0 * (N + 1) * gamma)


def y_rfhm(h: float, D: float, h0: float = 10.0, D0: float = 1.0,
           gamma: float = 1.0) -> float:
    """RFHM large-L closed form: (1/gamma) ln(h0^4 D / (h^4 D0))."""
    if min(h, D, h0, D0) <= 0:
        raise ComplexityError("h, D, h0, D0 must be positive")
    return math.log(h0 ** 4 * D / (h ** 4 * D0)) / gamma


def lambda_psi(y_minus_y0: float, delta_e: float, omega_e: float,
               ipr_norm: float, N: int,
               recipe: str | CustomRecipe = "QREM_mean",
               model: Optional[str] = None) -> ComplexityPoint:
    """Strength complexity parameter with the empirical chi0 recipes:

    QREM_mean:  Lambda = [(Y-Y0)/delta_e] * omega_e^2 / <I2>
    QREM_var:   Lambda = (Y-Y0) * omega_e^2 / delta_e^2.4
    RFHM_both:  Lambda = (Y-Y0) * delta_e^1.1 * omega_e^3.5
    custom:     Lambda = (Y-Y0) * delta_e^a * omega_e^b / <I2>^c
    """
    if delta_e <= 0:
        raise ComplexityError(f"delta_e must be positive, got {delta_e}")
    if not (1.0 / N - 1e-12 <= omega_e <= 1.0 + 1e-12):
        raise ComplexityError(f"omega_e = {omega_e} outside [1/N, 1]")

    if isinstance(recipe, CustomRecipe):
        lam = (y_minus_y0 * delta_e ** recipe.a * omega_e ** recipe.b
               / ipr_norm ** recipe.c)
        name = recipe.name
    elif recipe == "QREM_mean":
        lam = (y_minus_y0 / delta_e) * omega_e ** 2 / ipr_norm
        name = recipe
    elif recipe == "QREM_var":
        lam = y_minus_y0 * omega_e ** 2 / delta_e ** 2.4
        name = recipe
    elif recipe == "RFHM_both":
        lam = y_minus_y0 * delta_e ** 1.1 * omega_e ** 3.5
        name = recipe
    else:
        raise ComplexityError(f"unknown chi0 recipe {recipe!r}")

    if model is not None and isinstance(recipe, str):
        if not recipe.lower().startswith(model.lower()[:4]):
            # recorded, not fatal: recipes are empirical per model
            import warnings
            warnings.warn(f"recipe {recipe} used with model {model}")

    return ComplexityPoint(
        y_minus_y0=y_minus_y0, delta_e=delta_e, omega_e=omega_e,
        ipr_norm=ipr_norm, chi0_recipe=name, lam=float(lam),
        n_lambda=float(N * lam), lambda_e=float(y_minus_y0 / delta_e ** 2))
