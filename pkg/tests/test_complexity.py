import math

import numpy as np
import pytest

from entflow import complexity, models


def test_y_qrem_hand_value():
    # b=1, L=2, gamma=1/2: -(1/(2*5*0.5)) [ln|1-1/2| + ln|1-1/5|]
    expect = -(math.log(0.5) + math.log(0.8)) / 5.0
    assert complexity.y_qrem(1.0, 2, 0.5) == pytest.approx(expect, abs=1e-15)
    assert expect == pytest.approx(0.18325, abs=1e-4)


def test_y_qrem_initial_condition_and_monotonicity():
    assert complexity.y_qrem(0.0, 8) == 0.0
    grid = np.geomspace(1e-3, 1e5, 60)
    vals = [complexity.y_qrem(b, 8, 0.5) for b in grid]
    assert all(b2 > b1 for b1, b2 in zip(vals, vals[1:]))
    with pytest.raises(complexity.ComplexityError):
        complexity.y_qrem(-1.0, 8)


def test_y_rfhm_hand_values():
    assert complexity.y_rfhm(10.0, 1.0) == 0.0
    assert complexity.y_rfhm(1.0, 1.0, h0=10.0, D0=1.0, gamma=1.0) == \
        pytest.approx(math.log(10 ** 4), abs=1e-12)
    assert complexity.y_rfhm(10.0, 2.0) == pytest.approx(math.log(2), abs=1e-12)
    assert complexity.y_rfhm(2.0, 1.0, gamma=2.0) == \
        pytest.approx(0.5 * math.log(10 ** 4 / 2 ** 4))
    with pytest.raises(complexity.ComplexityError):
        complexity.y_rfhm(0.0, 1.0)


def test_y_generic_matches_qrem_shape():
    """The generic per-entry functional agrees with the QREM closed form up
    to the fixed prefactor ratio between the two normalization conventions."""
    L, b, gamma = 3, 1.7, 0.5
    spec = models.build_spec("QREM", L, {"b": b}, gamma, 0)
    spec0 = models.build_spec("QREM", L, {"b": 0.0}, gamma, 0)
    bt, vt = models.qrem_tables(spec)
    bt0, vt0 = models.qrem_tables(spec0)
    yg = complexity.y_generic(vt, bt, vt0, bt0, gamma)
    yq = complexity.y_qrem(b, L, gamma)
    # closed form sums L terms with 1/(2(N+1)gamma); the generic form sums
    # N/2 entries per hopping scale with 1/(2 M gamma), M = L N / 2, so the
    # ratio of conventions is (N+1)/L
    N = 2 ** L
    assert yg == pytest.approx(yq * (N + 1) / L, rel=1e-12)


def test_y_generic_edge_cases():
    v = np.full((3, 3), 0.1)
    b = np.zeros((3, 3))
    assert complexity.y_generic(v, b, v, b, 0.5) == 0.0
    v2 = v.copy()
    v2[0, 1] = v2[1, 0] = 1.0  # 1 - 2*0.5*1 = 0: GOE fixed point
    with pytest.raises(complexity.ComplexityError):
        complexity.y_generic(v2, b, v, b, 0.5)


def test_y_generic_mean_shift_term():
    v = np.full((2, 2), 0.1)
    b0 = np.full((2, 2), 1.0)
    b1 = np.full((2, 2), 2.0)
    # only means changed: contribution is -(1/2M gamma) sum ln(b^2/b0^2)
    got = complexity.y_generic(v, b1, v, b0, 0.5)
    assert got == pytest.approx(-3 * math.log(4.0) / 3.0, rel=1e-12)


def test_lambda_psi_recipes():
    p = complexity.lambda_psi(0.18, 0.01, 0.5, 0.1, 64, recipe="QREM_mean")
    assert p.lam == pytest.approx(45.0)
    assert p.n_lambda == pytest.approx(64 * 45.0)
    assert p.lambda_e == pytest.approx(0.18 / 0.01 ** 2)

    p = complexity.lambda_psi(9.2103, 0.1, 0.5, 0.1, 64, recipe="RFHM_both",
                              model="RFHM")
    assert p.lam == pytest.approx(9.2103 * 0.1 ** 1.1 * 0.5 ** 3.5, rel=1e-6)
    assert p.lam == pytest.approx(0.0647, abs=2e-4)

    p = complexity.lambda_psi(2.0, 0.5, 0.25, 0.1, 16, recipe="QREM_var")
    assert p.lam == pytest.approx(2.0 * 0.25 ** 2 / 0.5 ** 2.4)

    custom = complexity.CustomRecipe(a=1.0, b=2.0, c=1.0)
    p = complexity.lambda_psi(2.0, 0.5, 0.25, 0.1, 16, recipe=custom)
    assert p.lam == pytest.approx(2.0 * 0.5 * 0.25 ** 2 / 0.1)
    assert p.chi0_recipe.startswith("custom(")


def test_lambda_psi_zero_and_errors():
    for recipe in complexity.RECIPES:
        p = complexity.lambda_psi(0.0, 0.1, 0.5, 0.1, 16, recipe=recipe)
        assert p.lam == 0.0
    with pytest.raises(complexity.ComplexityError):
        complexity.lambda_psi(1.0, 0.0, 0.5, 0.1, 16)
    with pytest.raises(complexity.ComplexityError):
        complexity.lambda_psi(1.0, 0.1, 2.0, 0.1, 16)
    with pytest.raises(complexity.ComplexityError):
        complexity.lambda_psi(1.0, 0.1, 0.5, 0.1, 16, recipe="nope")


def test_lambda_psi_mismatch_warning():
    with pytest.warns(UserWarning):
        complexity.lambda_psi(1.0, 0.1, 0.5, 0.1, 16, recipe="QREM_mean",
                              model="RFHM")
