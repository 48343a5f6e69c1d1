import numpy as np
import pytest

from entflow import models, spectral


def _sample(L=4, b=1.0, seed=0, r=0):
    spec = models.build_spec("QREM", L, {"b": b}, 0.5, seed)
    return models.sample_qrem(spec, r)


def test_diagonalize_oracle():
    s = _sample()
    evals, evecs = spectral.diagonalize(s)
    assert np.all(np.diff(evals) >= 0)
    for k in (0, 5, 15):
        assert np.allclose(s.matrix @ evecs[:, k], evals[k] * evecs[:, k],
                           atol=1e-10)


def test_diagonalize_dense_limit():
    class Fake:
        matrix = np.zeros((spectral.DENSE_LIMIT + 1, spectral.DENSE_LIMIT + 1))
        realization_index = 0
    with pytest.raises(spectral.SpectralError):
        spectral.diagonalize(Fake())


def test_ipr_values():
    n = 16
    uniform = np.full(n, 1.0 / np.sqrt(n))
    ip, ips = spectral.ipr(uniform)
    assert ips == pytest.approx(1.0 / n)
    assert ip == pytest.approx(1.0 / n ** 2)
    basis_vec = np.zeros(n)
    basis_vec[3] = 1.0
    ip, ips = spectral.ipr(basis_vec)
    assert ips == pytest.approx(1.0)
    assert ip == pytest.approx(1.0 / n)
    with pytest.raises(spectral.SpectralError):
        spectral.ipr(2 * uniform)


def test_select_window_basic():
    evals = np.linspace(-3, 3, 13)
    evecs = np.eye(13)
    win = spectral.select_window(evals, evecs, 0.0, count=5)
    assert win.N_f == 5
    assert np.allclose(win.eigenvalues, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert win.delta_e == pytest.approx(0.5)
    assert win.eigenvalues[win.center] == 0.0
    # fraction route
    win2 = spectral.select_window(evals, evecs, 0.0, fraction=0.4)
    assert win2.N_f == 5


def test_select_window_tie_break_lower_index():
    evals = np.array([-1.0, 1.0, 2.0])
    win = spectral.select_window(evals, np.eye(3), 0.0, count=2)
    assert np.allclose(win.eigenvalues, [-1.0, 1.0])
    win = spectral.select_window(evals, np.eye(3), 1.5, count=1 + 1)
    assert np.allclose(win.eigenvalues, [1.0, 2.0])


def test_select_window_errors():
    with pytest.raises(spectral.SpectralError):
        spectral.select_window(np.array([]), np.zeros((0, 0)), 0.0, count=2)
    with pytest.raises(spectral.SpectralError):
        spectral.select_window(np.arange(4.0), np.eye(4), 0.0, count=5)
    with pytest.raises(spectral.SpectralError):
        spectral.select_window(np.arange(4.0), np.eye(4), 0.0)


def _windows(n_real=4, L=6, b=5.0, count=6):
    wins = []
    for r in range(n_real):
        s = _sample(L=L, b=b, r=r)
        evals, evecs = spectral.diagonalize(s)
        wins.append(spectral.select_window(evals, evecs, 0.0, count=count))
    return wins


def test_omega_e_estimators_and_bounds():
    wins = _windows()
    N = wins[0].N
    for est in spectral.OMEGA_ESTIMATORS:
        val = spectral.omega_e(wins, est)
        assert val > 0
        if est != "ipr":
            assert 1.0 / N <= val <= 1.0
    with pytest.raises(spectral.SpectralError):
        spectral.omega_e(wins, "bogus")
    with pytest.raises(spectral.SpectralError):
        spectral.omega_e(wins[:1], "cross_abs")


def test_omega_e_ergodic_limit():
    """For delocalized states the abs-overlap approaches the Gaussian
    expectation (2/pi)^2; localized states sit near the 1/N floor."""
    ergodic = spectral.omega_e(_windows(b=64.0, L=6), "cross_abs")
    assert 0.25 < ergodic < 0.75        # (2/pi)^2 = 0.405 up to finite size
    localized = spectral.omega_e(_windows(b=0.05, L=6), "cross_abs")
    assert localized < ergodic / 3


def test_omega_e_ipr_estimator_scale():
    wins = _windows(b=64.0, L=6)
    v = spectral.omega_e(wins, "ipr")
    expect = (wins[0].N * np.mean([w.ipr_norm for w in wins])
              * np.mean([w.delta_e for w in wins]))
    assert v == pytest.approx(expect)
