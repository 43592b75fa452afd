import numpy as np
import pytest

from papt.errors import ContractError
from papt.oscillator import (HOModel, build_h, build_h0, build_papt_h0, build_perturbation,
                             exact_ground, hermite_functions, run_oscillator)


def _x_matrix(n):
    off = np.sqrt(np.arange(1, n) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def test_h0_is_diagonal_ladder():
    h0 = build_h0(HOModel(n_basis=5, quad_points=20))
    np.testing.assert_array_equal(h0, np.diag([0.5, 1.5, 2.5, 3.5, 4.5]))


def test_hermite_functions_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(120)
    phi = hermite_functions(50, x)
    gram = (phi * np.exp(np.log(w) + x * x)) @ phi.T
    np.testing.assert_allclose(gram, np.eye(50), atol=1e-12)


def test_hermite_functions_low_order():
    x = np.linspace(-2, 2, 7)
    phi = hermite_functions(3, x)
    g = np.pi ** -0.25 * np.exp(-x * x / 2)
    np.testing.assert_allclose(phi[0], g)
    np.testing.assert_allclose(phi[1], np.sqrt(2) * x * g)
    np.testing.assert_allclose(phi[2], (2 * x * x - 1) / np.sqrt(2) * g)


def test_ground_state_element_closed_form():
    # <0| x^4 exp(-a x^2) |0> = (3/4) (1 + a)^(-5/2)
    v = build_perturbation(HOModel())
    assert v[0, 0] == pytest.approx(0.75 * (8.0 / 9.0) ** 2.5, abs=1e-14)


def test_undamped_matches_ladder_operators():
    n = 12
    v = build_perturbation(HOModel(n_basis=n, damping=0.0, quad_points=40))
    x = _x_matrix(n + 4)
    x4 = np.linalg.matrix_power(x, 4)[:n, :n]
    np.testing.assert_allclose(v, x4, atol=1e-11)
    assert v[1, 1] == pytest.approx(15 / 4)
    assert v[0, 2] == pytest.approx(1.5 * np.sqrt(2))


def test_parity_and_symmetry():
    v = build_perturbation(HOModel())
    i, j = np.indices(v.shape)
    assert np.max(np.abs(v[(i + j) % 2 == 1])) < 1e-13
    np.testing.assert_array_equal(v, v.T)


def test_quadrature_doubling_is_converged():
    base = HOModel(quad_points=80)
    fine = HOModel(quad_points=160)
    np.testing.assert_allclose(build_perturbation(fine), build_perturbation(base), atol=1e-10)
    for method in ("rspt", "papt"):
        a = dict(run_oscillator(base, 7, method).deviations)
        b = dict(run_oscillator(fine, 7, method).deviations)
        for n in a:
            assert abs(a[n] - b[n]) < 1e-10


def test_papt_operator_structure():
    m = HOModel()
    h = build_h(m)
    lam = build_papt_h0(m)
    assert np.all(lam[0, 1:] == 0) and np.all(lam[1:, 0] == 0)
    assert lam[0, 0] == h[0, 0]
    np.testing.assert_array_equal(lam[1:, 1:], h[1:, 1:])
    assert build_papt_h0(m, "zero_order")[0, 0] == 0.5
    with pytest.raises(ContractError):
        build_papt_h0(m, "other")


def test_zero_coupling_gives_exact_series():
    m = HOModel(lam=0.0)
    for method in ("rspt", "papt"):
        run = run_oscillator(m, 5, method)
        assert run.exact == 0.5
        assert all(abs(d) <= 1e-12 for _, d in run.deviations)


def test_first_order_is_partition_independent():
    m = HOModel()
    a = run_oscillator(m, 2, "rspt")
    b = run_oscillator(m, 2, "papt")
    assert a.series.partial_sum(1) == pytest.approx(b.series.partial_sum(1), abs=1e-14)
    assert a.series.partial_sum(1) == pytest.approx(build_h(m)[0, 0], abs=1e-14)


def test_rspt_converges_to_basis_exact():
    run = run_oscillator(HOModel(), 30, "rspt")
    assert abs(run.deviations[-1][1]) < 1e-10
    assert run.exact == pytest.approx(exact_ground(HOModel()))


def test_undamped_papt_converges():
    m = HOModel(damping=0.0)
    devs = dict(run_oscillator(m, 10, "papt").deviations)
    assert abs(devs[10]) < abs(devs[2]) * 1e-2


@pytest.mark.parametrize("kwargs", [dict(n_basis=1), dict(n_basis=30, quad_points=40),
                                    dict(damping=-1.0)])
def test_model_validation(kwargs):
    with pytest.raises(ContractError):
        HOModel(**kwargs)


def test_unknown_method():
    with pytest.raises(ContractError):
        run_oscillator(HOModel(), 3, "ccsd")
