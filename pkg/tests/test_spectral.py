import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pafluid.equilibrium import a_sequence, solve_s_star
from pafluid.errors import ConfigError
from pafluid.params import ModelParams
from pafluid.spectral import (adjoint_eigenvector, adjoint_recursion_residuals, build_operator,
                              closed_form_eigenvector, dominant_eigenpair,
                              lambda_from_scalar_equation, pairing_defect)


def test_operator_K2_explicit():
    params = ModelParams.power("graph", 1.0, 0.0)
    A = build_operator(params, 2).dense()
    # first row: (p0 - q0) w1 + p0 w1, p0 w2 ; second: q0 w1, -q0 w2
    np.testing.assert_allclose(A, [[0.0, 1.0], [1.0, -1.0]])


def test_absorbing_tail_zero_last_diag():
    op = build_operator(ModelParams.power("urn", 0.5, 0.5), 5, tail="absorbing")
    assert op.diag[-1] == 0.0


def test_bad_operator_args():
    params = ModelParams.power("urn", 0.5, 0.0)
    with pytest.raises(ConfigError):
        build_operator(params, 1)
    with pytest.raises(ConfigError):
        build_operator(params, 5, tail="reflecting")


@given(st.sampled_from(["graph", "urn"]), st.floats(0.1, 0.9), st.floats(-0.5, 0.7),
       st.integers(2, 40), st.integers(0, 2 ** 31))
def test_matvec_matches_dense(model, p, kappa, K, seed):
    op = build_operator(ModelParams.power(model, p, kappa), K)
    x = np.random.default_rng(seed).standard_normal(K)
    A = op.dense()
    np.testing.assert_allclose(op.matvec(x), A @ x, atol=1e-12)
    np.testing.assert_allclose(op.rmatvec(x), A.T @ x, atol=1e-12)


def test_scalar_equation_equals_s_star(grid_params):
    s = solve_s_star(grid_params)
    assert lambda_from_scalar_equation(grid_params) == pytest.approx(s, abs=1e-9)


def test_power_iteration_small_grid():
    params = ModelParams.power("graph", 1.0, 0.0)
    pair = dominant_eigenpair(build_operator(params, 200), params)
    assert pair.lam == pytest.approx(1.0, abs=1e-8)
    assert np.all(pair.x >= 0)
    x = pair.x / pair.x[0]
    np.testing.assert_allclose(x[:20], 0.5 ** np.arange(20), rtol=1e-8)


def test_dominant_eigenvalue_vs_dense_eig():
    params = ModelParams.power("urn", 0.3, 0.5)
    op = build_operator(params, 60, tail="absorbing")
    pair = dominant_eigenpair(op, params)
    ev = np.linalg.eigvals(op.dense())
    assert pair.lam == pytest.approx(ev.real.max(), abs=1e-8)


def test_closed_form_eigenvector_is_a_direction():
    params = ModelParams.power("graph", 0.7, 0.5)
    s = solve_s_star(params)
    a = a_sequence(params, s, 15).a
    x = closed_form_eigenvector(params, s, 15, a[0])
    np.testing.assert_allclose(x, a, rtol=1e-12)


def test_adjoint(grid_params):
    s = solve_s_star(grid_params)
    adj = adjoint_eigenvector(grid_params, s, 200)
    assert adj.x_star[0] == 1.0
    assert np.all(adj.x_star > 0)
    assert adj.recursion_residuals.max() <= 1e-8
    assert adj.growth_ok


def test_adjoint_graph_p1_kappa0():
    # constant weights, s* = 1: x*_j = 1/2 (1 + 1) = 1 for all j
    params = ModelParams.power("graph", 1.0, 0.0)
    adj = adjoint_eigenvector(params, 1.0, 30)
    np.testing.assert_allclose(adj.x_star, 1.0, rtol=1e-12)
    assert adjoint_recursion_residuals(params, 1.0, np.ones(10)).max() <= 1e-15


def test_pairing_defect_zero_for_exact_pair():
    params = ModelParams.power("graph", 1.0, 0.0)
    op = build_operator(params, 300)
    x = 0.5 ** np.arange(1, 301)
    adj = adjoint_eigenvector(params, 1.0, 300)
    assert pairing_defect(op, adj.x_star, x, 1.0) <= 1e-12
