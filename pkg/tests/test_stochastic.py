import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pafluid.dynamics import InitialConfiguration
from pafluid.errors import SeedingError, TableEvaluationError
from pafluid.params import ModelParams
from pafluid.stochastic import (D_VALUES, DegreeCountState, advance, drift, frequency_trials,
                                increment_pmf, run_chain, seed_initial, simulate_replicas,
                                step_graph, step_urn)

SMALL = InitialConfiguration.small()
counts_strategy = st.lists(st.integers(0, 30), min_size=1, max_size=10).filter(any)


def test_seed_small_graph():
    params = ModelParams.power("graph", 0.5, 0.5)
    st_ = seed_initial(SMALL, 1000, params, seed=0)
    assert st_.counts().tolist() == [2] and st_.S == pytest.approx(2.0)
    assert (st_.units, st_.total) == (2, 2)


def test_seed_small_urn():
    st_ = seed_initial(SMALL, 10, ModelParams.power("urn", 0.5, 0.5), seed=0)
    assert st_.counts().tolist() == [1] and st_.S == 1.0


def test_seed_large_rounding():
    st_ = seed_initial(InitialConfiguration(np.array([0.5, 0.25])), 100,
                       ModelParams.power("graph", 0.5, 0.0), seed=0)
    assert st_.counts().tolist() == [50, 25]
    assert st_.total == 100
    np.testing.assert_allclose(st_.c_n, [0.5, 0.25])


def test_seed_large_all_zero():
    with pytest.raises(SeedingError):
        seed_initial(InitialConfiguration(np.array([1e-4])), 10, ModelParams.power("graph", 0.5, 0.0))


def test_graph_p1_deterministic_attach():
    st_ = DegreeCountState.from_counts(ModelParams.power("graph", 1.0, 0.0), [2], seed=3)
    step_graph(st_)
    # one old vertex moves 1 -> 2 and the newcomer enters class 1
    assert st_.counts().tolist() == [2, 1]
    assert (st_.units, st_.total) == (3, 4)


def test_urn_single_step_outcomes():
    params = ModelParams.power("urn", 0.5, 0.0)
    out = {"new": 0, "grow": 0}
    for seed in range(400):
        st_ = DegreeCountState.from_counts(params, [1], seed=seed)
        step_urn(st_)
        c = st_.counts().tolist()
        if c == [2]:
            out["new"] += 1
        else:
            assert c == [0, 1]
            out["grow"] += 1
    assert 150 < out["new"] < 250


def test_wrong_step_function():
    with pytest.raises(Exception):
        step_urn(DegreeCountState.from_counts(ModelParams.power("graph", 0.5, 0.0), [2], seed=0))


@pytest.mark.parametrize("model,p,kappa", [("graph", 0.5, 0.5), ("urn", 0.3, -0.5), ("graph", 1.0, 0.0)])
def test_exact_invariants(model, p, kappa):
    st_ = seed_initial(SMALL, 1, ModelParams.power(model, p, kappa), seed=11)
    advance(st_, 50_000, audit=True)
    a = st_.audit()
    assert a["units"] and a["total"] and a["nonnegative"]
    assert a["step_checks_failed"] == 0 and a["max_abs_d"] <= 2
    assert st_.audit_ok()


def test_capacity_growth_preserves_state():
    params = ModelParams.power("graph", 0.2, 0.9)
    st_ = DegreeCountState.from_counts(params, [2], seed=5)
    cap0 = st_.cap
    advance(st_, 20_000, audit=True)
    assert st_.cap > cap0 and st_.audit_ok()


def test_same_seed_same_path():
    params = ModelParams.power("graph", 0.5, 0.5)
    grid = np.linspace(0, 1, 11)
    a = run_chain(seed_initial(SMALL, 2000, params, seed=9), 2000, grid)
    b = run_chain(seed_initial(SMALL, 2000, params, seed=9), 2000, grid)
    np.testing.assert_array_equal(a.X, b.X)


def test_block_boundaries_do_not_matter():
    params = ModelParams.power("urn", 0.5, 0.5)
    a = seed_initial(SMALL, 1, params, seed=2)
    advance(a, 70_000)
    b = seed_initial(SMALL, 1, params, seed=2)
    advance(b, 65_536)
    advance(b, 70_000 - 65_536)
    np.testing.assert_array_equal(a.Z[:a.kmax + 1], b.Z[:b.kmax + 1])


def test_run_chain_zero_steps():
    st_ = seed_initial(SMALL, 100, ModelParams.power("graph", 0.5, 0.5), seed=1)
    path = run_chain(st_, 100, [0.0])
    assert path.X[0, 0] == pytest.approx(0.02)
    assert st_.n == 0


def test_graph_p1_vertex_count():
    n = 5000
    st_ = seed_initial(SMALL, n, ModelParams.power("graph", 1.0, 0.5), seed=1)
    path = run_chain(st_, n, [0.0, 0.5, 1.0])
    assert path.units.tolist() == [2, 2 + n // 2, 2 + n]


def test_interpolation_and_lipschitz():
    n = 300
    grid = np.linspace(0, 1, 257)  # off-lattice times exercise the fractional term
    path = run_chain(seed_initial(SMALL, n, ModelParams.power("graph", 0.4, 0.5), seed=4), n, grid)
    assert path.lipschitz_ratio() <= 2.0 + 1e-9


def test_replicas_independent_of_workers():
    params = ModelParams.power("urn", 0.5, 0.0)
    grid = np.linspace(0, 1, 5)
    a = simulate_replicas(SMALL, params, 500, grid, 4, seed=1, workers=1)
    b = simulate_replicas(SMALL, params, 500, grid, 4, seed=1, workers=4)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.X, y.X)
    assert not np.array_equal(a[0].X, a[1].X)


@given(counts=counts_strategy, k=st.sampled_from([1, 2, 3, 7]), model=st.sampled_from(["graph", "urn"]),
       p=st.floats(0.05, 0.95), kappa=st.floats(-1.0, 0.9))
def test_pmf_is_probability(counts, k, model, p, kappa):
    pmf = increment_pmf(counts, k, ModelParams.power(model, p, kappa))
    assert np.all(pmf >= 0) and abs(pmf.sum() - 1) <= 1e-12


@given(counts=counts_strategy, k=st.sampled_from([1, 2, 3, 4, 7]), model=st.sampled_from(["graph", "urn"]),
       p=st.floats(0.05, 0.95), kappa=st.floats(-1.0, 0.9), n=st.integers(1, 10 ** 6))
def test_drift_matches_tables(counts, k, model, p, kappa, n):
    params = ModelParams.power(model, p, kappa)
    Z = np.asarray(counts, float)
    S = float(params.w.array(Z.size) @ Z)
    pmf = increment_pmf(counts, k, params)
    assert abs(pmf @ D_VALUES - drift(Z / n, S, n, k, params)) <= 1e-12


def test_pmf_no_flow_is_delta0():
    params = ModelParams.power("graph", 0.5, 0.0)
    pmf = increment_pmf([0, 0, 0, 0, 5], 3, params)
    np.testing.assert_array_equal(pmf, [0, 0, 1, 0, 0])


def test_loop_probability():
    params = ModelParams.power("graph", 0.3, 0.5)
    Z = [0, 4]
    S = 4 * 2 ** 0.5
    pmf = increment_pmf(Z, 2, params)
    # loop in class 2 is the only event lowering d_2 by exactly one without a partner
    u2, l2 = 1.0, 2 * 4 / S ** 2
    assert pmf[1] == pytest.approx(0.3 * u2 + 0.7 * l2)


def test_pmf_empty_state():
    with pytest.raises(TableEvaluationError):
        increment_pmf([0, 0], 1, ModelParams.power("urn", 0.5, 0.0))


def test_frequency_d1_table():
    params = ModelParams.power("graph", 0.5, 0.0)
    st_ = DegreeCountState.from_counts(params, [3, 2], seed=8)
    N = 100_000
    counts = frequency_trials(st_, [1], N)[0]
    pmf = increment_pmf([3, 2], 1, params)
    sd = np.sqrt(N * pmf * (1 - pmf))
    assert np.all(np.abs(counts - N * pmf) <= 4 * sd)
    assert st_.counts().tolist() == [3, 2]
