import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pafluid.errors import ConfigError
from pafluid.series import product_series, remainder_bounds
from pafluid.weights import WeightFunction


def brute(w, q0, s, first, N):
    k = np.arange(first, N + 1)
    wk = w(k)
    P = np.cumprod(q0 * wk / (s + q0 * wk))
    return P


def test_geometric_closed_form():
    # constant weight: factors r = q0/(s+q0), sum = r/(1-r) = q0/s
    w = WeightFunction.power(0.0)
    res = product_series(w, 1.0, 1.0, 1e-14)
    assert res.value == pytest.approx(1.0, abs=1e-13)
    assert res.tail_bound <= 1e-14


@given(kappa=st.sampled_from([-0.5, 0.0, 0.3, 0.5, 0.8]), s=st.floats(0.2, 4.0),
       q0=st.floats(0.2, 2.0), J=st.integers(1, 400))
def test_remainder_bound_is_sound(kappa, s, q0, J):
    w = WeightFunction.power(kappa, probe=1000)
    P = brute(w, q0, s, 1, 200_000)
    if P[-1] > 1e-30 * P[J - 1]:
        return  # brute-force truncation not reliable enough to judge
    r0, r1 = remainder_bounds(w, q0, s, J, P[J - 1])
    k = np.arange(J + 1, P.size + 1)
    true0 = math.fsum(P[J:])
    true1 = math.fsum(k * P[J:])
    assert true0 <= r0 * (1 + 1e-9) + 1e-300
    assert true1 <= r1 * (1 + 1e-9) + 1e-300


@given(kappa=st.sampled_from([-0.5, 0.0, 0.5]), s=st.floats(0.3, 3.0), q0=st.floats(0.3, 1.7))
def test_series_matches_brute_force(kappa, s, q0):
    w = WeightFunction.power(kappa, probe=1000)
    res = product_series(w, q0, s, 1e-12)
    P = brute(w, q0, s, 1, 100_000)
    if P[-1] > 1e-25:
        return
    assert abs(res.value - math.fsum(P)) <= 1e-12 + 1e-13 * res.value


def test_first_offset():
    w = WeightFunction.power(0.5)
    full = product_series(w, 1.0, 1.0, 1e-14).value
    h1 = 1.0 / 2.0
    rest = product_series(w, 1.0, 1.0, 1e-14, first=2).value
    assert full == pytest.approx(h1 * (1 + rest), rel=1e-12)


def test_stop_above():
    w = WeightFunction.power(0.9)
    res = product_series(w, 2.0, 0.01, 1e-12, stop_above=5.0)
    assert res.value > 5.0 and math.isinf(res.tail_bound)


def test_bad_arguments():
    w = WeightFunction.power(0.0)
    with pytest.raises(ConfigError):
        product_series(w, 1.0, 0.0, 1e-10)
    with pytest.raises(ConfigError):
        product_series(w, 1.0, 1.0, 0.0)
