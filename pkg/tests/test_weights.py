import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pafluid.errors import ConfigError
from pafluid.weights import WeightFunction, certify_sublinear, eval_weight, weight_from_config


def test_power_values():
    w = WeightFunction.power(0.5)
    assert w(4) == pytest.approx(2.0)
    np.testing.assert_allclose(w.array(3), [1.0, math.sqrt(2), math.sqrt(3)])
    assert w.certified
    assert w.W == pytest.approx(1.0)


def test_constant_weight():
    w = WeightFunction.power(0.0)
    assert np.all(w.array(50) == 1.0)
    assert w.is_nonincreasing()


@pytest.mark.parametrize("kappa", [1.0, 1.5, float("inf"), float("nan")])
def test_power_rejects_non_sublinear(kappa):
    with pytest.raises(ConfigError):
        WeightFunction.power(kappa)


def test_k_below_one_rejected():
    w = WeightFunction.power(0.3)
    with pytest.raises(ConfigError):
        w(0)
    with pytest.raises(ConfigError):
        eval_weight(w, -2)


def test_table_extension():
    w = WeightFunction.from_table([1.0, 2.0 ** 0.5])
    # extension exponent from the last two entries: 0.5
    assert w.kappa == pytest.approx(0.5)
    assert w(8) == pytest.approx(2.0 ** 0.5 * 4.0 ** 0.5)
    assert w.certified


def test_table_single_entry_is_constant():
    w = WeightFunction.from_table([3.0])
    assert w(1000) == 3.0


@pytest.mark.parametrize("table", [[], [1.0, 0.0], [1.0, -1.0], [1.0, 2.0]])
def test_table_rejections(table):
    with pytest.raises(ConfigError):
        WeightFunction.from_table(table)


def test_custom_weight_failing_certificate_warns():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        w = WeightFunction.custom(lambda k: float(k))
    assert not w.certified
    assert any("certificate" in str(r.message) for r in rec)
    with pytest.raises(ConfigError):
        w.require_certified()


def test_custom_weight_nonpositive_value():
    w = WeightFunction.custom(lambda k: 1.0 if k < 50 else 1.0 / k, probe=100)
    assert w(3) == 1.0
    bad = WeightFunction.custom(lambda k: 1.0, probe=100)
    object.__setattr__(bad, "func", lambda k: -1.0)
    with pytest.raises(ConfigError):
        bad(2)


def test_certificate_probe_minimum():
    with pytest.raises(ConfigError):
        certify_sublinear(WeightFunction.power(0.0), 50)


def test_from_config():
    assert weight_from_config("power", kappa=0.25).kappa == 0.25
    assert weight_from_config("table", table=[1, 1]).kind == "table"
    with pytest.raises(ConfigError):
        weight_from_config("table")
    with pytest.raises(ConfigError):
        weight_from_config("exp")


@given(st.floats(min_value=-3.0, max_value=0.99), st.integers(min_value=1, max_value=10 ** 6))
def test_power_ratio_bounded_by_W(kappa, k):
    w = WeightFunction.power(kappa, probe=1000)
    assert w(k) / k <= w.W * (1 + 1e-12)


@given(st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=2, max_size=8))
def test_table_matches_entries(vals):
    m = len(vals)
    ext = math.log(vals[-1] / vals[-2]) / math.log(m / (m - 1))
    if ext >= 1.0:
        with pytest.raises(ConfigError):
            WeightFunction.from_table(vals)
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w = WeightFunction.from_table(vals)
    np.testing.assert_allclose(w.array(m), vals)
    assert w(m + 5) > 0
