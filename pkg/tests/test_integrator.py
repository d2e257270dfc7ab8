import numpy as np
import pytest

from pafluid.errors import StiffnessError
from pafluid.integrator import dopri45


def test_exponential_decay():
    sol = dopri45(lambda t, y: -y, np.array([1.0]), 0.0, np.linspace(0, 5, 11), rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(sol.y[:, 0], np.exp(-sol.t), rtol=1e-8)


def test_lands_on_output_times():
    t_eval = [0.0, 0.3, 0.30001, 2.0]
    sol = dopri45(lambda t, y: np.array([1.0]), np.array([0.0]), 0.0, t_eval)
    np.testing.assert_allclose(sol.y[:, 0], t_eval, atol=1e-12)


def test_zero_length():
    sol = dopri45(lambda t, y: y, np.array([2.0, 3.0]), 1.0, [1.0])
    np.testing.assert_array_equal(sol.y[0], [2.0, 3.0])
    assert sol.stats.accepted == 0


def test_guard_keeps_nonnegative():
    # linear decay to zero in finite time, then held at zero by the clamp
    def f(t, y):
        return np.array([-1.0 if y[0] > 0 else 0.0])
    sol = dopri45(f, np.array([1.0]), 0.0, np.linspace(0, 2, 9), guard=lambda y: 1.0)
    assert np.all(sol.y >= 0)


def test_stiffness_error():
    # the exact solution leaves the nonnegative cone at t = 1; the guard keeps rejecting
    with pytest.raises(StiffnessError):
        dopri45(lambda t, y: np.array([-1.0]), np.array([1.0]), 0.0, [2.0],
                guard=lambda y: 1.0, max_consecutive_rejects=5)


def test_rejects_unsorted_eval():
    with pytest.raises(ValueError):
        dopri45(lambda t, y: y, np.array([1.0]), 0.0, [1.0, 0.5])
