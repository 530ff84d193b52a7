import numpy as np
import pytest
from hypothesis import given, strategies as st

from hallmhd.ode import StepUnderflow, dopri45


def test_exponential_decay():
    y, st_ = dopri45(lambda t, y: -2.0 * y, 0.0, [1.0], 1.0, 1e-10)
    assert abs(y[0] - np.exp(-2.0)) < 1e-9
    assert st_.accepted > 0


def test_harmonic_oscillator_backward_in_time():
    f = lambda t, y: np.array([y[1], -y[0]])
    y, _ = dopri45(f, 1.0, [np.cos(1.0), -np.sin(1.0)], 0.0, 1e-11)
    assert np.allclose(y, [1.0, 0.0], atol=1e-9)


def test_fixed_step_fifth_order():
    f = lambda t, y: np.array([y[1], -y[0]])
    errs = []
    for h in (0.2, 0.1):
        y, _ = dopri45(f, 0.0, [1.0, 0.0], 2.0, 1.0, fixed_step=h)
        errs.append(np.abs(y - [np.cos(2.0), -np.sin(2.0)]).max())
    assert np.log2(errs[0] / errs[1]) > 4.5


def test_zero_span_returns_copy():
    y0 = np.array([1.0, 2.0])
    y, st_ = dopri45(lambda t, y: y, 0.5, y0, 0.5, 1e-8)
    assert np.array_equal(y, y0) and y is not y0 and st_.accepted == 0


def test_step_underflow_is_labelled():
    f = lambda t, y: np.array([1.0 / (1.0 - t) ** 2])
    with pytest.raises(StepUnderflow, match="blowup"):
        dopri45(f, 0.0, [1.0], 2.0, 1e-10, label="blowup")


@given(st.floats(-3, 3), st.floats(0.1, 2))
def test_linear_scalar_accuracy_tracks_tolerance(lam, T):
    for tol in (1e-6, 1e-10):
        y, _ = dopri45(lambda t, y: lam * y, 0.0, [1.0], T, tol)
        assert abs(y[0] - np.exp(lam * T)) <= 200 * tol * max(1.0, np.exp(lam * T))
