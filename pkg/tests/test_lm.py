import numpy as np
import pytest

from fisheyekit.errors import ConvergenceError, DegenerateData
from fisheyekit.lm import central_difference_jacobian, levenberg_marquardt, scaled_gradient_norm


def rosenbrock(x):
    return np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]])


def test_rosenbrock_minimum():
    res = levenberg_marquardt(rosenbrock, [-1.2, 1.0])
    assert res.converged
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-10)
    assert np.all(np.diff(res.cost_history) <= 0)


def test_linear_problem_matches_lstsq():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(40, 4))
    b = rng.normal(size=40)
    res = levenberg_marquardt(lambda x: A @ x - b, np.zeros(4), lambda x: A)
    expected, *_ = np.linalg.lstsq(A, b, rcond=None)
    np.testing.assert_allclose(res.x, expected, atol=1e-10)


def test_exponential_fit():
    t = np.linspace(0, 2, 30)
    y = 2.5 * np.exp(-1.3 * t) + 0.2
    res = levenberg_marquardt(lambda p: p[0] * np.exp(-p[1] * t) + p[2] - y, [1.0, 0.5, 0.0])
    np.testing.assert_allclose(res.x, [2.5, 1.3, 0.2], rtol=1e-9)


def test_parameter_without_effect_is_degenerate():
    with pytest.raises(DegenerateData):
        levenberg_marquardt(lambda x: np.array([x[0] - 1.0, x[0] + 1.0]), [3.0, 5.0])


def test_iteration_cap():
    with pytest.raises(ConvergenceError) as info:
        levenberg_marquardt(rosenbrock, [-1.2, 1.0], max_iter=2)
    assert info.value.result.iterations == 2
    res = levenberg_marquardt(rosenbrock, [-1.2, 1.0], max_iter=2, raise_on_cap=False)
    assert not res.converged


def test_central_differences_on_known_jacobian():
    def fun(x):
        return np.array([np.sin(x[0]) * x[1], x[0] ** 3, np.exp(x[1])])

    x = np.array([0.3, -0.7])
    exact = np.array([[np.cos(0.3) * -0.7, np.sin(0.3)], [3 * 0.09, 0.0], [0.0, np.exp(-0.7)]])
    np.testing.assert_allclose(central_difference_jacobian(fun, x), exact, atol=1e-9)


def test_scaled_gradient_is_scale_invariant():
    rng = np.random.default_rng(1)
    J = rng.normal(size=(10, 3))
    r = rng.normal(size=10)
    assert scaled_gradient_norm(J * [1.0, 1e6, 1e-6], r) == pytest.approx(scaled_gradient_norm(J, r), rel=1e-12)
