import numpy as np
import pytest

from causal_channels.simplex import InfeasibleError, solve_feasibility


def test_simple_feasible_system():
    a = np.array([[1.0, 1.0], [1.0, -1.0]])
    b = np.array([2.0, 0.0])
    x = solve_feasibility(a, b)
    assert np.allclose(a @ x, b, atol=1e-9)
    assert np.all(x >= 0)


def test_negative_rhs_is_handled():
    a = np.array([[-1.0, 0.0]])
    b = np.array([-3.0])
    x = solve_feasibility(a, b)
    assert np.allclose(a @ x, b, atol=1e-9)


def test_infeasible_system_raises():
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    with pytest.raises(InfeasibleError):
        solve_feasibility(a, b)


def test_nonnegativity_blocks_signed_solutions():
    # x1 - x2 = -1 has no solution with a single variable pinned: use x >= 0
    a = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([0.0, 0.0, 1.0])
    with pytest.raises(InfeasibleError):
        solve_feasibility(a, b)


def test_random_feasible_systems():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m, n = int(rng.integers(2, 6)), int(rng.integers(4, 10))
        a = rng.standard_normal((m, n))
        x_true = rng.uniform(0.0, 2.0, size=n)
        b = a @ x_true
        x = solve_feasibility(a, b)
        assert np.allclose(a @ x, b, atol=1e-7)
        assert np.all(x >= -1e-12)


def test_degenerate_rows():
    a = np.array([[1.0, 1.0], [2.0, 2.0]])
    b = np.array([1.0, 2.0])
    x = solve_feasibility(a, b)
    assert np.allclose(a @ x, b, atol=1e-9)
