import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metastab import operators as ops
from metastab.errors import DimensionMismatch, InvalidScenario, NonFiniteNumeric

I2 = ops.LinearPSD(np.eye(2))


def test_resolvent_examples():
    np.testing.assert_allclose(ops.resolvent(I2, 1.0, [2, 0]), [1, 0], atol=1e-12)
    box = ops.IndicatorBox([0, 0], [1, 1])
    np.testing.assert_allclose(ops.resolvent(box, 7.0, [2, -1]), [1, 0], atol=1e-12)
    l1 = ops.L1Scale(1.0, 1)
    assert ops.resolvent(l1, 1.0, [3.0])[0] == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("x,lam,beta", [(3.0, 1.0, 1.0), (-0.4, 1.0, 1.0), (1.7, 0.5, 2.0), (-5.0, 2.0, 0.3)])
def test_soft_threshold_against_grid(x, lam, beta):
    # brute-force argmin of (u - x)^2 / 2 + beta * lam * |u|
    grid = np.linspace(-10, 10, 2_000_001)
    u = grid[np.argmin(0.5 * (grid - x) ** 2 + beta * lam * np.abs(grid))]
    got = ops.resolvent(ops.L1Scale(lam, 1), beta, [x])[0]
    assert got == pytest.approx(u, abs=2e-5)


def test_projection_examples():
    assert ops.project_zero_set(ops.IndicatorBox([0], [1]), [3])[0] == 1
    np.testing.assert_allclose(ops.project_zero_set(ops.Skew2D(), [5, -2]), [0, 0])
    np.testing.assert_allclose(ops.project_zero_set(ops.LinearPSD(np.diag([1.0, 0.0])), [3, 4]), [0, 4],
                               atol=1e-12)


def test_residual_examples():
    for op in [I2, ops.IndicatorBox([0, 0], [1, 1]), ops.Skew2D(), ops.IndicatorBall([1, 1], 0.5)]:
        p = op.designated_zero
        assert ops.residual(op, 3.0, p) == pytest.approx(0.0, abs=1e-12)
    assert ops.residual(ops.IndicatorBox([0], [1]), 1.0, [3]) == pytest.approx(2.0)
    assert ops.residual(I2, 1.0, [2, 0]) == pytest.approx(1.0)


def test_resolvent_identity_examples():
    for op in [I2, ops.IndicatorBall([0, 0], 1.0), ops.Skew2D()]:
        assert ops.check_resolvent_identity(op, 1.3, 1.3, [0.3, -2.0]) <= 1e-12
    assert ops.check_resolvent_identity(I2, 2.0, 1.0, [3, 0]) <= 1e-12
    assert ops.check_resolvent_identity(ops.IndicatorBall([0, 0], 1.0), 1.0, 3.0, [2, 0]) <= 1e-12


def test_errors():
    with pytest.raises(DimensionMismatch):
        ops.resolvent(I2, 1.0, [1, 2, 3])
    with pytest.raises(NonFiniteNumeric):
        ops.resolvent(I2, 1.0, [np.nan, 0])
    with pytest.raises(ValueError):
        ops.resolvent(I2, 0.0, [1, 0])
    with pytest.raises(InvalidScenario):
        ops.LinearPSD(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(InvalidScenario):
        ops.LinearPSD(-np.eye(2))
    with pytest.raises(InvalidScenario):
        ops.IndicatorBall([0], -1.0)
    with pytest.raises(InvalidScenario):
        ops.from_dict({"kind": "indicator_box", "lo": [0], "hi": [1], "extra": 1})
    with pytest.raises(InvalidScenario):
        ops.from_dict({"kind": "nope"})


@pytest.mark.parametrize("kind", ops.CATALOG)
def test_round_trip(kind):
    op = ops.random_operator(kind, np.random.default_rng(1), 2)
    again = ops.from_dict(op.to_dict())
    x = np.array([0.7, -1.9])
    np.testing.assert_allclose(again.resolvent(2.0, x), op.resolvent(2.0, x), atol=1e-12)


points = st.lists(st.floats(-50, 50), min_size=3, max_size=3)
betas = st.floats(1e-3, 100)


@pytest.mark.parametrize("kind", ops.CATALOG)
@settings(max_examples=60, deadline=None)
@given(x=points, y=points, beta=betas)
def test_nonexpansive(kind, x, y, beta):
    op = ops.random_operator(kind, np.random.default_rng(7), 2 if kind == "skew2d" else 3)
    x, y = np.array(x[: op.dim]), np.array(y[: op.dim])
    lhs = np.linalg.norm(op.resolvent(beta, x) - op.resolvent(beta, y))
    assert lhs <= np.linalg.norm(x - y) + 1e-9


@pytest.mark.parametrize("kind", ops.CATALOG)
@settings(max_examples=60, deadline=None)
@given(x=points, a=betas, b=betas)
def test_resolvent_identity_property(kind, x, a, b):
    op = ops.random_operator(kind, np.random.default_rng(8), 2 if kind == "skew2d" else 3)
    x = np.array(x[: op.dim])
    assert ops.check_resolvent_identity(op, a, b, x) <= 1e-8 * (1 + np.linalg.norm(x))


@pytest.mark.parametrize("kind", ops.CATALOG)
@settings(max_examples=60, deadline=None)
@given(x=points, beta=betas)
def test_zero_set_properties(kind, x, beta):
    op = ops.random_operator(kind, np.random.default_rng(9), 2 if kind == "skew2d" else 3)
    x = np.array(x[: op.dim])
    p = op.project_zero_set(x)
    assert op.in_zero_set(p)
    assert ops.residual(op, beta, p) <= 1e-10
    assert op.inclusion_residual(beta, x) <= 1e-9 * (1 + np.linalg.norm(x))
    ys = op.sample_zero_set(np.random.default_rng(0), 50)
    assert np.all((ys - p) @ (x - p) <= 1e-9)
    # projection is nearest among the samples
    assert np.linalg.norm(x - p) <= np.min(np.linalg.norm(ys - x, axis=1)) + 1e-9


@settings(max_examples=100, deadline=None)
@given(x=points, y=points)
def test_single_valued_monotone(x, y):
    for op in [ops.random_operator("linear_psd", np.random.default_rng(3), 3)]:
        x_, y_ = np.array(x), np.array(y)
        assert (op.apply(x_) - op.apply(y_)) @ (x_ - y_) >= -1e-10 * (1 + np.linalg.norm(x_ - y_) ** 2)
    sk = ops.Skew2D()
    assert abs((sk.apply(x[:2]) - sk.apply(y[:2])) @ (np.array(x[:2]) - np.array(y[:2]))) <= 1e-9
