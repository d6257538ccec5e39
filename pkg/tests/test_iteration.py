import csv
import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import box_scenario
from metastab import iteration as it
from metastab import operators as ops
from metastab.errors import HorizonExhausted, InvalidScenario
from metastab.sequences import (
    ErrorTable, Geometric, HarmonicOffset, LinearGrowth, SequenceSpec, Table,
)


def exact_box_iterates(n):
    """Exact rational iterates of the box scenario: J is the projection onto [0,1]."""
    x0 = Fraction(3)
    x, out = x0, [x0]
    for k in range(n):
        a = Fraction(1, k + 2)
        x = a * x0 + (1 - a) * min(max(x, Fraction(0)), Fraction(1))
        out.append(x)
    return out


def test_box_first_iterates(box):
    traj = it.run(box, 3)
    want = exact_box_iterates(3)
    np.testing.assert_allclose(traj.points[:, 0], [float(v) for v in want], atol=1e-15)
    assert [float(v) for v in want[1:]] == pytest.approx([2.0, 5 / 3, 1.5])


def test_box_closed_form(box):
    traj = it.run(box, 2000)
    exact = exact_box_iterates(2000)
    n = np.arange(1, 2001)
    np.testing.assert_allclose(traj.points[1:, 0], 1 + 2 / (n + 1), atol=1e-12)
    assert all(exact[k] == 1 + Fraction(2, k + 1) for k in range(1, 2001))


def test_fixed_point_start():
    sc = it.Scenario(ops.IndicatorBall([1.0, 2.0], 0.5), [1.0, 2.25], SequenceSpec())
    traj = it.run(sc, 50)
    # a x0 + (1 - a) x0 can differ from x0 in the last bit
    np.testing.assert_allclose(traj.points, np.broadcast_to(traj.points[0], traj.points.shape), atol=1e-14)


def test_linear_one_step():
    sc = it.Scenario(ops.LinearPSD(np.eye(1)), [1.0], SequenceSpec())
    assert it.run(sc, 1).points[1, 0] == pytest.approx(0.75, abs=1e-15)


def test_recurrence_bit_exact(geometric):
    assert it.run(geometric, 500).recurrence_defect() == 0.0


def test_run_errors(box):
    with pytest.raises(InvalidScenario):
        it.run(box, -1)
    small = box_scenario(horizon=10)
    with pytest.raises(HorizonExhausted):
        it.run(small, 11)
    short = it.Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0],
                        SequenceSpec(Table((0.5, 0.5)), LinearGrowth(1, 1)))
    with pytest.raises(HorizonExhausted):
        it.run(short, 5)
    with pytest.raises(InvalidScenario):
        it.Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0], SequenceSpec(Table((0.5, 1.0))))
    with pytest.raises(InvalidScenario):
        it.Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0], ell=0)


def test_steps_zero(box):
    traj = it.run(box, 0)
    assert traj.horizon == 0 and traj.points.shape == (1, 1)


def test_constants_examples(box, geometric):
    assert it.constants(box).to_dict() == {"D": 2, "E": 1, "N": 4}
    at_p = it.Scenario(ops.IndicatorBox([0.0], [1.0]), [0.5], SequenceSpec())
    assert it.constants(at_p).to_dict() == {"D": 0, "E": 1, "N": 1}
    # E(0) = 0 for c = 1, rho = 1/2, so the error sum is ||e_0|| = 1
    assert geometric.bundle().E(0) == 0
    assert it.constants(geometric).E == 2


def test_ball_bound_checks(box, geometric):
    for sc in (box, geometric):
        traj = it.run(sc, 3000)
        p = sc.operator.project_zero_set(sc.x0)
        rep = it.ball_bound_check(traj, p)
        assert rep.passed and rep.max_slack <= 1e-9
    at_p = it.Scenario(ops.IndicatorBox([0.0], [1.0]), [0.5], SequenceSpec())
    assert it.ball_bound_check(it.run(at_p, 10), [0.5]).passed


def test_ball_bound_detects_violation(box):
    traj = it.run(box, 10)
    # a point that is not a zero breaks the radius-of-ball bound
    assert not it.ball_bound_check(traj, [5.0], calE=1).passed


def test_halpern_chain(box, geometric):
    for sc in (box, geometric):
        c = it.constants(sc)
        assert it.halpern_chain_check(it.run(sc, 3000), c.D, c.E).passed


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
       st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_subdifferential_inequality(x, y):
    assert it.subdifferential_slack(x, y) <= 1e-9 * (1 + np.dot(x, x) + np.dot(y, y))


def test_csv_columns(box):
    text = it.run(box, 4).to_csv(1.0)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["n", "x", "residual_gamma", "alpha_n", "beta_n", "err_norm"]
    assert len(rows) == 5
    assert float(rows[2]["x"]) == pytest.approx(5 / 3)
    assert float(rows[2]["residual_gamma"]) == pytest.approx(2 / 3)
    two = it.run(it.Scenario(ops.Skew2D(), [1.0, -2.0]), 1).to_csv()
    assert ";" in list(csv.DictReader(io.StringIO(two)))[0]["x"]


kinds = st.sampled_from(ops.CATALOG)


@settings(max_examples=40, deadline=None)
@given(kinds, st.integers(0, 10**6), st.integers(1, 3), st.floats(0.1, 5), st.floats(0.1, 3),
       st.floats(0, 2), st.floats(0.1, 0.9))
def test_random_scenarios_invariants(kind, seed, c, slope, offset, ec, rho):
    rng = np.random.default_rng(seed)
    op = ops.random_operator(kind, rng, 2)
    x0 = rng.normal(scale=3, size=2)
    u = rng.normal(size=2)
    u /= np.linalg.norm(u)
    seq = SequenceSpec(HarmonicOffset(c), LinearGrowth(slope, offset), Geometric(ec, rho, tuple(u)))
    sc = it.Scenario(op, x0, seq)
    traj = it.run(sc, 300)
    assert traj.recurrence_defect() == 0.0
    p = op.project_zero_set(x0)
    cst = it.constants(sc)
    assert it.ball_bound_check(traj, p).passed
    assert it.halpern_chain_check(traj, cst.D, cst.E).passed
    # any reference point in B_N around p
    v = rng.normal(size=2)
    xt = p + cst.N * rng.random() * v / np.linalg.norm(v)
    q = it.distance_recurrence_sequences(traj, xt)
    a = traj.alphas
    rhs = (1 - a) * (q["s"][:-1] + q["v"]) + a * q["r"] + q["gamma"]
    assert np.all(q["s"][1:] - rhs <= 1e-9 * (1 + q["s"][1:]))


def test_distance_recurrence_check(box):
    assert it.distance_recurrence_check(it.run(box, 500), [1.0]).passed


def test_error_table_scenario():
    pts = tuple((0.1 * 0.5**n,) for n in range(20))
    sc = it.Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0], SequenceSpec(errors=ErrorTable(pts)))
    traj = it.run(sc, 20)
    np.testing.assert_allclose(traj.err_norms(), [p[0] for p in pts])
    with pytest.raises(HorizonExhausted):
        it.run(sc, 21)
