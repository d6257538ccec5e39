"""Acceptance criteria; each test prints one PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from conftest import box_scenario, geometric_scenario, record_verdict
from metastab import bounds as B
from metastab import iteration as it
from metastab import operators as ops
from metastab import verify as V
from metastab.errors import BudgetExceeded
from metastab.rates import Affine, canonical_witnesses, parse_natfun, xnat_apply
from metastab.sequences import Geometric, HarmonicOffset, LinearGrowth, SequenceSpec, ZeroErrors
from metastab.xnat import Budget, Exact, Tower, xnat_le


@pytest.fixture(scope="module")
def box_traj():
    return it.run(box_scenario(), 10**5)


def test_criterion_1_operator_suite():
    t0 = time.perf_counter()
    reps = V.operator_suite(samples=1000, seed=0)
    dt = time.perf_counter() - t0
    wanted = [r for r in reps if r.name.endswith((":nonexpansive", ":resolvent_identity"))]
    kinds = {r.name.split(":")[0] for r in wanted}
    ok = all(r.passed and r.checked == 1000 for r in wanted) and kinds == set(ops.CATALOG) and dt < 10
    bad = [r.name for r in wanted if not r.passed]
    assert record_verdict("criterion 1 operator suite",
                          ok, f"{len(kinds)} variants x 1000 samples, {dt:.2f}s, failing={bad}")


def test_criterion_2_closed_form_trajectory(box_traj):
    x = box_traj.points[:10**4 + 1, 0]
    n = np.arange(1, 10**4 + 1)
    err = float(np.max(np.abs(x[1:] - (1 + 2 / (n + 1)))))
    tail = abs(float(x[10**4]) - 1.0)
    ok = err <= 1e-12 and tail <= 3e-4
    assert record_verdict("criterion 2 closed-form trajectory", ok,
                          f"max |x_n - (1 + 2/(n+1))| = {err:.2e}, |x_10000 - 1| = {tail:.2e}")


def test_criterion_3_asymptotic_regularity(box_traj):
    sc = box_scenario()
    ctx = B.BoundContext.from_scenario(sc)
    t0 = time.perf_counter()
    ok = (ctx.D, ctx.E, ctx.ell) == (2, 1, 1)
    chis, worst = [], -math.inf
    for k in range(10):
        chi_k = B.chi(ctx, k).value.value
        chis.append(chi_k)
        rep = V.check_asymptotic_regularity(box_traj, sc.operator, 1.0, chi_k, k)
        ok &= rep.passed and chi_k == 40 * k + 40
        worst = max(worst, rep.max_slack)
    dt = time.perf_counter() - t0
    ok &= dt < 30
    assert record_verdict("criterion 3 asymptotic regularity", ok,
                          f"chi = {chis}, worst slack {worst:.3e}, {dt:.2f}s")


def test_criterion_4_halpern_residual():
    unit = V.B.BoundContext(box_scenario().bundle(), D=1, E=1)
    ok = B.xi(unit, 0).value == Exact(5)
    details = []
    for name, sc in (("box", box_scenario()), ("geometric", geometric_scenario())):
        ctx = B.BoundContext.from_scenario(sc)
        traj = it.run(sc, 10**5)
        for k in range(10):
            xi_k = B.xi(ctx, k).value.value
            ok &= V.check_halpern_residual(traj, sc.operator, xi_k, k).passed
        details.append(f"{name} xi(9)={B.xi(ctx, 9).value.value}")
    assert record_verdict("criterion 4 Halpern residual", ok, "unit xi(0)=5, " + ", ".join(details))


def test_criterion_5_recurrence_suites():
    t0 = time.perf_counter()
    reps = [V.synth_recurrence_suite(1, 200, 0), V.synth_recurrence_suite(2, 200, 0),
            V.synth_theta_suite(1, 200, 0), V.synth_theta_suite(2, 200, 0)]
    dt = time.perf_counter() - t0
    ok = all(r.passed and r.vacuous == 0 and r.details["instances"] == 200 for r in reps) and dt < 60
    summary = ", ".join(f"{r.name}:{'ok' if r.passed else 'fail'}" for r in reps)
    assert record_verdict("criterion 5 recurrence suites", ok, f"{summary}, {dt:.2f}s")


def test_criterion_6_metastability(box_traj):
    sc = box_scenario()
    k, f = 9, Affine(2, 0)
    rep = V.check_bound_soundness(sc, k, f, 10**4, variant=2, traj=box_traj)
    n_star = rep.details.get("n_star")
    ctx = B.BoundContext.from_scenario(sc, mode="magnitude")
    phi2 = B.phi(2, ctx, k, f).value
    depth = B.R_count(ctx.N, 31)
    height = phi2.height if isinstance(phi2, Tower) else 0
    height_ok = isinstance(phi2, Tower) and abs(height - depth) <= 10
    try:
        B.phi(2, ctx.with_mode("exact"), k, f)
        budget_ok = False
    except BudgetExceeded:
        budget_ok = True
    order_ok = n_star is not None and xnat_le(Exact(n_star), phi2)
    parts = {"n*=9": n_star == 9, "height~R(N,31)": height_ok, "exact over budget": budget_ok,
             "n*<=phi2": order_ok}
    detail = (", ".join(f"{k_}:{'ok' if v else 'fail'}" for k_, v in parts.items())
              + f"; n*={n_star}, phi2={phi2!r}, R(N,31)={depth} with N={ctx.N}")
    assert record_verdict("criterion 6 metastability soundness", all(parts.values()), detail)


def test_criterion_7_witness_validity():
    seqs = {"zero errors": SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1), ZeroErrors()),
            "geometric errors": SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1), Geometric(1.0, 0.5, (1.0,)))}
    ok, details = True, []
    for name, seq in seqs.items():
        try:
            w = canonical_witnesses(seq, kmax=20, validate=True, horizon=10**5)
            details.append(f"{name}: {w.specs()}")
        except Exception as exc:  # report any validation failure as FAIL
            ok = False
            details.append(f"{name}: {exc}")
    assert record_verdict("criterion 7 witness validity", ok, "; ".join(details))


CHAIN_STEPS = ["affine:2,3", "affine:1,7", "mul:id;id", "expe:0", "max:id;const:9", "add:id;affine:3,0",
               "comp:affine:2,1;(mul:id;id)", "monus:id;4"]


def test_criterion_8_magnitude_soundness():
    rng = np.random.default_rng(2024)
    accepted = violations = 0
    while accepted < 100:
        chain = [CHAIN_STEPS[i] for i in rng.integers(0, len(CHAIN_STEPS), int(rng.integers(1, 7)))]
        start = int(rng.integers(0, 51))
        budget = Budget(bits=10**4)
        x = Exact(start)
        tower = Tower.make(1, math.log2(start + 1) + 1e-9) if start else Exact(0)
        try:
            for s in chain:
                f = parse_natfun(s)
                x = xnat_apply(f, x, mode="exact", budget=budget)
                tower = xnat_apply(f, tower, mode="magnitude", budget=Budget(bits=8))
        except BudgetExceeded:
            continue
        accepted += 1
        violations += not xnat_le(x, tower)
    assert record_verdict("criterion 8 magnitude soundness", violations == 0,
                          f"{accepted} chains, {violations} violations")


def test_criterion_9_geometric_lemmas():
    conv, innr = V.geometric_lemma_suite(trials=100, seed=0)
    ok = conv.passed and innr.passed and conv.checked >= 100 and innr.checked >= 100
    assert record_verdict("criterion 9 geometric lemmas", ok,
                          f"convex: checked={conv.checked} slack={conv.max_slack:.2e}; "
                          f"inner product: checked={innr.checked} slack={innr.max_slack:.2e}")
