import decimal
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metastab.errors import BudgetExceeded, WitnessInvalid
from metastab.rates import (
    Affine, BilinearPlus, CeilExpE, Compose, Const, Const2, Identity, Max, Table,
    canonical_witnesses, ceil_exp, ceil_ln, check_majorizes, iterate, majorant, parse_binatfun, parse_natfun,
    validate_witness, xnat_apply,
)
from metastab.sequences import (
    ErrorTable, Geometric, HarmonicOffset, LinearGrowth, SequenceSpec, Table as SeqTable,
)
from metastab.xnat import Budget, Exact, Tower, xnat_le


def ceil_exp_oracle(x):
    with decimal.localcontext() as ctx:
        ctx.prec = 80
        v = decimal.Decimal(x).exp()
        return int(v.to_integral_value(rounding=decimal.ROUND_CEILING))


# -- evaluation -------------------------------------------------------------


def test_eval_examples():
    assert Affine(2, 3)(5) == 13
    assert CeilExpE(0)(2) == ceil_exp_oracle(2) == 8
    assert Compose(Affine(1, 1), Affine(1, 1))(0) == 2


@pytest.mark.parametrize("x", list(range(0, 60)))
def test_ceil_exp_against_decimal(x):
    assert CeilExpE(0)(x) == ceil_exp_oracle(x)


@pytest.mark.parametrize("v", [1, 2, 3, 7, 8, 20, 21, 54, 55, 403, 404, 10**9])
def test_ceil_ln_against_decimal(v):
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        want = int(decimal.Decimal(v).ln().to_integral_value(rounding=decimal.ROUND_CEILING))
    assert ceil_ln(v) == want


def test_eval_budget():
    with pytest.raises(BudgetExceeded):
        CeilExpE(0).eval(10**6, Budget(bits=1000))


def test_parse_round_trip():
    for text in ["id", "const:4", "affine:2,3", "expe:1", "max:id;const:7", "comp:affine:2,0;id",
                 "table:5,1,7", "add:id;const:1", "mul:id;id", "maj:table:3,1"]:
        f = parse_natfun(text)
        g = parse_natfun(f.spec())
        assert [f(n) for n in range(12)] == [g(n) for n in range(12)]


@pytest.mark.parametrize("bad", ["", "foo", "affine:1", "const:-1", "max:id", "table:", "expe:x"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_natfun(bad)


def test_parse_binatfun():
    assert parse_binatfun("bilinear:2")(1, 2) == 2 * 2 * 3
    assert parse_binatfun("const2:3")(5, 5) == 3
    assert parse_binatfun("table2:0,1|2,3")(1, 0) == 2
    with pytest.raises(ValueError):
        parse_binatfun("bilinear")


# -- majorants --------------------------------------------------------------


def test_majorant_examples():
    f = Affine(3, 1)
    m = majorant(f)
    assert [m(n) for n in range(50)] == [f(n) for n in range(50)]
    t = majorant(Table((5, 1, 7)))
    assert [t(n) for n in range(3)] == [5, 5, 7]
    assert majorant(Const(4))(10) == 4


def test_check_majorizes_examples():
    assert check_majorizes(Identity(), Identity(), 50)
    assert not check_majorizes(Const(0), Identity(), 2)


tables = st.lists(st.integers(0, 1000), min_size=1, max_size=30).map(lambda v: Table(tuple(v)))


@settings(max_examples=100, deadline=None)
@given(tables)
def test_majorant_majorizes(g):
    assert check_majorizes(majorant(g), g, 1000)


def _brute_majorizes(f, g, H):
    return all(g(m) <= f(n) and f(m) <= f(n) for n in range(H + 1) for m in range(n + 1))


@settings(max_examples=60, deadline=None)
@given(tables, tables)
def test_check_majorizes_matches_definition(f, g):
    assert check_majorizes(f, g, 40) == _brute_majorizes(f, g, 40)


@pytest.mark.parametrize("f", [Identity(), Const(3), Affine(2, 1), CeilExpE(0), Max(Identity(), Const(9))])
def test_reflexive_for_monotone(f):
    assert check_majorizes(f, f, 200)


# -- witnesses --------------------------------------------------------------

HARM = SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1))
GEO = SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1), Geometric(1.0, 0.5, (1.0,)))


def test_validate_examples():
    assert validate_witness("a", Identity(), HARM, 10**5, 20).valid
    assert validate_witness("A'", BilinearPlus(1), HARM, 10**5, 20).valid
    assert validate_witness("E", Const(0), HARM, 10**5, 20).valid


def test_validate_rejects_with_counterexample():
    rep = validate_witness("a", Const(0), HARM, 1000, 5)
    # alpha_0 = 1/2 first exceeds 1/(k+1) at k = 2
    assert not rep.valid and rep.counterexample == (2, 0)
    with pytest.raises(WitnessInvalid) as exc:
        rep.raise_if_invalid()
    assert exc.value.counterexample == rep.counterexample
    assert not validate_witness("A'", Const2(0), HARM, 1000, 5).valid
    assert not validate_witness("B", Const(0), HARM, 1000, 5).valid
    assert not validate_witness("b", Const(1), HARM, 1000, 5).valid
    assert not validate_witness("E", Const(0), GEO, 1000, 5).valid
    assert not validate_witness("A", CeilExpE(0), SequenceSpec(HarmonicOffset(3)), 1000, 20).valid


def test_validate_A_on_table_alpha():
    seq = SequenceSpec(SeqTable(tuple([0.5] * 200)), LinearGrowth(1, 1))
    # sum_{i<=n} 0.5 >= k  iff  n >= 2k - 1
    assert validate_witness("A", Affine(2, 0), seq, 100, 20).valid
    assert not validate_witness("A", Identity(), seq, 100, 20).valid


def test_canonical_examples():
    b = canonical_witnesses(HARM)
    assert b.a == Identity()
    assert b.B == Identity()
    assert b.b == Affine(1, 1)
    assert b.E == Const(0)
    assert b.Aprime == BilinearPlus(1)


@pytest.mark.parametrize("seq", [HARM, GEO, SequenceSpec(HarmonicOffset(3), LinearGrowth(0.5, 2)),
                                 SequenceSpec(HarmonicOffset(2), LinearGrowth(3, 0.25),
                                              Geometric(2.0, 0.8, (0.6, 0.8)))])
def test_canonical_validate(seq):
    b = canonical_witnesses(seq, kmax=20, validate=False)
    for kind, w in (("a", b.a), ("A", b.A), ("A'", b.Aprime), ("b", b.b), ("B", b.B), ("E", b.E)):
        assert validate_witness(kind, w, seq, 10**4, 20).valid, kind


def test_canonical_needs_parametric():
    with pytest.raises(WitnessInvalid):
        canonical_witnesses(SequenceSpec(errors=ErrorTable(((1.0,),))))


# -- iteration and extended naturals ---------------------------------------


def w_id_1():
    q = Affine(1, 1)
    sq = Compose(Affine(24, 0), parse_natfun("mul:(affine:1,1);(affine:1,1)"))
    return Max(Compose(Identity(), sq), sq), q


def test_iterate_examples():
    assert iterate(Affine(1, 1), 5, 0) == Exact(5)
    w, _ = w_id_1()
    m = 0
    for _ in range(2):
        m = 24 * (m + 1) ** 2
    assert iterate(w, 2, 0) == Exact(m) == Exact(15000)


def test_iterate_deep_quadratic():
    w, _ = w_id_1()
    with pytest.raises(BudgetExceeded) as exc:
        iterate(w, 4096, 0, mode="exact")
    assert exc.value.depth is not None and exc.value.depth < 4096
    t = iterate(w, 4096, 0, mode="magnitude")
    assert isinstance(t, Tower)
    # log2 log2 of the value grows by ~1 per squaring
    assert 4090 <= t.top_at_height(2) <= 4100


def test_xnat_apply_examples():
    assert xnat_apply(Affine(2, 3), Exact(5)) == Exact(13)
    t = Tower.make(3, 20.0)
    assert xnat_apply(Identity(), t) == t
    r = xnat_apply(CeilExpE(0), Tower.make(1, 10.0))
    assert isinstance(r, Tower)
    assert r.top_at_height(2) >= math.log2(math.log2(math.e) * 1024)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["affine:2,3", "affine:1,7", "mul:id;id", "expe:0", "max:id;const:9",
                                 "add:id;affine:3,0", "comp:affine:2,1;(mul:id;id)"]),
                min_size=1, max_size=6),
       st.integers(0, 50))
def test_magnitude_upper_bounds_exact(chain, start):
    budget = Budget(bits=10**4)
    x, tower = Exact(start), Tower.make(1, math.log2(start + 1) + 1e-9) if start else Exact(0)
    for s in chain:
        f = parse_natfun(s)
        try:
            x = xnat_apply(f, x, mode="exact", budget=budget)
        except BudgetExceeded:
            return
        tower = xnat_apply(f, tower, mode="magnitude", budget=Budget(bits=8))
    assert xnat_le(x, tower)


def test_ceil_exp_huge_argument_hits_budget():
    with pytest.raises(BudgetExceeded):
        ceil_exp(1 << 2000, Budget(bits=10**4))
