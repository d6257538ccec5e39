"""Evaluators for the rate functionals of the Halpern proximal point method.

Each functional is assembled as a :class:`~metastab.rates.NatFun` expression
tree from the rate witnesses and then evaluated either exactly or in
magnitude mode (sound tower bounds).  Every evaluator returns a
:class:`BoundValue` whose trace records the intermediate quantities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import rates as R
from .errors import BudgetExceeded, InvalidScenario, WitnessInvalid
from .rates import (
    Affine, BiNatFun, Compose, Const, Identity, Max, Monus, Mul, NatFun,
    RateWitnessBundle, affine, ceil_ln, iterate, majorant, xnat_apply,
)
from .xnat import Budget, Exact, XNat, xnat_json

MODES = ("exact", "magnitude")


@dataclass(frozen=True)
class BoundContext:
    witnesses: RateWitnessBundle
    D: int
    E: int
    ell: int = 1
    D_seq: Optional[int] = None
    mode: str = "exact"
    budget: Budget = field(default_factory=Budget.default)
    R_override: Optional[int] = None  # testing hook for the composition count

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.D < 0 or self.E < 0 or self.ell < 1:
            raise InvalidScenario("constants must be natural and ell >= 1")
        if self.D_seq is None:
            object.__setattr__(self, "D_seq", 4 * self.N * self.N)
        if self.D_seq < 1:
            raise InvalidScenario("D_seq must be >= 1")

    @property
    def N(self) -> int:
        return max(2 * self.D, self.D + self.E, 1)

    @classmethod
    def from_scenario(cls, scenario, mode: str = "exact", **kw) -> "BoundContext":
        from .iteration import constants

        bundle = scenario.bundle()
        c = constants(scenario, bundle)
        kw.setdefault("D_seq", scenario.D_seq)
        kw.setdefault("budget", scenario.budget())
        return cls(witnesses=bundle, D=c.D, E=c.E, ell=scenario.ell, mode=mode, **kw)

    def with_mode(self, mode: str) -> "BoundContext":
        return BoundContext(self.witnesses, self.D, self.E, self.ell, self.D_seq, mode,
                            self.budget, self.R_override)

    def need(self, name: str):
        w = getattr(self.witnesses, name)
        if w is None:
            raise WitnessInvalid(f"witness {name} is required but missing")
        return w


@dataclass
class BoundValue:
    functional: str
    mode: str
    value: XNat
    trace: list
    call: tuple = ()

    def to_json(self) -> dict:
        return {
            "functional": self.functional,
            "mode": self.mode,
            "value": xnat_json(self.value),
            "trace": self.trace,
        }

    def replay(self, ctx: BoundContext) -> "BoundValue":
        fn, args = self.call
        return fn(ctx, *args)


class _Tracer:
    def __init__(self, ctx: BoundContext):
        self.ctx = ctx
        self.items = []

    def note(self, name: str, value, **args):
        if isinstance(value, int):
            value = Exact(value)
        self.items.append({"name": name, "args": {k: _summ(v) for k, v in args.items()},
                           "value": xnat_json(value) if isinstance(value, XNat) else value})
        return value

    def apply(self, name: str, fn: NatFun, x, **args) -> XNat:
        try:
            v = xnat_apply(fn, x, mode=self.ctx.mode, budget=self.ctx.budget)
        except BudgetExceeded as exc:
            self._attach(exc, name)
            raise
        return self.note(name, v, **args)

    def iterate(self, name: str, fn: NatFun, r, start=0, **args) -> XNat:
        try:
            v = iterate(fn, r, start, mode=self.ctx.mode, budget=self.ctx.budget)
        except BudgetExceeded as exc:
            self._attach(exc, name)
            raise
        return self.note(name, v, **args)

    def _attach(self, exc, name):
        exc.trace = list(self.items) + [{"name": name, "args": {}, "value": "budget exceeded",
                                         "depth": exc.depth, "bits": exc.bits}]


def _summ(v):
    if isinstance(v, NatFun):
        return v.spec()
    if isinstance(v, XNat):
        return xnat_json(v)
    if hasattr(v, "spec"):
        return v.spec()
    return v


def _result(name, tr: _Tracer, value, call) -> BoundValue:
    return BoundValue(name, tr.ctx.mode, value, tr.items, call)


def _as_f(f) -> NatFun:
    return R.parse_natfun(f) if isinstance(f, str) else f


# ---------------------------------------------------------------------------
# functions of k, built as expression trees


def plus_one(f: NatFun) -> NatFun:
    return Compose(Affine(1, 1), f)


def xi_fun(ctx: BoundContext) -> NatFun:
    """k -> max{a(2(2D+E)(k+1) - 1), E(2k+1) + 1}."""
    c = 2 * (2 * ctx.D + ctx.E)
    # with D = E = 0 the argument c(k+1) - 1 is truncated at 0
    left = Compose(ctx.need("a"), affine(c, max(c - 1, 0)))
    right = plus_one(Compose(ctx.need("E"), Affine(2, 1)))
    return Max(left, right)


def chi_fun(ctx: BoundContext, ell: Optional[int] = None) -> NatFun:
    """k -> max{xi(4k+3), B(8(D+E)(k+1) ell - 1)} + 1."""
    ell = ctx.ell if ell is None else ell
    m = 8 * (ctx.D + ctx.E) * ell
    return plus_one(Max(Compose(xi_fun(ctx), Affine(4, 3)), Compose(ctx.need("B"), affine(m, max(m - 1, 0)))))


def q_fun(N: int) -> NatFun:
    """m -> 24N(m+1)^2."""
    s = Affine(1, 1)
    return Mul(Const(24 * N), Mul(s, s))


def w_fun(f: NatFun, N: int) -> NatFun:
    """m -> max{f(24N(m+1)^2), 24N(m+1)^2}."""
    q = q_fun(N)
    return Max(Compose(f, q), q)


def nu_fun(ctx: BoundContext, f: NatFun) -> NatFun:
    """m -> delta_b(f(m), f(m)) = max{2, b(f(m))}(f(m)+1) - 1."""
    bf = Compose(ctx.need("b"), f)
    return Monus(Mul(Max(Const(2), bf), Compose(Affine(1, 1), f)), 1)


def r_count(N: int, k: int) -> int:
    return N * N * (k + 1)


def R_count(N: int, k: int) -> int:
    return 4 * N**4 * (k + 1) ** 2


def sigma_fun(variant: int, ctx: BoundContext, k: int) -> NatFun:
    """n -> sigma_variant(k, n) with D = ctx.D_seq."""
    D = ctx.D_seq
    if variant == 1:
        return plus_one(Compose(ctx.need("A"), Affine(1, ceil_ln(4 * D * (k + 1)))))
    if variant == 2:
        return plus_one(_aprime(ctx).section(4 * D * (k + 1) - 1))
    raise ValueError("variant must be 1 or 2")


def _aprime(ctx) -> BiNatFun:
    return ctx.need("Aprime")


# ---------------------------------------------------------------------------
# public evaluators


def xi(ctx: BoundContext, k: int) -> BoundValue:
    tr = _Tracer(ctx)
    v = tr.apply("xi", xi_fun(ctx), k, k=k)
    return _result("xi", tr, v, (xi, (k,)))


def chi(ctx: BoundContext, k: int, ell: Optional[int] = None) -> BoundValue:
    tr = _Tracer(ctx)
    tr.apply("xi(4k+3)", xi_fun(ctx), 4 * k + 3, k=k)
    v = tr.apply("chi", chi_fun(ctx, ell), k, k=k, ell=ctx.ell if ell is None else ell)
    return _result("chi", tr, v, (chi, (k, ell)))


def delta_b(ctx: BoundContext, k: int, n: int) -> BoundValue:
    tr = _Tracer(ctx)
    bn = tr.apply("b(n)", ctx.need("b"), n, n=n)
    f = Monus(Mul(Const(k + 1), Max(Const(2), Identity())), 1)
    v = tr.apply("delta_b", f, bn, k=k, n=n)
    return _result("delta", tr, v, (delta_b, (k, n)))


def proj1_bound(ctx: BoundContext, k: int, f) -> BoundValue:
    f = majorant(_as_f(f))
    tr = _Tracer(ctx)
    r = tr.note("r", r_count(ctx.N, k), N=ctx.N, k=k)
    v = tr.iterate("f^(r)(0)", f, r, 0, f=f)
    return _result("proj1", tr, v, (proj1_bound, (k, f)))


def _proj2_core(ctx: BoundContext, tr: _Tracer, k: int, f: NatFun) -> XNat:
    N = ctx.N
    R_ = ctx.R_override if ctx.R_override is not None else R_count(N, k)
    tr.note("R", R_, N=N, k=k, override=ctx.R_override is not None)
    W = tr.iterate("w^(R)(0)", w_fun(f, N), R_, 0, f=f)
    return tr.apply("24N(w^(R)(0)+1)^2", q_fun(N), W)


def proj2_bound(ctx: BoundContext, k: int, f) -> BoundValue:
    f = majorant(_as_f(f))
    tr = _Tracer(ctx)
    v = _proj2_core(ctx, tr, k, f)
    return _result("proj2", tr, v, (proj2_bound, (k, f)))


def psi(ctx: BoundContext, k: int, f, chi1: Optional[NatFun] = None) -> BoundValue:
    f = majorant(_as_f(f))
    chi1 = chi_fun(ctx, 1) if chi1 is None else chi1
    tr = _Tracer(ctx)
    if chi1.const_value() is not None:
        v = tr.note("psi", chi1.const_value(), chi1=chi1)
        return _result("psi", tr, v, (psi, (k, f, chi1)))
    inner = _proj2_core(ctx, tr, k, Compose(f, chi1))
    v = tr.apply("psi", chi1, inner, chi1=chi1)
    return _result("psi", tr, v, (psi, (k, f, chi1)))


def Psi(ctx: BoundContext, k: int, f) -> BoundValue:
    f = majorant(_as_f(f))
    tr = _Tracer(ctx)
    v = _Psi_core(ctx, tr, k, f)
    return _result("Psi", tr, v, (Psi, (k, f)))


def _Psi_core(ctx, tr, k, f) -> XNat:
    chi1 = chi_fun(ctx, 1)
    c = chi1.const_value()
    if c is not None:
        # a constant outer function makes the inner argument irrelevant
        return tr.note("Psi", c, k=k, chi1=chi1)
    inner = _proj2_core(ctx, tr, k, Compose(nu_fun(ctx, f), chi1))
    return tr.apply("Psi", chi1, inner, k=k)


def theta(variant: int, ctx: BoundContext, R_w, G_w, k: int) -> BoundValue:
    R_w, G_w = _as_f(R_w), _as_f(G_w)
    tr = _Tracer(ctx)
    D = ctx.D_seq
    M = tr.apply("M", Max(R_w, plus_one(G_w)), 3 * k + 2, k=k)
    if variant == 1:
        c = tr.note("ceil_ln(3D(k+1))", ceil_ln(3 * D * (k + 1)), D=D, k=k)
        v = tr.apply("theta1", plus_one(Compose(ctx.need("A"), Affine(1, c.value))), M)
    elif variant == 2:
        v = tr.apply("theta2", plus_one(_aprime(ctx).section(3 * D * (k + 1) - 1)), M)
    else:
        raise ValueError("variant must be 1 or 2")
    return _result(f"theta{variant}", tr, v, (lambda c, *a: theta(variant, c, *a), (R_w, G_w, k)))


def sigma(variant: int, ctx: BoundContext, k: int, n) -> BoundValue:
    tr = _Tracer(ctx)
    v = tr.apply(f"sigma{variant}", sigma_fun(variant, ctx, k), n, k=k, n=n, D=ctx.D_seq)
    return _result(f"sigma{variant}", tr, v, (lambda c, *a: sigma(variant, c, *a), (k, n)))


def phi_parts(variant: int, ctx: BoundContext, k: int, f: NatFun):
    """The pieces k~, g, h_f of the metastability bound as expression trees."""
    N = ctx.N
    kt = 4 * (k + 1) ** 2 - 1
    e_arg = 16 * (1 + 4 * N) * (k + 1) ** 2 - 1
    g0 = ctx.need("E").eval(e_arg, ctx.budget) + 1
    g = Max(Identity(), Const(g0)) if g0 > 0 else Identity()
    sig = sigma_fun(variant, ctx, kt)
    c = 16 * (k + 1) ** 2
    h = affine((1 + 4 * N) * c, (1 + 4 * N) * (c + 1) - 1)
    h_f = Compose(h, Compose(f, Compose(sig, g)))
    return kt, g0, g, sig, h_f


def phi(variant: int, ctx: BoundContext, k: int, f) -> BoundValue:
    f = majorant(_as_f(f))
    tr = _Tracer(ctx)
    kt, g0, g, sig, h_f = phi_parts(variant, ctx, k, f)
    tr.note("k_tilde", kt, k=k)
    tr.note("g_floor", g0, N=ctx.N, k=k)
    tr.note("h_f", "defined", h_f=h_f)
    k2 = 32 * (k + 1) ** 2 - 1
    delta = _Psi_core(ctx, tr, k2, h_f)
    tr.note("Delta", delta, k=k2)
    gd = tr.apply("g(Delta)", g, delta)
    v = tr.apply(f"phi{variant}", sig, gd, k_tilde=kt)
    return _result(f"phi{variant}", tr, v, (lambda c, *a: phi(variant, c, *a), (k, f)))


FUNCTIONALS = ("xi", "chi", "delta", "proj1", "proj2", "psi", "Psi", "theta1", "theta2",
               "sigma1", "sigma2", "phi1", "phi2")
