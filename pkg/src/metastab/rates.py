"""Monotone functions on the naturals, rate witnesses and their magnitudes.

A :class:`NatFun` is an immutable expression tree that can be evaluated
exactly on Python integers (subject to a bit budget) and, in magnitude mode,
on :class:`~metastab.xnat.Mag` upper bounds.  The magnitude evaluation of
every node bounds ``sup_{v <= X} f(v)``, so it is sound for non-monotone
functions too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

import mpmath
import numpy as np

from . import xnat as X
from .errors import BudgetExceeded, UnsupportedGrowth, WitnessInvalid
from .sequences import Geometric, HarmonicOffset, LinearGrowth, SequenceSpec, ZeroErrors
from .xnat import Budget, Exact, Mag, Tower, XNat

# ---------------------------------------------------------------------------
# exact exponential / logarithm helpers


@lru_cache(maxsize=4096)
def _ceil_exp_cached(x: int, bits: int) -> int:
    prec = bits + 64
    while True:
        with mpmath.workprec(prec):
            y = mpmath.exp(x)
            fl = mpmath.floor(y)
            frac = y - fl
            if frac > mpmath.mpf(2) ** -32 and frac < 1 - mpmath.mpf(2) ** -32:
                return int(fl) + 1
        prec *= 2


def ceil_exp(x: int, budget: Optional[Budget] = None) -> int:
    """Exact ceil(e**x) for a natural x."""
    if x == 0:
        return 1
    # integer estimate of x * log2(e), safe for arguments beyond float range
    bits = x * 14427 // 10000 + 2
    (budget or Budget.default()).check_bits(bits, "ceil(exp)")
    return _ceil_exp_cached(x, bits)


def ceil_ln(v: int) -> int:
    """Smallest natural j with e**j >= v, decided by integer comparisons only."""
    if v <= 1:
        return 0
    j = max(1, int(math.log(v)) - 1)
    while j > 1 and ceil_exp(j - 1) - 1 >= v:
        j -= 1
    # e**j is irrational for j >= 1, so e**j >= v  <=>  floor(e**j) >= v
    while ceil_exp(j) - 1 < v:
        j += 1
    return j


# ---------------------------------------------------------------------------
# growth classes


@dataclass(frozen=True)
class Growth:
    """Global upper bound on a function.

    ``affine``:  f(v) <= a*v + b
    ``poly``:    f(v) <= C*(v+1)**d
    ``exppoly``: f(v) <= 2**(C*(v+1)**d)
    """

    kind: str
    a: int = 0
    b: int = 0
    C: int = 0
    d: int = 0

    def as_poly(self) -> "Growth":
        if self.kind == "affine":
            return Growth("poly", C=max(self.a, self.b), d=1 if self.a else 0)
        return self

    def as_exppoly(self) -> "Growth":
        g = self.as_poly()
        if g.kind == "poly":
            return Growth("exppoly", C=max(g.C, 1), d=g.d)
        return g


_RANK = {"affine": 0, "poly": 1, "exppoly": 2}


def _lift_pair(f: Growth, g: Growth):
    kind = max(f.kind, g.kind, key=_RANK.get)
    conv = {"affine": lambda x: x, "poly": Growth.as_poly, "exppoly": Growth.as_exppoly}[kind]
    return kind, conv(f), conv(g)


def growth_max(f, g):
    if f is None or g is None:
        return None
    kind, f, g = _lift_pair(f, g)
    if kind == "affine":
        return Growth("affine", a=max(f.a, g.a), b=max(f.b, g.b))
    return Growth(kind, C=max(f.C, g.C), d=max(f.d, g.d))


def growth_add(f, g):
    if f is None or g is None:
        return None
    kind, f, g = _lift_pair(f, g)
    if kind == "affine":
        return Growth("affine", a=f.a + g.a, b=f.b + g.b)
    if kind == "poly":
        return Growth("poly", C=f.C + g.C, d=max(f.d, g.d))
    return Growth("exppoly", C=f.C + g.C + 1, d=max(f.d, g.d))


def growth_mul(f, g):
    if f is None or g is None:
        return None
    kind = max(f.kind, g.kind, key=_RANK.get)
    if kind != "exppoly":
        f, g = f.as_poly(), g.as_poly()
        return Growth("poly", C=f.C * g.C, d=f.d + g.d)
    f, g = f.as_exppoly(), g.as_exppoly()
    return Growth("exppoly", C=f.C + g.C, d=max(f.d, g.d))


def growth_compose(f, g):
    """Growth of v -> f(g(v))."""
    if f is None or g is None:
        return None
    if f.kind == "affine" and g.kind == "affine":
        return Growth("affine", a=f.a * g.a, b=f.a * g.b + f.b)
    if f.kind == "exppoly" and g.kind == "exppoly":
        return None
    if g.kind != "exppoly":
        gp = g.as_poly()
        if f.kind == "exppoly":
            return Growth("exppoly", C=f.C * (gp.C + 1) ** f.d, d=gp.d * f.d)
        fp = f.as_poly()
        return Growth("poly", C=fp.C * (gp.C + 1) ** fp.d, d=gp.d * fp.d)
    # polynomial of an exponential
    fp = f.as_poly()
    if fp.C == 0:
        return Growth("affine", a=0, b=0)
    lc = max(0, math.ceil(math.log2(fp.C)))
    return Growth("exppoly", C=lc + fp.d + fp.d * g.C, d=g.d)


# ---------------------------------------------------------------------------
# NatFun expression tree


class NatFun:
    """A function N -> N given as an immutable expression tree."""

    def __call__(self, n: int) -> int:
        return self.eval(n)

    def eval(self, n: int, budget: Optional[Budget] = None) -> int:
        budget = budget or Budget.default()
        v = self._ex(int(n), budget)
        budget.check_bits(v.bit_length())
        return v

    def _ex(self, n: int, budget: Budget) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def _mag(self, x: Mag) -> Mag:  # pragma: no cover - abstract
        raise NotImplementedError

    def growth(self) -> Optional[Growth]:
        return None

    def const_value(self) -> Optional[int]:
        return None

    def is_monotone(self) -> bool:
        """Structural monotonicity (sufficient, not necessary)."""
        return True

    def spec(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def __repr__(self):
        return f"NatFun({self.spec()})"


@dataclass(frozen=True, repr=False)
class Identity(NatFun):
    def _ex(self, n, budget):
        return n

    def _mag(self, x):
        return x

    def growth(self):
        return Growth("affine", a=1, b=0)

    def spec(self):
        return "id"


@dataclass(frozen=True, repr=False)
class Const(NatFun):
    c: int

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("constants must be natural")

    def _ex(self, n, budget):
        return self.c

    def _mag(self, x):
        return X.mag_from_int(self.c)

    def growth(self):
        return Growth("affine", a=0, b=self.c)

    def const_value(self):
        return self.c

    def spec(self):
        return f"const:{self.c}"


@dataclass(frozen=True, repr=False)
class Affine(NatFun):
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("affine coefficients must be natural")

    def _ex(self, n, budget):
        if self.a and n:
            budget.check_bits(self.a.bit_length() + n.bit_length())
        return self.a * n + self.b

    def _mag(self, x):
        return X.mag_add(X.mag_mul(X.mag_from_int(self.a), x), X.mag_from_int(self.b))

    def growth(self):
        return Growth("affine", a=self.a, b=self.b)

    def const_value(self):
        return self.b if self.a == 0 else None

    def spec(self):
        return f"affine:{self.a},{self.b}"


def affine(a: int, b: int) -> NatFun:
    """Affine map, collapsing the trivial shapes to Identity / Const."""
    if a == 1 and b == 0:
        return Identity()
    if a == 0:
        return Const(b)
    return Affine(a, b)


@dataclass(frozen=True, repr=False)
class CeilExpE(NatFun):
    """n -> ceil(e**(n + s))."""

    s: int = 0

    def _ex(self, n, budget):
        return ceil_exp(n + self.s, budget)

    def _mag(self, x):
        arg = X.mag_add(x, X.mag_from_int(self.s))
        return X.mag_add(X.mag_exp_e(arg), X.ONE)

    def growth(self):
        c = math.ceil(1 + 1.4426950408889634 * max(self.s, 1)) + 1
        return Growth("exppoly", C=c, d=1)

    def spec(self):
        return f"expe:{self.s}"


@dataclass(frozen=True, repr=False)
class Max(NatFun):
    f: NatFun
    g: NatFun

    def _ex(self, n, budget):
        return max(self.f._ex(n, budget), self.g._ex(n, budget))

    def _mag(self, x):
        return X.mag_max(self.f._mag(x), self.g._mag(x))

    def growth(self):
        return growth_max(self.f.growth(), self.g.growth())

    def const_value(self):
        a, b = self.f.const_value(), self.g.const_value()
        return max(a, b) if a is not None and b is not None else None

    def is_monotone(self):
        return self.f.is_monotone() and self.g.is_monotone()

    def spec(self):
        return f"max:({self.f.spec()});({self.g.spec()})"


@dataclass(frozen=True, repr=False)
class Add(NatFun):
    f: NatFun
    g: NatFun

    def _ex(self, n, budget):
        return self.f._ex(n, budget) + self.g._ex(n, budget)

    def _mag(self, x):
        return X.mag_add(self.f._mag(x), self.g._mag(x))

    def growth(self):
        return growth_add(self.f.growth(), self.g.growth())

    def const_value(self):
        a, b = self.f.const_value(), self.g.const_value()
        return a + b if a is not None and b is not None else None

    def is_monotone(self):
        return self.f.is_monotone() and self.g.is_monotone()

    def spec(self):
        return f"add:({self.f.spec()});({self.g.spec()})"


@dataclass(frozen=True, repr=False)
class Mul(NatFun):
    f: NatFun
    g: NatFun

    def _ex(self, n, budget):
        a = self.f._ex(n, budget)
        if a == 0:
            return 0
        b = self.g._ex(n, budget)
        budget.check_bits(a.bit_length() + b.bit_length())
        return a * b

    def _mag(self, x):
        return X.mag_mul(self.f._mag(x), self.g._mag(x))

    def growth(self):
        return growth_mul(self.f.growth(), self.g.growth())

    def const_value(self):
        a, b = self.f.const_value(), self.g.const_value()
        return a * b if a is not None and b is not None else None

    def is_monotone(self):
        return self.f.is_monotone() and self.g.is_monotone()

    def spec(self):
        return f"mul:({self.f.spec()});({self.g.spec()})"


@dataclass(frozen=True, repr=False)
class Monus(NatFun):
    """n -> max(f(n) - c, 0)."""

    f: NatFun
    c: int

    def _ex(self, n, budget):
        return max(self.f._ex(n, budget) - self.c, 0)

    def _mag(self, x):
        return X.mag_monus(self.f._mag(x), self.c)

    def growth(self):
        return self.f.growth()

    def const_value(self):
        a = self.f.const_value()
        return max(a - self.c, 0) if a is not None else None

    def is_monotone(self):
        return self.f.is_monotone()

    def spec(self):
        return f"monus:({self.f.spec()});{self.c}"


@dataclass(frozen=True, repr=False)
class Compose(NatFun):
    """n -> f(g(n))."""

    f: NatFun
    g: NatFun

    def _ex(self, n, budget):
        c = self.f.const_value()
        if c is not None:
            return c
        return self.f._ex(self.g._ex(n, budget), budget)

    def _mag(self, x):
        c = self.f.const_value()
        if c is not None:
            return X.mag_from_int(c)
        return self.f._mag(self.g._mag(x))

    def growth(self):
        c = self.f.const_value()
        if c is not None:
            return Growth("affine", a=0, b=c)
        return growth_compose(self.f.growth(), self.g.growth())

    def const_value(self):
        c = self.f.const_value()
        if c is not None:
            return c
        d = self.g.const_value()
        if d is not None and isinstance(self.f, (Identity, Affine)):
            return self.f._ex(d, Budget())
        return None

    def is_monotone(self):
        return self.f.const_value() is not None or (self.f.is_monotone() and self.g.is_monotone())

    def spec(self):
        return f"comp:({self.f.spec()});({self.g.spec()})"


@dataclass(frozen=True, repr=False)
class Table(NatFun):
    """Finite table; past its end the value is ``tail(n)`` or the last entry."""

    values: Tuple[int, ...]
    tail: Optional[NatFun] = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if not self.values or min(self.values) < 0:
            raise ValueError("table needs at least one natural value")

    def _ex(self, n, budget):
        if n < len(self.values):
            return self.values[n]
        if self.tail is not None:
            return self.tail._ex(n, budget)
        return self.values[-1]

    def _mag(self, x):
        if x.h == 0 and x.t < len(self.values) - 1:
            m = X.mag_from_int(max(self.values[: int(x.t) + 1]))
        else:
            m = X.mag_from_int(max(self.values))
        if self.tail is not None and not (x.h == 0 and x.t < len(self.values)):
            m = X.mag_max(m, self.tail._mag(x))
        return m

    def growth(self):
        g = Growth("affine", a=0, b=max(self.values))
        return g if self.tail is None else growth_max(g, self.tail.growth())

    def const_value(self):
        if self.tail is None and len(set(self.values)) == 1:
            return self.values[0]
        return None

    def is_monotone(self):
        v = self.values
        if any(v[i] > v[i + 1] for i in range(len(v) - 1)):
            return False
        if self.tail is None:
            return True
        return self.tail.is_monotone() and self.tail.eval(len(v)) >= v[-1]

    def spec(self):
        if self.tail is not None:
            return f"tablet:{','.join(map(str, self.values))};({self.tail.spec()})"
        return "table:" + ",".join(map(str, self.values))


@dataclass(frozen=True, repr=False)
class MajorantOf(NatFun):
    """n -> max{f(m) : m <= n}."""

    f: NatFun

    def _ex(self, n, budget):
        if self.f.is_monotone():
            return self.f._ex(n, budget)
        if n > budget.steps:
            raise BudgetExceeded(f"majorant scan over {n + 1} points", depth=n)
        return max(self.f._ex(m, budget) for m in range(n + 1))

    def _mag(self, x):
        return self.f._mag(x)

    def growth(self):
        return self.f.growth()

    def const_value(self):
        return self.f.const_value()

    def spec(self):
        return f"maj:({self.f.spec()})"


# ---------------------------------------------------------------------------
# two-argument witnesses (A')


class BiNatFun:
    def __call__(self, m: int, k: int) -> int:
        return self._ex(int(m), int(k), Budget.default())

    def _ex(self, m: int, k: int, budget: Budget) -> int:  # pragma: no cover
        raise NotImplementedError

    def section(self, k: int) -> NatFun:
        """The one-argument function m -> self(m, k)."""
        raise NotImplementedError  # pragma: no cover


@dataclass(frozen=True)
class BilinearPlus(BiNatFun):
    """(m, k) -> c*(m+1)*(k+1)."""

    c: int = 1

    def _ex(self, m, k, budget):
        budget.check_bits(self.c.bit_length() + (m + 1).bit_length() + (k + 1).bit_length())
        return self.c * (m + 1) * (k + 1)

    def section(self, k):
        s = self.c * (k + 1)
        return affine(s, s)

    def spec(self):
        return f"bilinear:{self.c}"


@dataclass(frozen=True)
class Const2(BiNatFun):
    c: int = 0

    def _ex(self, m, k, budget):
        return self.c

    def section(self, k):
        return Const(self.c)

    def spec(self):
        return f"const2:{self.c}"


@dataclass(frozen=True)
class Table2(BiNatFun):
    """rows[m][k]; out-of-range indices clamp to the last row/column."""

    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))

    def _ex(self, m, k, budget):
        row = self.rows[min(m, len(self.rows) - 1)]
        return row[min(k, len(row) - 1)]

    def section(self, k):
        return Table(tuple(r[min(k, len(r) - 1)] for r in self.rows))

    def spec(self):
        return "table2:" + "|".join(",".join(map(str, r)) for r in self.rows)


# ---------------------------------------------------------------------------
# spec-string grammar


def _split_top(s: str, sep: str = ";"):
    depth, parts, cur = 0, [], []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _strip(s: str) -> str:
    s = s.strip()
    while s.startswith("(") and s.endswith(")") and _balanced(s[1:-1]):
        s = s[1:-1].strip()
    return s


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


def _nat(tok: str) -> int:
    v = int(tok.strip())
    if v < 0:
        raise ValueError(f"expected a natural number, got {tok!r}")
    return v


def parse_natfun(text: str) -> NatFun:
    """Parse a witness / counterfunction spec string.

    Grammar: ``id``, ``const:c``, ``affine:a,b``, ``expe:s``, ``max:f;g``,
    ``comp:f;g`` (f after g), ``table:v0,v1,...``; also ``add:f;g``,
    ``mul:f;g`` and ``maj:f``.  Sub-expressions may be parenthesised.
    """
    s = _strip(text)
    head, _, rest = s.partition(":")
    head = head.strip().lower()
    try:
        if head == "id" and not rest:
            return Identity()
        if head == "const":
            return Const(_nat(rest))
        if head == "affine":
            a, b = rest.split(",")
            return Affine(_nat(a), _nat(b))
        if head == "expe":
            return CeilExpE(_nat(rest))
        if head in ("max", "comp", "add", "mul"):
            parts = _split_top(rest)
            if len(parts) != 2:
                raise ValueError(f"{head} takes two arguments")
            f, g = (parse_natfun(p) for p in parts)
            return {"max": Max, "comp": Compose, "add": Add, "mul": Mul}[head](f, g)
        if head == "maj":
            return MajorantOf(parse_natfun(rest))
        if head == "table":
            return Table(tuple(_nat(v) for v in rest.split(",")))
        if head == "tablet":
            vals, tail = _split_top(rest)
            return Table(tuple(_nat(v) for v in vals.split(",")), parse_natfun(tail))
        if head == "monus":
            f, c = _split_top(rest)
            return Monus(parse_natfun(f), _nat(c))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad function spec {text!r}: {exc}") from None
    raise ValueError(f"bad function spec {text!r}")


def parse_binatfun(text: str) -> BiNatFun:
    """``bilinear:c``, ``const2:c`` or ``table2:r0;r1|...`` (rows split by '|')."""
    s = text.strip()
    head, _, rest = s.partition(":")
    try:
        if head == "bilinear":
            return BilinearPlus(_nat(rest))
        if head == "const2":
            return Const2(_nat(rest))
        if head == "table2":
            return Table2(tuple(tuple(_nat(v) for v in r.split(",")) for r in rest.split("|")))
    except ValueError as exc:
        raise ValueError(f"bad two-argument spec {text!r}: {exc}") from None
    raise ValueError(f"bad two-argument spec {text!r}")


# ---------------------------------------------------------------------------
# majorants


def majorant(f: NatFun) -> NatFun:
    """The monotone majorant n -> max{f(m) : m <= n}."""
    if isinstance(f, Table) and f.tail is None:
        run, out = -1, []
        for v in f.values:
            run = max(run, v)
            out.append(run)
        return Table(tuple(out))
    if f.is_monotone():
        return f
    return MajorantOf(f)


def check_majorizes(f: NatFun, g: NatFun, horizon: int) -> bool:
    """True iff for all n <= horizon and m <= n: g(m) <= f(n) and f(m) <= f(n)."""
    fv = [f(n) for n in range(horizon + 1)]
    gv = [g(n) for n in range(horizon + 1)]
    fmax = gmax = -1
    for n in range(horizon + 1):
        fmax = max(fmax, fv[n])
        gmax = max(gmax, gv[n])
        if fmax > fv[n] or gmax > fv[n]:
            return False
    return True


# ---------------------------------------------------------------------------
# extended-natural application and iteration


def _as_xnat(x) -> XNat:
    return XNat.of(x)


def xnat_apply(f: NatFun, x, mode: str = "magnitude", budget: Optional[Budget] = None) -> XNat:
    """Apply ``f`` to an extended natural.

    Exact inputs stay exact while the result fits the bit budget; otherwise
    magnitude mode returns a sound :class:`Tower` bound and exact mode raises
    :class:`BudgetExceeded`.
    """
    budget = budget or Budget.default()
    x = _as_xnat(x)
    c = f.const_value()
    if c is not None:
        return Exact(c)
    if isinstance(x, Exact):
        try:
            return Exact(f.eval(x.value, budget))
        except BudgetExceeded:
            if mode == "exact":
                raise
    elif mode == "exact":
        raise BudgetExceeded("exact evaluation of a tower-sized argument")
    return X.xnat_from_mag(f._mag(x.to_mag()))


def iterate(f: NatFun, r, start=0, mode: str = "exact", budget: Optional[Budget] = None) -> XNat:
    """``f`` composed ``r`` times, applied to ``start``."""
    budget = budget or Budget.default()
    r = _as_xnat(r)
    x = _as_xnat(start)
    if isinstance(r, Exact) and r.value == 0:
        return x
    c = f.const_value()
    if c is not None:
        return Exact(c)
    if isinstance(f, Identity):
        return x
    if isinstance(r, Tower) and mode == "exact":
        raise BudgetExceeded("tower-sized composition count in exact mode")

    done = 0
    total = r.value if isinstance(r, Exact) else None
    if isinstance(f, Affine) and isinstance(x, Exact) and total is not None:
        try:
            return Exact(_affine_power(f.a, f.b, total, x.value, budget))
        except BudgetExceeded:
            if mode == "exact":
                raise
    elif isinstance(x, Exact):
        while total is None or done < total:
            if done >= budget.steps:
                if mode == "exact":
                    raise BudgetExceeded(f"more than {budget.steps} compositions", depth=done)
                break
            try:
                y = f.eval(x.value, budget)
            except BudgetExceeded as exc:
                if mode == "exact":
                    exc.depth = done
                    raise
                break
            done += 1
            if y == x.value:
                return x
            x = Exact(y)
        else:
            return x
    # magnitude phase
    rem = X.mag_from_int(total - done) if total is not None else r.to_mag()
    return X.xnat_from_mag(_mag_iterate(f, x.to_mag(), rem, budget))


def _affine_power(a: int, b: int, r: int, v: int, budget: Budget) -> int:
    if a == 0:
        return b
    if a == 1:
        budget.check_bits(r.bit_length() + b.bit_length() + 1)
        return v + r * b
    budget.check_bits(int(r * math.log2(a)) + v.bit_length() + b.bit_length() + 2)
    ar = a**r
    return ar * v + b * (ar - 1) // (a - 1)


def _mag_int(m: Mag) -> Optional[int]:
    if m.h == 0 and m.t <= 2**20:
        return int(m.t)
    return None


def _mag_iterate(f: NatFun, x: Mag, rem: Mag, budget: Budget) -> Mag:
    g = f.growth()
    small = _mag_int(rem)
    if g is None:
        if small is None or small > budget.steps:
            raise UnsupportedGrowth(f"cannot iterate {f.spec()} {rem} times without a growth class")
        for _ in range(small):
            x = f._mag(x)
        return x
    if g.kind == "exppoly":
        steps = 0
        while x.h < 3 and (small is None or steps < small):
            x = f._mag(x)
            steps += 1
        if small is not None and steps >= small:
            return x
        rem_left = X.mag_from_int(small - steps) if small is not None else rem
        kappa = math.log2(g.d + 1) * 2.0**-52
        drift = X.mag_mul(rem_left, Mag(0, X._up(kappa)))
        if drift.h != 0 or rem_left.h != 0:
            raise UnsupportedGrowth("composition count too large for an exponential map")
        return X.normalize(x.h + int(rem_left.t), X._up(x.t + drift.t))
    if g.kind == "affine":
        if g.a == 0:
            return X.mag_from_int(g.b)
        if g.a == 1:
            return X.mag_add(x, X.mag_mul(rem, X.mag_from_int(g.b)))
        apow = X.mag_exp2(X.mag_mul(X.mag_log2(X.mag_from_int(g.a)), rem))
        return X.mag_mul(apow, X.mag_add(x, X.mag_from_int(g.b)))
    # poly: V_{j+1} <= (C+1) V_j**d with V = v + 1
    if g.d == 0:
        return X.mag_from_int(g.C)
    v0 = X.mag_add(x, X.ONE)
    c = X.mag_log2(X.mag_from_int(g.C + 1))
    if g.d == 1:
        return X.mag_mul(X.mag_exp2(X.mag_mul(c, rem)), v0)
    c_shift = Mag(0, X._up(c.t / (g.d - 1)))
    l0 = X.mag_log2(v0)
    loglog = X.mag_log2(X.mag_add(l0, c_shift))
    top = X.mag_add(loglog, X.mag_mul(rem, Mag(0, X._up(math.log2(g.d)))))
    return X.mag_exp2(X.mag_exp2(top))


# ---------------------------------------------------------------------------
# witness bundles, validation and canonical witnesses


@dataclass(frozen=True)
class RateWitnessBundle:
    a: Optional[NatFun] = None
    A: Optional[NatFun] = None
    Aprime: Optional[BiNatFun] = None
    b: Optional[NatFun] = None
    B: Optional[NatFun] = None
    E: Optional[NatFun] = None

    def replace(self, **kw) -> "RateWitnessBundle":
        d = {k: getattr(self, k) for k in ("a", "A", "Aprime", "b", "B", "E")}
        d.update(kw)
        return RateWitnessBundle(**d)

    def specs(self) -> dict:
        return {k: getattr(self, k).spec() for k in ("a", "A", "Aprime", "b", "B", "E")
                if getattr(self, k) is not None}


@dataclass
class ValidationReport:
    kind: str
    valid: bool
    counterexample: Optional[tuple] = None
    checked: int = 0
    unchecked: list = field(default_factory=list)
    detail: str = ""

    def raise_if_invalid(self) -> "ValidationReport":
        if not self.valid:
            raise WitnessInvalid(
                f"witness {self.kind} fails at {self.counterexample}: {self.detail}",
                self.counterexample,
            )
        return self


_REL = 1e-12
_SUM_CAP = 2 * 10**9


def _first_index_reaching(alpha, targets, cap):
    """For each target t, the first n with sum_{i<=n} alpha_i >= t (or None)."""
    out = {}
    pending = sorted(t for t in targets if t > 0)
    for t in targets:
        if t <= 0:
            out[t] = 0
    acc, start, chunk = 0.0, 0, 1 << 22
    while pending and start < cap:
        n = min(chunk, cap - start)
        a = alpha.alphas(start + n)[start:] if not isinstance(alpha.alpha, HarmonicOffset) else \
            1.0 / (np.arange(start, start + n, dtype=float) + alpha.alpha.c + 1)
        cs = acc + np.cumsum(a)
        while pending and cs[-1] >= pending[0] * (1 - _REL):
            t = pending.pop(0)
            out[t] = start + int(np.searchsorted(cs, t * (1 - _REL)))
        acc = float(cs[-1])
        start += n
    return out


def validate_witness(kind: str, w, seq: SequenceSpec, horizon: int = 10**5, kmax: int = 20) -> ValidationReport:
    """Brute-force check of a rate witness against its defining condition.

    ``kind`` is one of ``a`` (rate alpha_n -> 0), ``A`` (divergence of the
    alpha-sum), ``A'`` (vanishing tail products), ``b`` (pointwise upper bound
    on beta_n), ``B`` (divergence of beta_n), ``E`` (Cauchy rate of the error
    norms).
    """
    rep = ValidationReport(kind=kind, valid=True)
    if kind != "A'" and not w.is_monotone():
        return _fail(rep, None, "witness is not monotone")
    if kind == "a":
        al = seq.alphas(horizon + 1)
        sufmax = np.maximum.accumulate(al[::-1])[::-1]
        for k in range(kmax + 1):
            ak = w(k)
            if ak > horizon:
                rep.unchecked.append(k)
                continue
            rep.checked += 1
            if sufmax[ak] > (1.0 / (k + 1)) * (1 + _REL):
                n = ak + int(np.argmax(al[ak:] > (1.0 / (k + 1)) * (1 + _REL)))
                return _fail(rep, (k, n), f"alpha_{n}={al[n]!r} > 1/{k + 1}")
    elif kind == "A" and isinstance(seq.alpha, HarmonicOffset):
        # partial sums of 1/(i+c+1) are digamma differences; no float accumulation
        c = seq.alpha.c
        with mpmath.workdps(40):
            for k in range(kmax + 1):
                Ak = w(k)
                rep.checked += 1
                total = mpmath.digamma(Ak + c + 2) - mpmath.digamma(c + 1)
                if total < k:
                    return _fail(rep, (k, Ak), f"partial alpha-sum up to {Ak} is {float(total)!r} < {k}")
    elif kind == "A":
        need = _first_index_reaching(seq, list(range(kmax + 1)), min(_SUM_CAP, _table_len(seq.alpha)))
        for k in range(kmax + 1):
            Ak = w(k)
            if k not in need:
                rep.unchecked.append(k)
                continue
            rep.checked += 1
            if Ak < need[k]:
                return _fail(rep, (k, Ak), f"partial alpha-sum up to {Ak} stays below {k}")
    elif kind == "A'":
        mmax = kmax
        top = max(w(mmax, kmax), w(0, 0)) + 1
        if top > 10**8:
            raise WitnessInvalid("A' values too large for brute-force validation", (mmax, kmax))
        logs = np.concatenate([[0.0], np.cumsum(np.log1p(-seq.alphas(top + 1)))])
        for m in range(mmax + 1):
            for k in range(kmax + 1):
                v = w(m, k)
                if (m > 0 and w(m - 1, k) > v) or (k > 0 and w(m, k - 1) > v):
                    return _fail(rep, (m, k), "A' is not monotone in both arguments")
                rep.checked += 1
                if v < m:
                    prod_log = 0.0
                else:
                    prod_log = logs[v + 1] - logs[m]
                if prod_log > -math.log(k + 1) + 1e-12:
                    return _fail(rep, (m, k), f"tail product up to {v} is {math.exp(prod_log)!r} > 1/{k + 1}")
    elif kind == "b":
        be = seq.betas(horizon + 1)
        for n in range(horizon + 1):
            if be[n] > w(n) * (1 + _REL):
                return _fail(rep, (None, n), f"beta_{n}={be[n]!r} > b({n})")
        rep.checked = horizon + 1
    elif kind == "B":
        be = seq.betas(horizon + 1)
        sufmin = np.minimum.accumulate(be[::-1])[::-1]
        for k in range(kmax + 1):
            Bk = w(k)
            if Bk > horizon:
                rep.unchecked.append(k)
                continue
            rep.checked += 1
            if sufmin[Bk] < k * (1 - _REL):
                n = Bk + int(np.argmax(be[Bk:] < k * (1 - _REL)))
                return _fail(rep, (k, n), f"beta_{n}={be[n]!r} < {k}")
    elif kind == "E":
        for k in range(kmax + 1):
            Ek = w(k)
            norms = seq.error_norms(Ek + horizon + 1)
            tail = np.cumsum(norms[Ek + 1:])
            rep.checked += 1
            if tail.size and tail[-1] > (1.0 / (k + 1)) * (1 + _REL):
                n = int(np.argmax(tail > (1.0 / (k + 1)) * (1 + _REL))) + 1
                return _fail(rep, (k, n), f"error tail sum {tail[n - 1]!r} > 1/{k + 1}")
    else:
        raise ValueError(f"unknown witness kind {kind!r}")
    return rep


def _table_len(spec) -> int:
    return len(spec.values) if hasattr(spec, "values") else _SUM_CAP


def _fail(rep, where, detail):
    rep.valid = False
    rep.counterexample = where
    rep.detail = detail
    return rep


def geometric_cauchy_rate(c: float, rho: float, k: int) -> int:
    """Least E with c*rho**(E+1)/(1-rho) <= 1/(k+1), in exact rational arithmetic."""
    c, rho = Fraction(c), Fraction(rho)
    lhs = c * rho / (1 - rho) * (k + 1)
    e = 0
    while lhs > 1:
        lhs *= rho
        e += 1
    return e


def canonical_witnesses(seq: SequenceSpec, kmax: int = 20, validate: bool = True,
                        horizon: int = 10**5) -> RateWitnessBundle:
    """Closed-form rate witnesses for the parametric sequence families."""
    if not isinstance(seq.alpha, HarmonicOffset) or not isinstance(seq.beta, LinearGrowth):
        raise WitnessInvalid("canonical witnesses need parametric alpha and beta")
    c = seq.alpha.c
    bundle = RateWitnessBundle(
        a=Identity(),
        A=CeilExpE(c),
        Aprime=BilinearPlus(c),
        b=affine(math.ceil(seq.beta.slope), math.ceil(seq.beta.offset)),
        B=affine(math.ceil(1.0 / seq.beta.slope), 0),
        E=_canonical_E(seq.errors, kmax),
    )
    if validate:
        for kind, w in (("a", bundle.a), ("A", bundle.A), ("b", bundle.b), ("B", bundle.B), ("E", bundle.E),
                        ("A'", bundle.Aprime)):
            validate_witness(kind, w, seq, horizon=horizon, kmax=kmax).raise_if_invalid()
    return bundle


def _canonical_E(errors, kmax: int) -> NatFun:
    if isinstance(errors, ZeroErrors) or (isinstance(errors, Geometric) and errors.c == 0):
        return Const(0)
    if isinstance(errors, Geometric):
        vals = tuple(geometric_cauchy_rate(errors.c, errors.rho, k) for k in range(kmax + 1))
        L = math.log(1.0 / errors.rho)
        slope = math.ceil(1.0 / L)
        icpt = math.ceil(max(0.0, math.log(errors.c / (1 - errors.rho))) / L) + 1
        tail = Max(Const(vals[-1]), affine(slope, icpt))
        return Table(vals, tail)
    raise WitnessInvalid("canonical E needs zero or geometric errors")
