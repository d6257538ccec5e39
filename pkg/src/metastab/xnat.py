"""Extended naturals: exact big integers or sound tower-of-exponentials bounds.

``Tower(h, t)`` stands for the real number ``exp2^(h)(t)`` (``exp2`` applied
``h`` times to ``t``) and is always read as an *upper bound*.  All magnitude
arithmetic rounds upward so that a bound never undershoots the value it
describes.

Internally magnitudes are carried as :class:`Mag` (height may be 0, meaning a
plain float).  Normalised ``Mag`` values satisfy ``t < 2**53`` and, for
``h >= 1``, ``t >= 53``; under that normalisation the lexicographic order on
``(h, t)`` is the numeric order.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import mpmath

from .errors import BudgetExceeded

TWO53 = float(2**53)
FLOOR = 53.0
LOG2E_UP = math.nextafter(math.nextafter(math.log2(math.e), math.inf), math.inf)
_INF = math.inf

DEFAULT_BUDGET_BITS = 10**6
DEFAULT_STEP_BUDGET = 10**5


def _up(x: float) -> float:
    # two ulps: covers correctly-rounded arithmetic plus libm log2/exp2 error
    return math.nextafter(math.nextafter(x, _INF), _INF)


@dataclass(frozen=True)
class Budget:
    bits: int = DEFAULT_BUDGET_BITS
    steps: int = DEFAULT_STEP_BUDGET

    @classmethod
    def default(cls) -> "Budget":
        env = os.environ.get("METASTAB_BUDGET_BITS")
        return cls(bits=int(env)) if env else cls()

    def check_bits(self, bits: int, what: str = "value") -> None:
        if bits > self.bits:
            raise BudgetExceeded(
                f"{what} needs ~{bits} bits, budget is {self.bits}", bits=bits
            )


# ---------------------------------------------------------------------------
# internal magnitudes


@dataclass(frozen=True)
class Mag:
    h: int
    t: float

    def __post_init__(self):
        if not (self.t >= 0.0) or self.t == _INF:
            raise ValueError(f"bad magnitude top {self.t!r}")

    @property
    def is_zero(self) -> bool:
        return self.h == 0 and self.t == 0.0

    def key(self):
        return (self.h, self.t)


ZERO = Mag(0, 0.0)
ONE = Mag(0, 1.0)


def normalize(h: int, t: float) -> Mag:
    if t != t or t < 0:
        raise ValueError(f"bad magnitude top {t!r}")
    if t == _INF:
        raise OverflowError("magnitude top overflowed before normalisation")
    while h >= 1 and t < FLOOR:
        t = _up(2.0**t)
        h -= 1
    while t >= TWO53:
        t = _up(math.log2(t))
        h += 1
    return Mag(h, t)


def mag_from_int(v: int) -> Mag:
    if v < 0:
        raise ValueError("negative natural")
    if v < 2**53:
        return Mag(0, float(v))
    bl = v.bit_length()
    shift = max(0, bl - 60)
    head = (v >> shift) + 1
    return normalize(1, _up(math.log2(head) + shift))


def mag_le(a: Mag, b: Mag) -> bool:
    return a.key() <= b.key()


def mag_max(a: Mag, b: Mag) -> Mag:
    return a if mag_le(b, a) else b


def mag_log2(x: Mag) -> Mag:
    """Upper bound on log2(max(x, 1))."""
    if x.h == 0:
        if x.t <= 1.0:
            return ZERO
        return Mag(0, _up(math.log2(x.t)))
    return normalize(x.h - 1, x.t)


def mag_exp2(x: Mag) -> Mag:
    return normalize(x.h + 1, x.t)


def mag_add(a: Mag, b: Mag) -> Mag:
    if mag_le(a, b):
        a, b = b, a
    if b.is_zero:
        return a
    if a.h == 0:
        s = a.t + b.t
        return normalize(0, _up(s)) if s < TWO53 else normalize(1, _up(math.log2(s) + 1e-15))
    if a.h >= 2 and b.h <= 1 and (b.h == 0 or b.t <= 1000.0):
        # a >= 2**(2**53); adding anything below 2**1000 moves every level of
        # the tower by far less than one ulp of the top
        return Mag(a.h, _up(a.t))
    la, lb = mag_log2(a), mag_log2(b)
    if la.h == 0:
        d = lb.t - la.t
        inc = math.log1p(2.0**d) / math.log(2.0) if d > -1074 else 0.0
        return normalize(1, _up(la.t + _up(inc) + 5e-324))
    # b <= a, so log2(a + b) <= log2(a) + 1
    return mag_exp2(mag_add(la, ONE))


def mag_mul(a: Mag, b: Mag) -> Mag:
    if a.is_zero or b.is_zero:
        return ZERO
    if a.h == 0 and b.h == 0:
        p = a.t * b.t
        if p < TWO53:
            return normalize(0, _up(p))
    return mag_exp2(mag_add(mag_log2(a), mag_log2(b)))


def mag_pow(a: Mag, d: int) -> Mag:
    if d == 0:
        return ONE
    if d == 1:
        return a
    if a.is_zero:
        return ZERO
    if a.h == 0:
        try:
            p = a.t**d
        except OverflowError:
            p = _INF
        if p < TWO53:
            return normalize(0, _up(p))
    return mag_exp2(mag_mul(mag_log2(a), mag_from_int(d)))


def mag_exp_e(a: Mag) -> Mag:
    """Upper bound on e**a."""
    return mag_exp2(mag_mul(a, Mag(0, LOG2E_UP)))


def mag_monus(a: Mag, c: int) -> Mag:
    if a.h == 0:
        return Mag(0, max(0.0, _up(a.t - c)))
    return a


# ---------------------------------------------------------------------------
# public extended naturals


class XNat:
    """Either :class:`Exact` or :class:`Tower`."""

    @staticmethod
    def of(v) -> "XNat":
        if isinstance(v, XNat):
            return v
        if isinstance(v, bool) or not isinstance(v, int):
            raise TypeError(f"expected int, got {type(v).__name__}")
        return Exact(v)

    def __le__(self, other):
        return xnat_le(self, XNat.of(other))

    def __ge__(self, other):
        return xnat_le(XNat.of(other), self)

    def __lt__(self, other):
        return not xnat_le(XNat.of(other), self)

    def __gt__(self, other):
        return not xnat_le(self, XNat.of(other))


@dataclass(frozen=True, eq=True)
class Exact(XNat):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("XNat values are nonnegative")

    @property
    def is_exact(self) -> bool:
        return True

    def to_mag(self) -> Mag:
        return mag_from_int(self.value)

    def to_json(self) -> dict:
        return {"exact": str(self.value)}

    def __repr__(self):
        s = str(self.value) if self.value.bit_length() < 200 else f"<{self.value.bit_length()} bits>"
        return f"Exact({s})"


@dataclass(frozen=True, eq=True)
class Tower(XNat):
    height: int
    top: float

    def __post_init__(self):
        if self.height < 1:
            raise ValueError("Tower height must be >= 1")
        if not (0.0 <= self.top < TWO53):
            raise ValueError(f"Tower top {self.top!r} outside [0, 2**53)")
        if self.height >= 2 and self.top < FLOOR:
            raise ValueError("Tower not normalised: use Tower.make")

    @classmethod
    def make(cls, height: int, top: float) -> "Tower":
        if height < 1:
            raise ValueError("Tower height must be >= 1")
        while height >= 2 and top < FLOOR:
            top = _up(2.0**top)
            height -= 1
        while top >= TWO53:
            top = _up(math.log2(top))
            height += 1
        return cls(height, top)

    @classmethod
    def from_mag(cls, m: Mag) -> "Tower":
        if m.h == 0:
            return cls(1, 0.0 if m.t <= 1.0 else _up(math.log2(m.t)))
        return cls(m.h, m.t)

    @property
    def is_exact(self) -> bool:
        return False

    def to_mag(self) -> Mag:
        if self.height == 1 and self.top < FLOOR:
            return Mag(0, _up(2.0**self.top))
        return Mag(self.height, self.top)

    def top_at_height(self, h: int) -> float:
        """Re-express the bound as exp2^(h)(t') and return t' (rounded up).

        May return ``inf`` when ``h`` is lower than the tower can be flattened
        to in a double.
        """
        t, cur = self.top, self.height
        while cur > h:
            try:
                t = _up(2.0**t)
            except OverflowError:
                return _INF
            cur -= 1
        while cur < h:
            t = _up(math.log2(t)) if t > 1.0 else 0.0
            cur += 1
        return t

    def to_json(self) -> dict:
        return {"tower": {"height": self.height, "top": self.top}}


def xnat_from_mag(m: Mag) -> XNat:
    return Tower.from_mag(m)


def xnat_le(a: XNat, b: XNat) -> bool:
    if isinstance(a, Exact) and isinstance(b, Exact):
        return a.value <= b.value
    if isinstance(a, Tower) and isinstance(b, Tower):
        return (a.height, a.top) <= (b.height, b.top)
    if isinstance(a, Exact):
        return _exact_le_tower(a.value, b)
    return not _exact_le_tower(b.value, a) or _tower_equals_int(a, b.value)


def _tower_equals_int(t: Tower, v: int) -> bool:
    if t.height != 1 or v <= 0:
        return False
    return float(t.top).is_integer() and v == 1 << int(t.top)


def _exact_le_tower(v: int, tw: Tower) -> bool:
    if v <= 1:
        return True
    bl = v.bit_length()
    if tw.height >= 3:
        return True  # tower >= 2**(2**53)
    if tw.height == 2:
        # log2 v < bl <= 2**top ?
        return tw.top >= FLOOR or bl <= 2.0**tw.top
    t = tw.top
    if t >= bl:
        return True
    if t < bl - 1:
        return False
    if float(t).is_integer():
        return v <= 1 << int(t)
    with mpmath.workprec(bl + 96):
        return mpmath.mpf(v) <= mpmath.power(2, mpmath.mpf(t))


def xnat_max(a: XNat, b: XNat) -> XNat:
    return b if xnat_le(a, b) else a


def xnat_json(x: XNat) -> dict:
    return x.to_json()
