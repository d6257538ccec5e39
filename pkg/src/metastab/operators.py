"""Catalog of maximal monotone operators on R^d with closed-form resolvents.

Every operator exposes its resolvent ``J_beta = (I + beta A)^{-1}``, the exact
metric projection onto its zero set ``S`` and a membership test for ``S``.
All methods are pure functions of their arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidScenario, NonFiniteNumeric

EQ_TOL = 1e-12
INEQ_TOL = 1e-9
MAX_DIM = 64


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce to a finite float vector, optionally checking its dimension."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise DimensionMismatch(f"points must be 1-d, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NonFiniteNumeric(f"non-finite coordinates in {p!r}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.shape[0]}")
    return p


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta):
        raise NonFiniteNumeric(f"non-finite step {beta!r}")
    if beta <= 0:
        raise ValueError(f"step must be positive, got {beta}")
    return beta


def _finite(y: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(y)):
        raise NonFiniteNumeric("operator evaluation produced non-finite values")
    return y


class Operator:
    """Base class; subclasses implement the ``_resolvent`` / ``_project`` hooks."""

    kind = "abstract"
    single_valued = False

    @property
    def dim(self) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def resolvent(self, beta: float, x) -> np.ndarray:
        beta = _check_beta(beta)
        return _finite(self._resolvent(beta, as_point(x, self.dim)))

    def project_zero_set(self, x) -> np.ndarray:
        return _finite(self._project(as_point(x, self.dim)))

    def in_zero_set(self, x, tol: float = EQ_TOL) -> bool:
        x = as_point(x, self.dim)
        return float(np.linalg.norm(x - self._project(x))) <= tol * (1.0 + float(np.linalg.norm(x)))

    @property
    def designated_zero(self) -> np.ndarray:
        return self.project_zero_set(np.zeros(self.dim))

    def sample_zero_set(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` random points of S (rows)."""
        raise NotImplementedError  # pragma: no cover

    def apply(self, x) -> np.ndarray:
        raise TypeError(f"{self.kind} is set-valued; use inclusion_residual")

    def inclusion_residual(self, beta: float, x) -> float:
        """Distance-type defect of ``x - J in beta*A(J)`` for ``J = J_beta(x)``."""
        raise NotImplementedError  # pragma: no cover

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class LinearPSD(Operator):
    """A(x) = M x for a symmetric positive semidefinite matrix M."""

    matrix: np.ndarray

    kind = "linear_psd"
    single_valued = True

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidScenario(f"matrix must be square, got shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise InvalidScenario(f"dimension {m.shape[0]} exceeds {MAX_DIM}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteNumeric("matrix has non-finite entries")
        scale = max(1.0, float(np.abs(m).max()))
        if not np.allclose(m, m.T, atol=EQ_TOL * scale, rtol=0):
            raise InvalidScenario("matrix must be symmetric")
        m = 0.5 * (m + m.T)
        w, v = np.linalg.eigh(m)
        if w.min() < -1e-10 * scale:
            raise InvalidScenario(f"matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
        kernel = v[:, np.abs(w) <= 1e-10 * scale]
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_kernel", kernel)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def _resolvent(self, beta, x):
        return np.linalg.solve(np.eye(self.dim) + beta * self.matrix, x)

    def _project(self, x):
        k = self._kernel
        return k @ (k.T @ x) if k.size else np.zeros_like(x)

    def sample_zero_set(self, rng, count):
        k = self._kernel
        if not k.size:
            return np.zeros((count, self.dim))
        return rng.normal(scale=5.0, size=(count, k.shape[1])) @ k.T

    def apply(self, x):
        return self.matrix @ as_point(x, self.dim)

    def inclusion_residual(self, beta, x):
        x = as_point(x, self.dim)
        j = self.resolvent(beta, x)
        return float(np.linalg.norm(x - j - beta * self.matrix @ j))

    def to_dict(self):
        return {"kind": self.kind, "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class IndicatorBox(Operator):
    """Subdifferential of the indicator of the box [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray

    kind = "indicator_box"

    def __post_init__(self):
        lo, hi = as_point(self.lo), as_point(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds differ in dimension")
        if np.any(lo > hi):
            raise InvalidScenario("box needs lo <= hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def _resolvent(self, beta, x):
        return np.clip(x, self.lo, self.hi)

    def _project(self, x):
        return np.clip(x, self.lo, self.hi)

    def sample_zero_set(self, rng, count):
        u = rng.random((count, self.dim))
        pts = self.lo + u * (self.hi - self.lo)
        # include vertices and edges occasionally
        snap = rng.random((count, self.dim))
        pts = np.where(snap < 0.1, self.lo, np.where(snap > 0.9, self.hi, pts))
        return pts

    def inclusion_residual(self, beta, x):
        x = as_point(x, self.dim)
        j = self.resolvent(beta, x)
        d = x - j
        # normal cone: d_i = 0 inside, <= 0 at lo, >= 0 at hi
        at_lo = j <= self.lo
        at_hi = j >= self.hi
        bad = np.where(at_lo & at_hi, 0.0,
                       np.where(at_lo, np.maximum(d, 0.0),
                                np.where(at_hi, np.maximum(-d, 0.0), np.abs(d))))
        return float(np.linalg.norm(bad))

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class IndicatorBall(Operator):
    """Subdifferential of the indicator of the closed ball B(center, radius)."""

    center: np.ndarray
    radius: float

    kind = "indicator_ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise InvalidScenario("ball radius must be positive and finite")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def _project(self, x):
        d = x - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return x.copy()
        return self.center + (self.radius / n) * d

    def _resolvent(self, beta, x):
        return self._project(x)

    def sample_zero_set(self, rng, count):
        g = rng.normal(size=(count, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random((count, 1)) ** (1.0 / self.dim)
        r[rng.random(count) < 0.2] = self.radius
        return self.center + r * g

    def inclusion_residual(self, beta, x):
        x = as_point(x, self.dim)
        j = self.resolvent(beta, x)
        d = x - j
        off = j - self.center
        n = float(np.linalg.norm(off))
        if n < self.radius * (1 - 1e-12):
            return float(np.linalg.norm(d))
        # on the sphere the normal cone is the ray spanned by ``off``
        lam = float(d @ off) / (n * n)
        return float(np.linalg.norm(d - max(lam, 0.0) * off))

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class L1Scale(Operator):
    """A = lam * subdifferential of the l1 norm; the resolvent soft-thresholds."""

    lam: float
    dimension: int = 1

    kind = "l1_scale"

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidScenario("l1 scale must be positive and finite")
        if not 1 <= self.dimension <= MAX_DIM:
            raise InvalidScenario(f"dimension must be in [1, {MAX_DIM}]")

    @property
    def dim(self):
        return self.dimension

    def _resolvent(self, beta, x):
        t = beta * self.lam
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def _project(self, x):
        return np.zeros_like(x)

    def sample_zero_set(self, rng, count):
        return np.zeros((count, self.dim))

    def inclusion_residual(self, beta, x):
        x = as_point(x, self.dim)
        j = self.resolvent(beta, x)
        t = beta * self.lam
        d = x - j
        bad = np.where(j != 0, d - t * np.sign(j), np.maximum(np.abs(d) - t, 0.0))
        return float(np.linalg.norm(bad))

    def to_dict(self):
        return {"kind": self.kind, "lam": self.lam, "dim": self.dimension}


@dataclass(frozen=True, eq=False)
class Skew2D(Operator):
    """The rotation A(x, y) = (-y, x): monotone, with S = {0}."""

    kind = "skew2d"
    single_valued = True

    @property
    def dim(self):
        return 2

    def _resolvent(self, beta, x):
        a, b = x
        s = 1.0 + beta * beta
        return np.array([(a + beta * b) / s, (b - beta * a) / s])

    def _project(self, x):
        return np.zeros(2)

    def sample_zero_set(self, rng, count):
        return np.zeros((count, 2))

    def apply(self, x):
        a, b = as_point(x, 2)
        return np.array([-b, a])

    def inclusion_residual(self, beta, x):
        x = as_point(x, 2)
        j = self.resolvent(beta, x)
        return float(np.linalg.norm(x - j - beta * self.apply(j)))

    def to_dict(self):
        return {"kind": self.kind}


CATALOG = ("linear_psd", "indicator_box", "indicator_ball", "l1_scale", "skew2d")

_FIELDS = {
    "linear_psd": {"matrix"},
    "indicator_box": {"lo", "hi"},
    "indicator_ball": {"center", "radius"},
    "l1_scale": {"lam", "dim"},
    "skew2d": set(),
}


def from_dict(d: dict) -> Operator:
    """Build an operator from its tagged-object form, rejecting unknown keys."""
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidScenario("operator must be an object with a 'kind'")
    kind = d["kind"]
    if kind not in _FIELDS:
        raise InvalidScenario(f"unknown operator kind {kind!r}")
    extra = set(d) - _FIELDS[kind] - {"kind"}
    if extra:
        raise InvalidScenario(f"unknown keys for {kind}: {sorted(extra)}")
    try:
        if kind == "linear_psd":
            return LinearPSD(np.asarray(d["matrix"], dtype=float))
        if kind == "indicator_box":
            return IndicatorBox(d["lo"], d["hi"])
        if kind == "indicator_ball":
            return IndicatorBall(d["center"], float(d["radius"]))
        if kind == "l1_scale":
            return L1Scale(float(d["lam"]), int(d.get("dim", 1)))
        return Skew2D()
    except KeyError as exc:
        raise InvalidScenario(f"{kind} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidScenario):
            raise
        raise InvalidScenario(f"bad {kind} parameters: {exc}") from None


def random_operator(kind: str, rng: np.random.Generator, dim: int = 3) -> Operator:
    """A random catalog instance, used by the verification suites."""
    if kind == "linear_psd":
        b = rng.normal(size=(dim, dim))
        b[:, : max(1, dim // 3)] = 0.0  # nontrivial kernel
        return LinearPSD(b @ b.T)
    if kind == "indicator_box":
        lo = rng.uniform(-2, 1, dim)
        return IndicatorBox(lo, lo + rng.uniform(0, 2, dim))
    if kind == "indicator_ball":
        return IndicatorBall(rng.uniform(-1, 1, dim), float(rng.uniform(0.2, 2)))
    if kind == "l1_scale":
        return L1Scale(float(rng.uniform(0.1, 3)), dim)
    if kind == "skew2d":
        return Skew2D()
    raise ValueError(f"unknown operator kind {kind!r}")


# ---------------------------------------------------------------------------
# functional interface


def resolvent(op: Operator, beta: float, x) -> np.ndarray:
    """J_beta(x) = (I + beta A)^{-1} x."""
    return op.resolvent(beta, x)


def project_zero_set(op: Operator, x) -> np.ndarray:
    """Metric projection of ``x`` onto the zero set of ``op``."""
    return op.project_zero_set(x)


def residual(op: Operator, gamma: float, x) -> float:
    """||J_gamma(x) - x||."""
    x = as_point(x, op.dim)
    return float(np.linalg.norm(op.resolvent(gamma, x) - x))


def check_resolvent_identity(op: Operator, a: float, b: float, x) -> float:
    """||J_a(x) - J_b((b/a) x + (1 - b/a) J_a(x))||; zero in exact arithmetic."""
    a, b = _check_beta(a), _check_beta(b)
    x = as_point(x, op.dim)
    ja = op.resolvent(a, x)
    inner = (b / a) * x + (1.0 - b / a) * ja
    return float(np.linalg.norm(ja - op.resolvent(b, inner)))
