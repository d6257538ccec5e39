"""Parameter and error sequences driving the Halpern proximal iteration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import HorizonExhausted, InvalidScenario


@dataclass(frozen=True)
class HarmonicOffset:
    """alpha_n = 1 / (n + c + 1) with c >= 1."""

    c: int = 1

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise InvalidScenario(f"harmonic offset c must be a natural >= 1, got {self.c}")

    def value(self, n: int) -> float:
        return 1.0 / (n + self.c + 1)

    def array(self, length: int) -> np.ndarray:
        return 1.0 / (np.arange(length, dtype=float) + self.c + 1)

    def to_dict(self) -> dict:
        return {"kind": "harmonic_offset", "c": self.c}


@dataclass(frozen=True)
class LinearGrowth:
    """beta_n = slope * n + offset."""

    slope: float = 1.0
    offset: float = 1.0

    def __post_init__(self):
        if not (self.slope > 0 and self.offset > 0):
            raise InvalidScenario("beta slope and offset must be positive")

    def value(self, n: int) -> float:
        return self.slope * n + self.offset

    def array(self, length: int) -> np.ndarray:
        return self.slope * np.arange(length, dtype=float) + self.offset

    def to_dict(self) -> dict:
        return {"kind": "linear", "slope": self.slope, "offset": self.offset}


@dataclass(frozen=True)
class Table:
    """Explicit finite table; indexing past its end is an error."""

    values: tuple

    def value(self, n: int):
        if n >= len(self.values):
            raise HorizonExhausted(f"table of length {len(self.values)} has no entry {n}")
        return self.values[n]

    def array(self, length: int) -> np.ndarray:
        if length > len(self.values):
            raise HorizonExhausted(f"table of length {len(self.values)} shorter than {length}")
        return np.asarray(self.values[:length], dtype=float)

    def to_dict(self) -> dict:
        return {"kind": "table", "values": [v if np.isscalar(v) else list(v) for v in self.values]}


@dataclass(frozen=True)
class ZeroErrors:
    def norm_array(self, length: int) -> np.ndarray:
        return np.zeros(length)

    def vector(self, n: int, dim: int) -> np.ndarray:
        return np.zeros(dim)

    def to_dict(self) -> dict:
        return {"kind": "zero"}


@dataclass(frozen=True)
class Geometric:
    """e_n = c * rho**n * direction, direction a unit vector."""

    c: float
    rho: float
    direction: tuple

    def __post_init__(self):
        if self.c < 0 or not (0 < self.rho < 1):
            raise InvalidScenario("geometric errors need c >= 0 and 0 < rho < 1")
        nrm = float(np.linalg.norm(self.direction))
        if abs(nrm - 1.0) > 1e-12:
            raise InvalidScenario(f"error direction must be a unit vector (norm {nrm})")

    def norm_array(self, length: int) -> np.ndarray:
        return self.c * self.rho ** np.arange(length, dtype=float)

    def vector(self, n: int, dim: int) -> np.ndarray:
        if len(self.direction) != dim:
            raise InvalidScenario("error direction dimension differs from x0")
        return self.c * self.rho**n * np.asarray(self.direction, dtype=float)

    def to_dict(self) -> dict:
        return {"kind": "geometric", "c": self.c, "rho": self.rho, "direction": list(self.direction)}


@dataclass(frozen=True)
class ErrorTable:
    points: tuple

    def norm_array(self, length: int) -> np.ndarray:
        if length > len(self.points):
            raise HorizonExhausted(f"error table of length {len(self.points)} shorter than {length}")
        return np.array([float(np.linalg.norm(p)) for p in self.points[:length]])

    def vector(self, n: int, dim: int) -> np.ndarray:
        if n >= len(self.points):
            raise HorizonExhausted(f"error table has no entry {n}")
        return np.asarray(self.points[n], dtype=float)

    def to_dict(self) -> dict:
        return {"kind": "table", "points": [list(p) for p in self.points]}


AlphaSpec = Union[HarmonicOffset, Table]
BetaSpec = Union[LinearGrowth, Table]
ErrorSpec = Union[ZeroErrors, Geometric, ErrorTable]


@dataclass(frozen=True)
class SequenceSpec:
    alpha: AlphaSpec = field(default_factory=HarmonicOffset)
    beta: BetaSpec = field(default_factory=LinearGrowth)
    errors: ErrorSpec = field(default_factory=ZeroErrors)

    def validate(self, horizon: Optional[int] = None) -> None:
        """Check alpha_n in ]0,1[ and beta_n > 0 (table variants over the horizon)."""
        for name, spec in (("alpha", self.alpha), ("beta", self.beta)):
            if isinstance(spec, Table):
                n = len(spec.values) if horizon is None else min(horizon, len(spec.values))
                arr = spec.array(n)
                if not np.all(np.isfinite(arr)):
                    raise InvalidScenario(f"{name} table has non-finite entries")
                if name == "alpha" and np.any((arr <= 0) | (arr >= 1)):
                    raise InvalidScenario("alpha_n must lie in ]0,1[")
                if name == "beta" and np.any(arr <= 0):
                    raise InvalidScenario("beta_n must be positive")
        if isinstance(self.errors, ErrorTable):
            for p in self.errors.points:
                if not np.all(np.isfinite(p)):
                    raise InvalidScenario("error table has non-finite entries")

    @property
    def parametric(self) -> bool:
        return not isinstance(self.alpha, Table) and not isinstance(self.beta, Table)

    def alphas(self, length: int) -> np.ndarray:
        return self.alpha.array(length)

    def betas(self, length: int) -> np.ndarray:
        return self.beta.array(length)

    def error_norms(self, length: int) -> np.ndarray:
        return self.errors.norm_array(length)
