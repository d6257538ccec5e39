"""Check reports shared by the iteration and verification modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, float) and not np.isfinite(v):
        return repr(v)
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


@dataclass
class CheckReport:
    """Outcome of one check.

    ``counterexample`` is set on every failure; ``max_slack`` is the largest
    value of ``lhs - rhs`` seen (negative when every inequality is strict).
    """

    name: str
    passed: bool = True
    counterexample: Optional[Any] = None
    max_slack: float = -np.inf
    checked: int = 0
    vacuous: int = 0
    details: dict = field(default_factory=dict)

    def observe(self, slack: float, where=None, tol: float = 0.0) -> bool:
        """Record ``lhs - rhs``; a value above ``tol`` is a violation."""
        self.checked += 1
        slack = float(slack)
        if slack > self.max_slack:
            self.max_slack = slack
        if slack > tol:
            if self.passed:
                self.passed = False
                self.counterexample = where
            return False
        return True

    def fail(self, where, reason: str = "") -> "CheckReport":
        if self.passed:
            self.passed = False
            self.counterexample = where
            if reason:
                self.details["reason"] = reason
        return self

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.checked += other.checked
        self.vacuous += other.vacuous
        self.max_slack = max(self.max_slack, other.max_slack)
        if not other.passed:
            self.fail(other.counterexample, other.details.get("reason", ""))
        return self

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "counterexample": _plain(self.counterexample),
            "max_slack": _plain(self.max_slack),
            "checked": int(self.checked),
            "vacuous": int(self.vacuous),
            "details": _plain(self.details),
        }
