"""Halpern-type proximal point trajectories and the boundedness constants.

The iteration is

    x_{n+1} = alpha_n x_0 + (1 - alpha_n) (J_{beta_n}(x_n) + e_n).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import operators as ops
from .errors import HorizonExhausted, InvalidScenario, NonFiniteNumeric
from .rates import RateWitnessBundle, canonical_witnesses
from .reports import CheckReport
from .sequences import SequenceSpec
from .xnat import Budget

SLACK = 1e-9
HORIZON_CAP = 10**6


def ceil_nat(v: float, rtol: float = 1e-12) -> int:
    """Smallest natural >= v, forgiving float noise just above an integer."""
    if not math.isfinite(v):
        raise NonFiniteNumeric(f"cannot take the ceiling of {v!r}")
    return max(0, math.ceil(v - rtol * (1.0 + abs(v))))


@dataclass(frozen=True, eq=False)
class Scenario:
    operator: ops.Operator
    x0: np.ndarray
    seq: SequenceSpec = field(default_factory=SequenceSpec)
    witnesses: Optional[RateWitnessBundle] = None
    ell: int = 1
    D_seq: Optional[int] = None
    budget_bits: Optional[int] = None
    horizon: int = HORIZON_CAP

    def __post_init__(self):
        object.__setattr__(self, "x0", ops.as_point(self.x0, self.operator.dim))
        if int(self.ell) != self.ell or self.ell < 1:
            raise InvalidScenario("ell must be a natural number >= 1")
        if not 1 <= self.horizon <= HORIZON_CAP:
            raise InvalidScenario(f"horizon must lie in [1, {HORIZON_CAP}]")
        if self.D_seq is not None and self.D_seq < 1:
            raise InvalidScenario("D_seq must be >= 1")
        self.seq.validate()

    def bundle(self) -> RateWitnessBundle:
        """User witnesses, completed by canonical ones where possible."""
        if self.witnesses is not None and all(
            getattr(self.witnesses, k) is not None for k in ("a", "A", "Aprime", "b", "B", "E")
        ):
            return self.witnesses
        base = _canonical_or_empty(self.seq)
        if self.witnesses is None:
            return base
        fill = {k: getattr(base, k) for k in ("a", "A", "Aprime", "b", "B", "E")
                if getattr(self.witnesses, k) is None}
        return self.witnesses.replace(**fill)

    def budget(self) -> Budget:
        return Budget(bits=self.budget_bits) if self.budget_bits else Budget.default()


def _canonical_or_empty(seq: SequenceSpec) -> RateWitnessBundle:
    if seq.parametric:
        return canonical_witnesses(seq, validate=False)
    return RateWitnessBundle()


class Trajectory:
    """Immutable iterate sequence with cached resolvent images.

    ``points[n]`` is x_n for n <= H, ``jvals[n]`` is J_{beta_n}(x_n) for n < H.
    """

    def __init__(self, scenario, points, jvals, alphas, betas, errors):
        self.scenario = scenario
        self.points = points
        self.jvals = jvals
        self.alphas = alphas
        self.betas = betas
        self.errors = errors
        for a in (points, jvals, alphas, betas, errors):
            a.setflags(write=False)
        self._residuals = {}

    @property
    def horizon(self) -> int:
        return self.points.shape[0] - 1

    @property
    def x0(self) -> np.ndarray:
        return self.points[0]

    def err_norms(self) -> np.ndarray:
        return np.linalg.norm(self.errors, axis=1)

    def residuals(self, gamma: float) -> np.ndarray:
        """||x_n - J_gamma(x_n)|| for every stored n."""
        gamma = float(gamma)
        if gamma not in self._residuals:
            j = batch_resolvent(self.scenario.operator, gamma, self.points)
            r = np.linalg.norm(self.points - j, axis=1)
            r.setflags(write=False)
            self._residuals[gamma] = r
        return self._residuals[gamma]

    def halpern_residuals(self) -> np.ndarray:
        """||x_{n+1} - J_{beta_n}(x_n)|| for n < H."""
        return np.linalg.norm(self.points[1:] - self.jvals, axis=1)

    def recurrence_defect(self) -> float:
        """Largest |x_{n+1} - rhs(n)| re-evaluated from stored data (0.0 if bit-exact)."""
        worst = 0.0
        x0 = self.points[0]
        for n in range(self.horizon):
            a = self.alphas[n]
            rhs = a * x0 + (1.0 - a) * (self.jvals[n] + self.errors[n])
            worst = max(worst, float(np.max(np.abs(rhs - self.points[n + 1]))))
        return worst

    def to_csv(self, gamma: float = 1.0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "x", "residual_gamma", "alpha_n", "beta_n", "err_norm"])
        res = self.residuals(gamma)
        extra = _row_params(self.scenario, self.horizon)
        norms = self.err_norms()
        for n in range(self.horizon + 1):
            if n < self.horizon:
                a, b, e = self.alphas[n], self.betas[n], norms[n]
            else:
                a, b, e = extra
            w.writerow([
                n,
                ";".join(repr(float(c)) for c in self.points[n]),
                repr(float(res[n])),
                _fmt(a), _fmt(b), _fmt(e),
            ])
        return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def _row_params(scenario, n):
    seq = scenario.seq
    out = []
    for fn in (lambda: seq.alphas(n + 1)[n], lambda: seq.betas(n + 1)[n],
               lambda: seq.error_norms(n + 1)[n]):
        try:
            out.append(fn())
        except HorizonExhausted:
            out.append(None)
    return tuple(out)


def batch_resolvent(op: ops.Operator, beta: float, pts: np.ndarray) -> np.ndarray:
    """J_beta applied to every row of ``pts``."""
    if isinstance(op, (ops.IndicatorBox, ops.L1Scale)):
        return op._resolvent(float(beta), pts)
    if isinstance(op, ops.LinearPSD):
        return np.linalg.solve(np.eye(op.dim) + beta * op.matrix, pts.T).T
    if isinstance(op, ops.Skew2D):
        s = 1.0 + beta * beta
        return np.column_stack([(pts[:, 0] + beta * pts[:, 1]) / s, (pts[:, 1] - beta * pts[:, 0]) / s])
    if isinstance(op, ops.IndicatorBall):
        d = pts - op.center
        n = np.linalg.norm(d, axis=1, keepdims=True)
        scale = np.where(n > op.radius, op.radius / np.where(n > 0, n, 1.0), 1.0)
        return np.where(n > op.radius, op.center + scale * d, pts)
    return np.array([op.resolvent(beta, p) for p in pts])


def run(scenario: Scenario, steps: int) -> Trajectory:
    """Iterate ``steps`` times from x_0; returns ``steps + 1`` points."""
    if int(steps) != steps or steps < 0:
        raise InvalidScenario("steps must be a natural number")
    steps = int(steps)
    if steps > scenario.horizon:
        raise HorizonExhausted(f"{steps} steps exceed the horizon cap {scenario.horizon}")
    seq, op = scenario.seq, scenario.operator
    seq.validate(steps)
    d = op.dim
    alphas = seq.alphas(steps)
    betas = seq.betas(steps)
    errs = np.zeros((steps, d))
    for n in range(steps):
        errs[n] = seq.errors.vector(n, d)
    pts = np.empty((steps + 1, d))
    jv = np.empty((steps, d))
    x0 = scenario.x0
    pts[0] = x0
    x = x0
    for n in range(steps):
        j = op.resolvent(betas[n], x)
        a = alphas[n]
        x = a * x0 + (1.0 - a) * (j + errs[n])
        if not np.all(np.isfinite(x)):
            raise NonFiniteNumeric(f"iterate {n + 1} is not finite")
        jv[n] = j
        pts[n + 1] = x
    return Trajectory(scenario, pts, jv, alphas, betas, errs)


@dataclass(frozen=True)
class Constants:
    D: int
    E: int
    N: int

    def to_dict(self):
        return {"D": self.D, "E": self.E, "N": self.N}


def constants(scenario: Scenario, bundle: Optional[RateWitnessBundle] = None) -> Constants:
    """Smallest naturals with D >= ||x0 - P_S(x0)||, E >= 1 + sum_{i<=E(0)} ||e_i||."""
    bundle = bundle or scenario.bundle()
    if bundle.E is None:
        raise InvalidScenario("the error witness E is needed for the constants")
    p = scenario.operator.project_zero_set(scenario.x0)
    if not scenario.operator.in_zero_set(p, tol=1e-9):
        raise InvalidScenario("zero-set oracle returned a point outside S")
    D = ceil_nat(float(np.linalg.norm(scenario.x0 - p)))
    e0 = int(bundle.E(0))
    E = ceil_nat(1.0 + float(np.sum(scenario.seq.error_norms(e0 + 1))))
    return Constants(D=D, E=E, N=max(2 * D, D + E, 1))


def ball_bound_check(traj: Trajectory, p, calE: Optional[float] = None) -> CheckReport:
    """Radius-of-ball bound and its three consequences, each with 1e-9 slack."""
    p = ops.as_point(p, traj.points.shape[1])
    if calE is None:
        calE = constants(traj.scenario).E
    rep = CheckReport("ball_bound")
    d0 = float(np.linalg.norm(traj.x0 - p))
    np_ = float(np.linalg.norm(p))
    cum = np.concatenate([[0.0], np.cumsum(traj.err_norms())])
    dist = np.linalg.norm(traj.points - p, axis=1)
    norms = np.linalg.norm(traj.points, axis=1)
    from0 = np.linalg.norm(traj.points - traj.x0, axis=1)
    per = {
        "radius_of_ball": dist - (d0 + cum),
        "bound1": dist - (d0 + calE),
        "bound2": norms - (d0 + np_ + calE),
        "bound3": from0 - (2 * d0 + calE),
    }
    for name, sl in per.items():
        i = int(np.argmax(sl))
        rep.details[name] = float(sl[i])
        rep.observe(float(sl[i]), where={"bound": name, "n": i}, tol=SLACK)
    rep.checked = len(per) * (traj.horizon + 1)
    return rep


def halpern_chain_check(traj: Trajectory, D: int, calE: int) -> CheckReport:
    """||x_{n+1} - J_{beta_n}(x_n)|| <= alpha_n (2D + E) + ||e_n|| for all n < H."""
    rep = CheckReport("halpern_chain")
    if traj.horizon == 0:
        return rep
    sl = traj.halpern_residuals() - (traj.alphas * (2 * D + calE) + traj.err_norms())
    i = int(np.argmax(sl))
    rep.observe(float(sl[i]), where={"n": i}, tol=SLACK)
    rep.checked = traj.horizon
    return rep


def subdifferential_slack(x, y) -> float:
    """||x+y||^2 - (||x||^2 + 2<y, x+y>); never positive in exact arithmetic."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    s = x + y
    return float(s @ s - (x @ x + 2.0 * (y @ s)))


def distance_recurrence_sequences(traj: Trajectory, xt) -> dict:
    """The s, v, r, gamma sequences attached to a reference point ``xt``."""
    xt = ops.as_point(xt, traj.points.shape[1])
    op = traj.scenario.operator
    H = traj.horizon
    pts = traj.points
    s = np.sum((pts - xt) ** 2, axis=1)
    jt = np.array([np.linalg.norm(op.resolvent(b, xt) - xt) for b in traj.betas])
    dist = np.sqrt(s[:H])
    v = jt * (jt + 2 * dist)
    r = 2.0 * ((pts[1:] - xt) @ (traj.x0 - xt))
    en = traj.err_norms()
    g = en * (en + 2 * np.linalg.norm(traj.jvals - xt, axis=1))
    return {"s": s, "v": v, "r": r, "gamma": g}


def distance_recurrence_check(traj: Trajectory, xt) -> CheckReport:
    """s_{m+1} <= (1 - alpha_m)(s_m + v_m) + alpha_m r_m + gamma_m along the run."""
    rep = CheckReport("distance_recurrence")
    if traj.horizon == 0:
        return rep
    q = distance_recurrence_sequences(traj, xt)
    a = traj.alphas
    rhs = (1 - a) * (q["s"][:-1] + q["v"]) + a * q["r"] + q["gamma"]
    sl = q["s"][1:] - rhs
    i = int(np.argmax(sl))
    rep.observe(float(sl[i]), where={"m": i}, tol=SLACK)
    rep.checked = traj.horizon
    return rep
