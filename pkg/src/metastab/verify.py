"""Empirical checks tying trajectories, bound values and lemma inequalities together.

Synthetic recurrence instances live on the dyadic grid ``2**-64``: every real
number ``x`` is stored as the integer ``x * 2**64``, so premises and
conclusions are decided exactly with integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds as B
from . import iteration as it
from . import operators as ops
from .errors import HorizonExhausted, WitnessInvalid
from .rates import (
    Affine, BilinearPlus, CeilExpE, Const, Identity, NatFun, RateWitnessBundle, majorant,
)
from .reports import CheckReport
from .xnat import Exact, Tower, xnat_le

SLACK = 1e-9
SCALE_BITS = 64
ONE = 1 << SCALE_BITS
MAX_SYNTH_LEN = 6000  # instances whose bound exceeds this are redrawn


# ---------------------------------------------------------------------------
# metastability witnesses


def _diameter(pts: np.ndarray) -> float:
    if pts.shape[0] <= 1:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    best = 0.0
    for i in range(0, pts.shape[0], 512):
        blk = pts[i:i + 512]
        d = np.sqrt(((blk[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        best = max(best, float(d.max()))
    return best


def interval_stable(points: np.ndarray, lo: int, hi: int, eps: float) -> bool:
    """max_{i,j in [lo,hi]} ||x_i - x_j|| <= eps (empty/degenerate intervals pass)."""
    if hi <= lo:
        return True
    seg = points[lo:hi + 1]
    span = seg.max(axis=0) - seg.min(axis=0)
    if float(np.linalg.norm(span)) <= eps:  # bounding-box diagonal bounds the diameter
        return True
    if float(span.max()) > eps:  # a single coordinate already separates two points
        return False
    return _diameter(seg) <= eps


def find_metastability_witness(traj, k: int, f: NatFun, horizon: Optional[int] = None,
                               nontrivial: bool = False) -> Optional[int]:
    """Smallest n with ||x_i - x_j|| <= 1/(k+1) for all i, j in [n, f(n)].

    With ``nontrivial`` only candidates with f(n) > n are considered, which
    skips intervals that hold a single point.
    """
    H = traj.horizon if horizon is None else min(horizon, traj.horizon)
    eps = 1.0 / (k + 1) + SLACK
    fitted = False
    for n in range(H + 1):
        fn = f(n)
        if fn > H:
            continue
        if nontrivial and fn <= n:
            continue
        fitted = True
        if interval_stable(traj.points, n, fn, eps):
            return n
    if not fitted:
        raise HorizonExhausted(f"no candidate interval [n, f(n)] fits in horizon {H}")
    return None


# ---------------------------------------------------------------------------
# trajectory checks


def check_asymptotic_regularity(traj, op, gamma: float, bound: int, k: int) -> CheckReport:
    """||J_gamma(x_n) - x_n|| <= 1/(k+1) for every stored n >= bound."""
    rep = CheckReport("asymptotic_regularity", details={"k": k, "bound": int(bound), "gamma": gamma})
    if bound > traj.horizon:
        raise HorizonExhausted(f"bound {bound} beyond horizon {traj.horizon}")
    if op is not traj.scenario.operator:
        res = np.array([ops.residual(op, gamma, x) for x in traj.points[bound:]])
    else:
        res = traj.residuals(gamma)[bound:]
    sl = res - 1.0 / (k + 1)
    i = int(np.argmax(sl))
    rep.observe(float(sl[i]), where={"n": int(bound + _first_above(sl, SLACK, i))}, tol=SLACK)
    rep.checked = int(res.size)
    return rep


def _first_above(sl, tol, default):
    idx = np.flatnonzero(sl > tol)
    return int(idx[0]) if idx.size else default


def check_halpern_residual(traj, op, bound: int, k: int) -> CheckReport:
    """||x_{n+1} - J_{beta_n}(x_n)|| <= 1/(k+1) for every stored n >= bound."""
    rep = CheckReport("halpern_residual", details={"k": k, "bound": int(bound)})
    if bound > traj.horizon - 1:
        raise HorizonExhausted(f"bound {bound} beyond horizon {traj.horizon}")
    sl = traj.halpern_residuals()[bound:] - 1.0 / (k + 1)
    i = int(np.argmax(sl))
    rep.observe(float(sl[i]), where={"n": int(bound + _first_above(sl, SLACK, i))}, tol=SLACK)
    rep.checked = int(sl.size)
    return rep


def check_variational_inequality(op, x0, samples: int = 1000, seed: int = 0, traj=None,
                                 k: int = 0) -> CheckReport:
    """<x0 - P, y - P> <= 0 for sampled y in S, with P the projection of x0.

    With a trajectory, also reports the first index from which
    <x0 - P, x_i - P> <= 1/(k+1) holds on the whole stored tail; the check
    fails if the last stored iterate still violates it.
    """
    rep = CheckReport("variational_inequality", details={"samples": samples, "seed": seed})
    x0 = ops.as_point(x0, op.dim)
    P = op.project_zero_set(x0)
    ys = op.sample_zero_set(np.random.default_rng(seed), samples)
    vals = (ys - P) @ (x0 - P)
    i = int(np.argmax(vals))
    rep.observe(float(vals[i]), where={"sample": i, "y": ys[i].tolist()}, tol=SLACK)
    rep.checked = samples
    if traj is not None:
        inner = (traj.points - P) @ (x0 - P) - 1.0 / (k + 1)
        bad = np.flatnonzero(inner > SLACK)
        start = int(bad[-1] + 1) if bad.size else 0
        rep.details["tail_start"] = start
        rep.details["k"] = k
        if start > traj.horizon:
            rep.fail({"n": traj.horizon}, "last iterate violates the tail inequality")
    return rep


def check_resolvent_transfer(op, a: float, b: float, x, k: int) -> CheckReport:
    """||J_a x - x|| <= 1/(max{2 - b/a, b/a}(k+1))  implies  ||J_b x - x|| <= 1/(k+1)."""
    rep = CheckReport("resolvent_transfer")
    q = b / a
    prem = ops.residual(op, a, x) <= 1.0 / (max(2.0 - q, q) * (k + 1))
    if not prem:
        rep.vacuous += 1
        rep.checked += 1
        return rep
    rep.observe(ops.residual(op, b, x) - 1.0 / (k + 1), where={"a": a, "b": b, "x": list(map(float, x))},
                tol=SLACK)
    return rep


def check_convex_combination(op, N: int, k: int, x1, x2, t_samples: int = 101) -> CheckReport:
    """Almost fixed points of J_1 in B_N stay almost fixed along segments."""
    rep = CheckReport("convex_combination", details={"N": N, "k": k})
    x1, x2 = ops.as_point(x1, op.dim), ops.as_point(x2, op.dim)
    p = op.designated_zero
    if max(np.linalg.norm(x1 - p), np.linalg.norm(x2 - p)) > N + SLACK:
        raise ValueError("points must lie in the ball B_N around the designated zero")
    lim = 1.0 / (24 * N * (k + 1) ** 2)
    if max(ops.residual(op, 1.0, x1), ops.residual(op, 1.0, x2)) > lim:
        rep.vacuous += 1
        rep.checked += 1
        return rep
    for t in np.linspace(0.0, 1.0, t_samples):
        q = (1 - t) * x1 + t * x2
        rep.observe(ops.residual(op, 1.0, q) - 1.0 / (k + 1), where={"t": float(t)}, tol=SLACK)
    return rep


def inner_product_premise_gap(x, y, x0) -> float:
    """max_t (||x-x0||^2 - ||q_t(x,y)-x0||^2) over t in [0,1], in closed form."""
    c = float((x - x0) @ (y - x))
    a = float((y - x) @ (y - x))
    if c >= 0 or a == 0:
        return 0.0
    t = min(1.0, -c / a)
    return -(2 * t * c + t * t * a)


def check_inner_product_lemma(op, N: int, k: int, x, y, x0, t_samples: int = 101) -> CheckReport:
    """Near-minimality of ||x - x0|| along [x, y] bounds <x0 - x, y - x>.

    The premise is decided in closed form (it is a quadratic in t);
    ``t_samples`` additional grid points are audited against it.
    """
    rep = CheckReport("inner_product_lemma", details={"N": N, "k": k})
    x, y, x0 = (ops.as_point(v, op.dim) for v in (x, y, x0))
    p = op.designated_zero
    if max(np.linalg.norm(x - p), np.linalg.norm(y - p)) > N + SLACK:
        raise ValueError("points must lie in the ball B_N around the designated zero")
    eps = 1.0 / (4 * N * N * (k + 1) ** 2)
    gap = inner_product_premise_gap(x, y, x0)
    for t in np.linspace(0.0, 1.0, t_samples):
        q = (1 - t) * x + t * y
        g = float((x - x0) @ (x - x0) - (q - x0) @ (q - x0))
        if g > gap + 1e-12 * (1 + abs(gap)):
            raise AssertionError("closed-form premise gap disagrees with a grid sample")
    if gap > eps:
        rep.vacuous += 1
        rep.checked += 1
        return rep
    rep.observe(float((x0 - x) @ (y - x)) - 1.0 / (k + 1), where={"x": x.tolist(), "y": y.tolist()},
                tol=SLACK)
    return rep


def _ball_point(rng, center, radius, dim):
    g = rng.normal(size=dim)
    g /= np.linalg.norm(g) or 1.0
    return center + radius * rng.random() ** (1.0 / dim) * g


def geometric_lemma_suite(trials: int = 100, seed: int = 0) -> list:
    """Constructed instances for the segment and inner-product lemmas."""
    rng = np.random.default_rng(seed)
    conv = CheckReport("convex_combination_suite", details={"trials": trials, "seed": seed})
    innr = CheckReport("inner_product_suite", details={"trials": trials, "seed": seed})
    for trial in range(trials):
        kind = ops.CATALOG[trial % len(ops.CATALOG)]
        dim = 2 if kind == "skew2d" else int(rng.integers(1, 4))
        op = ops.random_operator(kind, rng, dim)
        N, k = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        p = op.designated_zero
        lim = 1.0 / (24 * N * (k + 1) ** 2)
        # almost fixed points: zeros moved by at most half the premise radius
        xs = []
        for _ in range(2):
            s = _sample_zero_in_ball(op, rng, p, N - lim)
            u = rng.normal(size=op.dim)
            xs.append(s + 0.5 * lim * rng.random() * u / (np.linalg.norm(u) or 1.0))
        r = check_convex_combination(op, N, k, xs[0], xs[1])
        if r.vacuous:
            raise WitnessInvalid("constructed almost fixed point misses the premise", (seed, trial))
        conv.merge(r)
        if not r.passed:
            conv.counterexample = {"seed": seed, "trial": trial, **(r.counterexample or {})}
        # near-projection: P_S(x0) plus a perturbation inside the premise tolerance
        x0 = _ball_point(rng, p, N / 2, op.dim)
        P = op.project_zero_set(x0)
        y = _sample_zero_in_ball(op, rng, p, N)
        eps = 1.0 / (4 * N * N * (k + 1) ** 2)
        x = P
        if trial % 2:
            u = rng.normal(size=op.dim)
            cand = P + 0.25 * eps * u / (np.linalg.norm(u) or 1.0) / (1 + 4 * N)
            if np.linalg.norm(cand - p) <= N:
                x = cand
        r = check_inner_product_lemma(op, N, k, x, y, x0)
        innr.merge(r)
        if not r.passed:
            innr.counterexample = {"seed": seed, "trial": trial}
    return [conv, innr]


def _sample_zero_in_ball(op, rng, p, radius):
    for _ in range(100):
        s = op.sample_zero_set(rng, 1)[0]
        if np.linalg.norm(s - p) <= radius:
            return s
    return p.copy()


# ---------------------------------------------------------------------------
# synthetic recurrence instances


@dataclass
class SyntheticInstance:
    """Scaled-integer data for one recurrence-lemma instance.

    Reals are stored multiplied by ``2**64``; ``alpha_m = 1/(m + c + 1)``.
    """

    c: int
    k: int
    n: int
    p: int
    D: int
    s: list
    v: list
    r: list
    gamma: list
    seed: int
    trial: int
    kind: str = "sigma"
    extra: dict = field(default_factory=dict)

    def alpha(self, m):
        return 1, m + self.c + 1


def _grid(rng, hi_num, hi_den):
    """Random grid point in [0, hi_num/hi_den], biased towards the ends."""
    top = (hi_num * ONE) // hi_den
    u = rng.random()
    if u < 0.2:
        return top
    if u < 0.3:
        return 0
    return int(top * rng.random())


def _step(S, V, Rr, G, m, c):
    # floor((1 - alpha)(S + V) + alpha R) + G with alpha = 1/(m + c + 1)
    return ((m + c) * (S + V) + Rr) // (m + c + 1) + G


def audit_premises(inst: SyntheticInstance) -> None:
    """Independent check of the final-lemma premises; raises WitnessInvalid."""
    k, n, p = inst.k, inst.n, inst.p
    L = len(inst.s)
    where = (inst.seed, inst.trial)
    for m in range(L - 1):
        lhs = (m + inst.c + 1) * (inst.s[m + 1] - inst.gamma[m])
        rhs = (m + inst.c) * (inst.s[m] + inst.v[m]) + inst.r[m]
        if lhs > rhs:
            raise WitnessInvalid(f"recurrence fails at m={m}", where)
    for m in range(n, p + 1):
        if inst.v[m] * 4 * (k + 1) * (p + 1) > ONE or inst.r[m] * 4 * (k + 1) > ONE:
            raise WitnessInvalid(f"v/r premise fails at m={m}", where)
    if any(x < 0 for x in inst.v + inst.r + inst.gamma + inst.s):
        raise WitnessInvalid("negative entry", where)
    acc = 0
    for i in range(n, L - 1):
        acc += inst.gamma[i]
        if acc * 4 * (k + 1) > ONE:
            raise WitnessInvalid(f"gamma partial sum fails at i={i}", where)
    if max(inst.s) > inst.D * ONE or inst.D < 1:
        raise WitnessInvalid("D is not an upper bound", where)


def sigma_value(variant: int, c: int, D: int, k: int, n: int) -> int:
    bundle = RateWitnessBundle(A=CeilExpE(c), Aprime=BilinearPlus(c))
    ctx = B.BoundContext(bundle, D=0, E=1, D_seq=D)
    return B.sigma(variant, ctx, k, n).value.value


def make_recurrence_instance(variant: int, rng, seed: int, trial: int) -> SyntheticInstance:
    c = int(rng.integers(1, 3))
    k = int(rng.integers(0, 3))
    n = int(rng.integers(0, 3))
    D_cap = int(rng.integers(1, 4))
    sig = sigma_value(variant, c, D_cap, k, n)
    p = sig + int(rng.integers(0, 300))
    L = p + 2
    s0 = _grid(rng, D_cap - 1, 1) if D_cap > 1 else _grid(rng, 1, 2)
    v, r, g = [0] * L, [0] * L, [0] * L
    budget = ONE // (4 * (k + 1))  # gamma budget from n on
    pre = ONE // 4  # total of v and gamma before n
    for m in range(L):
        if n <= m <= p:
            v[m] = _grid(rng, 1, 4 * (k + 1) * (p + 1))
            r[m] = _grid(rng, 1, 4 * (k + 1))
        elif m < n:
            v[m] = min(pre, _grid(rng, 1, 8))
            pre -= v[m]
            r[m] = _grid(rng, D_cap - 1, 1) if D_cap > 1 else _grid(rng, 1, 2)
        gm = _grid(rng, 1, 4 * (k + 1) * 8) if rng.random() < 0.3 else 0
        if m >= n:
            gm = min(gm, budget)
            budget -= gm
        else:
            gm = min(gm, pre)
            pre -= gm
        g[m] = gm
    s = [s0]
    for m in range(L - 1):
        s.append(_step(s[m], v[m], r[m], g[m], m, c))
    D = max(1, -(-max(s) // ONE))
    return SyntheticInstance(c, k, n, p, D, s, v, r, g, seed, trial)


def check_recurrence_instance(variant: int, inst: SyntheticInstance) -> CheckReport:
    audit_premises(inst)
    rep = CheckReport(f"sigma{variant}_instance")
    sig = sigma_value(variant, inst.c, inst.D, inst.k, inst.n)
    rep.details["sigma"] = sig
    if sig > inst.p:
        rep.vacuous += 1
        rep.checked += 1
        return rep
    _observe_window(rep, inst.s, sig, inst.p + 1, inst.k, {"seed": inst.seed, "trial": inst.trial})
    return rep


def _observe_window(rep, s, lo, hi, k, where):
    """Exact check of s_m <= 1/(k+1) for m in [lo, hi); the worst m is recorded."""
    seg = s[lo:hi]
    worst = max(range(len(seg)), key=seg.__getitem__)
    num = seg[worst] * (k + 1) - ONE
    ok = rep.observe(num / (ONE * (k + 1)), where={**where, "m": lo + worst})
    if ok and num > 0:  # float rounding hid an exact violation
        rep.fail({**where, "m": lo + worst})
    rep.checked += len(seg) - 1


def synth_recurrence_suite(variant: int, trials: int = 200, seed: int = 0) -> CheckReport:
    """Seeded instances of the perturbed recurrence lemma; conclusion on [sigma, p]."""
    rng = np.random.default_rng([seed, variant, 1])
    rep = CheckReport(f"sigma{variant}_suite", details={"trials": trials, "seed": seed})
    for t in range(trials):
        inst = make_recurrence_instance(variant, rng, seed, t)
        rep.merge(check_recurrence_instance(variant, inst))
    rep.details["instances"] = trials
    return rep


def theta_value(variant: int, c: int, D: int, R_w: NatFun, G_w: NatFun, k: int) -> int:
    bundle = RateWitnessBundle(A=CeilExpE(c), Aprime=BilinearPlus(c))
    ctx = B.BoundContext(bundle, D=0, E=1, D_seq=D)
    return B.theta(variant, ctx, R_w, G_w, k).value.value


def default_D(s0: int, r: list, gamma: list, R_w: NatFun, G_w: NatFun) -> int:
    """ceil(max{s0, Rb} + Gb) with Rb = max_{n<=R(0)} {1, r_n}, Gb = 1 + sum_{i<=G(0)} gamma_i."""
    Rb = max([ONE] + r[: R_w(0) + 1])
    Gb = ONE + sum(gamma[: G_w(0) + 1])
    return -(-(max(s0, Rb) + Gb) // ONE)


def make_theta_instance(variant: int, rng, seed: int, trial: int):
    while True:
        c = int(rng.integers(1, 3))
        k = int(rng.integers(0, 4))
        j = int(rng.integers(0, 4))
        R_w = [Const(j), Affine(1, j), Identity()][int(rng.integers(0, 3))]
        G_w = Identity()
        # a first guess of D only sizes the horizon; the audited D is recomputed
        est = theta_value(variant, c, 8, R_w, G_w, k)
        if est <= MAX_SYNTH_LEN:
            break
    g0 = rng.random()
    s0 = _grid(rng, int(rng.integers(1, 4)), 1)
    L = est + 200
    kcap = 4096
    rates = [R_w(j) for j in range(kcap)]
    kk = 0
    r = [0] * L
    for m in range(L):
        while kk < kcap and rates[kk] <= m:
            kk += 1
        # kk - 1 is the largest precision guaranteed at m (none when kk == 0)
        if kk == kcap:
            r[m] = 0
        else:
            r[m] = _grid(rng, 1, kk) if kk > 0 else _grid(rng, 2, 1)
    gamma = [int(g0 * rng.random() * ONE) >> i if i < SCALE_BITS else 0 for i in range(L)]
    s = [s0]
    for m in range(L - 1):
        s.append(_step(s[m], 0, r[m], gamma[m], m, c))
    D = default_D(s0, r, gamma, R_w, G_w)
    return dict(c=c, k=k, R_w=R_w, G_w=G_w, s=s, r=r, gamma=gamma, D=D, seed=seed, trial=trial)


def audit_theta_premises(inst: dict) -> None:
    s, r, gamma, c = inst["s"], inst["r"], inst["gamma"], inst["c"]
    where = (inst["seed"], inst["trial"])
    L = len(s)
    for m in range(L - 1):
        if (m + c + 1) * (s[m + 1] - gamma[m]) > (m + c) * s[m] + r[m]:
            raise WitnessInvalid(f"recurrence fails at m={m}", where)
    suf_r = list(r) + [0]
    suf_g = list(gamma) + [0]
    for m in range(L - 1, -1, -1):
        suf_r[m] = max(suf_r[m], suf_r[m + 1])
        suf_g[m] = suf_g[m] + suf_g[m + 1]
    for kk in range(0, 4096):
        start = inst["R_w"](kk)
        if start >= L:
            break
        if suf_r[start] * (kk + 1) > ONE:
            raise WitnessInvalid(f"R is not a rate at k={kk}", where)
    for kk in range(0, 4096):
        g = inst["G_w"](kk)
        if g + 1 >= L:
            break
        if suf_g[g + 1] * (kk + 1) > ONE:
            raise WitnessInvalid(f"G is not a Cauchy rate at k={kk}", where)
    if max(s) > inst["D"] * ONE:
        raise WitnessInvalid("D is not an upper bound", where)


def check_theta_instance(variant: int, inst: dict) -> CheckReport:
    """Audit the premises, then check s_m <= 1/(k+1) on [theta(k), len(s))."""
    audit_theta_premises(inst)
    rep = CheckReport(f"theta{variant}_instance")
    th = theta_value(variant, inst["c"], inst["D"], inst["R_w"], inst["G_w"], inst["k"])
    rep.details["theta"] = th
    s = inst["s"]
    if th >= len(s):
        rep.vacuous += 1
        rep.checked += 1
        return rep
    _observe_window(rep, s, th, len(s), inst["k"], {"seed": inst["seed"], "trial": inst["trial"]})
    return rep


def synth_theta_suite(variant: int, trials: int = 200, seed: int = 0) -> CheckReport:
    """Seeded instances of the quantitative Xu lemma; conclusion past theta."""
    rng = np.random.default_rng([seed, variant, 2])
    rep = CheckReport(f"theta{variant}_suite", details={"trials": trials, "seed": seed})
    for t in range(trials):
        rep.merge(check_theta_instance(variant, make_theta_instance(variant, rng, seed, t)))
    rep.details["instances"] = trials
    return rep


# ---------------------------------------------------------------------------
# operator suite


def operator_suite(samples: int = 1000, seed: int = 0, dim: int = 3) -> list:
    """Nonexpansiveness, resolvent identity, zero/fixed-point equivalence and
    monotone inclusion for every catalog variant."""
    out = []
    for idx, kind in enumerate(ops.CATALOG):
        rng = np.random.default_rng([seed, idx])
        d = 2 if kind == "skew2d" else dim
        op = ops.random_operator(kind, rng, d)
        ne = CheckReport(f"{kind}:nonexpansive")
        ri = CheckReport(f"{kind}:resolvent_identity")
        zf = CheckReport(f"{kind}:zero_fixed_point")
        mi = CheckReport(f"{kind}:monotone_inclusion")
        xs = rng.normal(scale=5.0, size=(samples, d))
        ys = rng.normal(scale=5.0, size=(samples, d))
        betas = rng.uniform(0, 100, samples)
        betas[betas == 0] = 100.0
        a_s = rng.uniform(0.01, 100, samples)
        for i in range(samples):
            x, y, be = xs[i], ys[i], float(betas[i])
            lhs = np.linalg.norm(op.resolvent(be, x) - op.resolvent(be, y))
            ne.observe(lhs - np.linalg.norm(x - y), where={"i": i}, tol=SLACK)
            res = ops.check_resolvent_identity(op, float(a_s[i]), be, x)
            ri.observe(res - 1e-8 * (1 + np.linalg.norm(x)), where={"i": i})
            p = op.project_zero_set(x)
            zf.observe(ops.residual(op, be, p) - 1e-10, where={"i": i})
            if op.single_valued:
                mi.observe(-float((op.apply(x) - op.apply(y)) @ (x - y)) - 1e-10, where={"i": i})
            else:
                mi.observe(op.inclusion_residual(be, x) - 1e-9 * (1 + np.linalg.norm(x)), where={"i": i})
        out += [ne, ri, zf, mi]
        out.append(check_variational_inequality(op, rng.normal(scale=5.0, size=d), samples, seed + idx))
        out[-1].name = f"{kind}:variational_inequality"
    return out


# ---------------------------------------------------------------------------
# bound soundness


def check_bound_soundness(scenario, k: int, f: NatFun, horizon: int = 10**4, variant: Optional[int] = None,
                          nontrivial: bool = True, traj=None) -> CheckReport:
    """Empirical metastability witness n* versus the magnitude-mode bound."""
    f = majorant(f)
    ctx = B.BoundContext.from_scenario(scenario, mode="magnitude")
    if variant is None:
        variant = 2 if ctx.witnesses.Aprime is not None else 1
    rep = CheckReport(f"metastability_phi{variant}", details={"k": k, "f": f.spec()})
    if traj is None or traj.horizon < horizon:
        traj = it.run(scenario, horizon)
    n_star = find_metastability_witness(traj, k, f, horizon, nontrivial=nontrivial)
    if n_star is None:
        return rep.fail({"k": k, "horizon": horizon}, "no empirical witness within the horizon")
    bound = B.phi(variant, ctx, k, f).value
    rep.details["n_star"] = n_star
    rep.details["phi"] = bound.to_json()
    rep.details["vacuous_margin"] = isinstance(bound, Tower) or bound.value > 1000 * (n_star + 1)
    rep.checked = 1
    if not xnat_le(Exact(n_star), bound):
        rep.fail({"n_star": n_star}, "empirical witness exceeds the bound")
    return rep


def regularity_checks(scenario, kmax: int = 9, horizon: int = 10**5, traj=None) -> list:
    """Asymptotic regularity and Halpern residual rates for k <= kmax."""
    ctx = B.BoundContext.from_scenario(scenario)
    if traj is None or traj.horizon < horizon:
        traj = it.run(scenario, horizon)
    ar = CheckReport("asymptotic_regularity_suite", details={"kmax": kmax})
    hr = CheckReport("halpern_residual_suite", details={"kmax": kmax})
    op = scenario.operator
    for k in range(kmax + 1):
        chi_k = B.chi(ctx, k).value.value
        xi_k = B.xi(ctx, k).value.value
        ar.details[f"chi({k})"] = chi_k
        hr.details[f"xi({k})"] = xi_k
        for gamma in sorted({1.0, float(scenario.ell)}):
            r = check_asymptotic_regularity(traj, op, gamma, chi_k, k)
            ar.merge(r)
        hr.merge(check_halpern_residual(traj, op, xi_k, k))
    c = it.constants(scenario)
    p = op.project_zero_set(scenario.x0)
    extra = [it.ball_bound_check(traj, p, c.E), it.halpern_chain_check(traj, c.D, c.E),
             it.distance_recurrence_check(traj, p)]
    return [ar, hr] + extra


def lemma_suites(trials: int = 100, seed: int = 0) -> list:
    reps = [synth_recurrence_suite(1, trials, seed), synth_recurrence_suite(2, trials, seed),
            synth_theta_suite(1, trials, seed), synth_theta_suite(2, trials, seed)]
    reps += geometric_lemma_suite(trials, seed)
    rng = np.random.default_rng([seed, 7])
    tr = CheckReport("resolvent_transfer_suite", details={"trials": trials, "seed": seed})
    for t in range(trials):
        kind = ops.CATALOG[t % len(ops.CATALOG)]
        op = ops.random_operator(kind, rng, 2)
        a, b = float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5))
        k = int(rng.integers(0, 6))
        q = b / a
        s = op.sample_zero_set(rng, 1)[0]
        u = rng.normal(size=op.dim)
        x = s + rng.random() * u / (np.linalg.norm(u) or 1.0) / (2 * max(2 - q, q) * (k + 1))
        tr.merge(check_resolvent_transfer(op, a, b, x, k))
    reps.append(tr)
    sub = CheckReport("subdifferential_inequality", details={"trials": 1000, "seed": seed})
    for t in range(1000):
        x, y = rng.normal(size=3) * 10, rng.normal(size=3) * 10
        sub.observe(it.subdifferential_slack(x, y), where={"trial": t}, tol=SLACK)
    reps.append(sub)
    return reps
