"""Sampled verification of the structural conditions on ``g`` and ``lambda``.

Every check evaluates a normalized log-ratio ``ln(lhs / rhs)`` of the
inequality at each sample; the inequality holds at a sample when the ratio
is at most 1.  Reports carry the worst ratio and, on violation, a witness
tuple that :func:`recheck_witness` re-evaluates in isolation.

Asymptotic conditions on ``lambda`` (improper integrals, limits) cannot be
decided in floating point.  Their verdicts mean "holds at the configured
truncation" and the reports record the truncation and fitted exponents.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, UsageError
from .growth import (Family, GrowthSpec, LambdaSpec, eval_log_g,
                     eval_Lambda, eval_log_Lambda)
from .logradius import LogRadius
from .quadrature import adaptive_simpson

log = logging.getLogger(__name__)

RATIO_TOL = 1e-12
LN_3_2 = math.log(1.5)


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ConditionReport:
    """Outcome of one sampled condition check."""

    condition: str
    verdict: Verdict
    worst_ratio: float
    witness: Optional[dict]
    samples: int
    constants: dict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "type": "condition",
            "condition": self.condition,
            "verdict": self.verdict.value,
            "worst_ratio": self.worst_ratio,
            "witness": self.witness,
            "samples": self.samples,
            "constants": dict(self.constants),
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sampling design.

    ``v`` values are log-spaced over ``[max(s0, v_min), v_max]``; sample pairs
    are all ``v < w`` from that grid with ``w / v <= ratio_max``.  Points are
    drawn uniformly in the ball ``B_radius(x0)`` (times in
    ``[t0 - radius, t0]``) with a seeded generator.
    """

    v_min: float = 1e-6
    v_max: float = 1e6
    n_v: int = 64
    ratio_max: float = 1e4
    n_points: int = 8
    radius: float = 0.5
    seed: int = 20240611
    n_young: int = 10_000

    def __post_init__(self):
        if self.n_v < 2 or self.n_points < 1 or self.n_young < 1:
            raise UsageError("empty sample plan")
        if not 0 < self.v_min < self.v_max:
            raise UsageError("sample plan needs 0 < v_min < v_max")
        if not self.ratio_max > 1:
            raise UsageError("ratio_max must exceed 1")

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([int(self.seed) & 0xFFFFFFFFFFFFFFFF, salt])

    def pairs(self, lower: float = 0.0):
        """Return ``(v, w)`` arrays of admissible pairs with ``v > lower``."""
        lo = max(self.v_min, lower)
        if lo >= self.v_max:
            raise UsageError("sample range above the threshold is empty")
        grid = np.geomspace(lo, self.v_max, self.n_v)
        grid = grid[grid > lower]
        i, j = np.triu_indices(grid.size, k=1)
        v, w = grid[i], grid[j]
        keep = (w / v <= self.ratio_max) & (w > v)
        if not np.any(keep):
            raise UsageError("sample plan produced no pairs")
        return v[keep], w[keep]

    def points(self, x0, t0, radius=None, salt=0, n=None):
        """Uniform points in ``B_radius(x0)`` and times in ``[t0-radius, t0]``."""
        radius = self.radius if radius is None else radius
        x0 = np.asarray(x0, dtype=float)
        dim = x0.size
        n = self.n_points if n is None else n
        rng = self.rng(salt)
        d = rng.normal(size=(n, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        rad = radius * rng.random(n) ** (1.0 / dim)
        pts = x0 + d * rad[:, None]
        ts = t0 - radius * rng.random(n)
        return pts, ts


def _point(spec: GrowthSpec, x0=None):
    x0 = spec.x0 if x0 is None else x0
    x0 = np.asarray(x0, dtype=float)
    if x0.size != spec.n:
        x0 = np.resize(x0, spec.n)
    return x0


def _lpsi(spec, x, t, lv):
    return np.asarray(eval_log_g(spec, x, t, lv)) - lv


def _finish(condition, lr, wit_fn, samples, consts, details=None) -> ConditionReport:
    lr = np.asarray(lr, dtype=float)
    if lr.size == 0:
        raise UsageError("empty sample plan")
    finite = np.isfinite(lr)
    if not np.all(finite | (lr == -np.inf)):
        idx = int(np.flatnonzero(~(finite | (lr == -np.inf)))[0])
        return ConditionReport(condition, Verdict.INCONCLUSIVE, math.nan, wit_fn(idx),
                               samples, consts, dict(details or {}, nonfinite_at=idx))
    k = int(np.argmax(lr))
    worst = math.exp(float(lr.flat[k]))
    violated = worst > 1.0 + RATIO_TOL
    return ConditionReport(condition, Verdict.VIOLATED if violated else Verdict.HOLDS,
                           worst, wit_fn(k) if violated else None, samples, consts,
                           dict(details or {}))


def _wit(x1, t1, x2, t2, v, w, r, **extra):
    out = {"x1": [float(c) for c in np.atleast_1d(x1)], "t1": float(t1),
           "x2": [float(c) for c in np.atleast_1d(x2)], "t2": float(t2),
           "v": float(v), "w": float(w), "r": None if r is None else float(r)}
    out.update({k: float(val) for k, val in extra.items()})
    return out


# --------------------------------------------------------------------------
# log-ratio kernels shared by the checks and the witness re-evaluation

def _lr_g1(spec, x, t, v, w, c1, q):
    lv, lw = np.log(v), np.log(w)
    return (np.asarray(eval_log_g(spec, x, t, lw)) - np.asarray(eval_log_g(spec, x, t, lv))
            - math.log(c1) - (q - 1.0) * (lw - lv))


def _lr_g3(spec, x, t, v, w, c7, p):
    lv, lw = np.log(v), np.log(w)
    return (math.log(c7) + (p - 1.0) * (lw - lv)
            - (np.asarray(eval_log_g(spec, x, t, lw)) - np.asarray(eval_log_g(spec, x, t, lv))))


def _lr_g2(spec, x1, t1, x2, t2, lvr, lam_r, c2):
    return (np.asarray(eval_log_g(spec, x1, t1, lvr)) - np.asarray(eval_log_g(spec, x2, t2, lvr))
            - lam_r - math.log(c2))


def _lr_psi(kind, spec, x, t, v, w, const, mu):
    lv, lw = np.log(v), np.log(w)
    dpsi = _lpsi(spec, x, t, lw) - _lpsi(spec, x, t, lv)
    if kind == "degenerate-lower":
        return math.log(const) + mu * (lw - lv) - dpsi
    if kind == "degenerate-upper":
        return dpsi - math.log(const) - mu * (lw - lv)
    if kind == "singular-lower":
        return math.log(const) + mu * (lv - lw) - dpsi
    if kind == "singular-upper":
        return dpsi - math.log(const) - mu * (lv - lw)
    raise UsageError(kind)


def _g_lin(spec, x, t, v):
    return np.exp(np.asarray(eval_log_g(spec, x, t, np.log(v))))


def _lr_young1(spec, x, t, eps, a, b):
    ga = _g_lin(spec, x, t, a)
    lhs = ga * b
    rhs = eps * ga * a + _g_lin(spec, x, t, b / eps) * b
    return np.log(lhs) - np.log(rhs)


def _lr_young2(spec, x, t, eps, a, b, c7, p):
    ga = _g_lin(spec, x, t, a)
    lhs = ga * b
    rhs = ga * a / eps + eps ** (p - 1.0) / c7 * _g_lin(spec, x, t, b) * b
    return np.log(lhs) - np.log(rhs)


# --------------------------------------------------------------------------
# elliptic growth conditions

def check_g1_elliptic(spec: GrowthSpec, plan: SamplePlan, q_param: Optional[float] = None,
                      c1: Optional[float] = None) -> ConditionReport:
    """Upper growth: ``g(x,w)/g(x,v) <= c1 (w/v)^(q-1)`` for ``w >= v > s0``.

    Parameters
    ----------
    spec : GrowthSpec
    plan : SamplePlan
    q_param : float, optional
        Declared growth exponent, default ``spec.q``.
    c1 : float, optional
        Declared constant, default ``spec.constants['c1']`` or 1.
    """
    q = float(spec.q if q_param is None else q_param)
    c1 = spec.constant("c1", 1.0) if c1 is None else float(c1)
    v, w = plan.pairs(spec.s0)
    pts, ts = plan.points(_point(spec), spec.t0, salt=1)
    lr = _lr_g1(spec, pts[:, None, :], ts[:, None], v[None, :], w[None, :], c1, q)

    def wit(k):
        i, j = np.unravel_index(k, lr.shape)
        return _wit(pts[i], ts[i], pts[i], ts[i], v[j], w[j], None)

    return _finish("g1", lr, wit, lr.size, {"c1": c1, "q": q, "s0": spec.s0})


def check_g3_lower(spec: GrowthSpec, plan: SamplePlan, p_param: Optional[float] = None,
                   c7: Optional[float] = None) -> ConditionReport:
    """Lower growth: ``g(x,w)/g(x,v) >= c7 (w/v)^(p-1)`` for ``w >= v > 0``."""
    p = float(spec.p if p_param is None else p_param)
    c7 = spec.constant("c7", 1.0) if c7 is None else float(c7)
    v, w = plan.pairs(0.0)
    pts, ts = plan.points(_point(spec), spec.t0, salt=3)
    lr = _lr_g3(spec, pts[:, None, :], ts[:, None], v[None, :], w[None, :], c7, p)

    def wit(k):
        i, j = np.unravel_index(k, lr.shape)
        return _wit(pts[i], ts[i], pts[i], ts[i], v[j], w[j], None)

    return _finish("g3", lr, wit, lr.size, {"c7": c7, "p": p})


def predicted_c2(spec: GrowthSpec, lam: LambdaSpec, K: float, radii) -> float:
    """Constant ``c2(K)`` implied by the declared moduli of the fields.

    G1/G2 with exponent oscillation ``<= lambda(r)/ln(1/r)`` give
    ``max(1,K)^(lambda(r)/ln(1/r))``; G3 with ``osc a <= a0 r^alpha e^lambda``
    gives ``1 + a0 K^(q-p) r^(alpha-(q-p))``; G4 with
    ``osc b <= b0coef e^lambda / ln(1/r)`` gives
    ``1 + b0coef ln(1+K/r)/ln(1/r)``.  The maximum over ``radii`` is
    returned.  ``x``-independent growth gives 1.
    """
    if spec.x_independent:
        return 1.0
    fam = spec.family
    best = 1.0
    for r in radii:
        lr1 = math.log(1.0 / r)
        if fam in (Family.G1, Family.G2):
            val = max(1.0, K) ** (lam(r) / lr1)
        elif fam is Family.G3:
            val = 1.0 + spec.a0 * K ** (spec.q - spec.p) * r ** (spec.alpha - (spec.q - spec.p))
        elif fam is Family.G4:
            val = 1.0 + spec.b0coef * math.log1p(K / r) / lr1
        else:
            raise UsageError("custom growth needs a declared c2")
        best = max(best, val)
    return best


def default_radii(lam: LambdaSpec, domain_radius: float, count: int = 8):
    top = domain_radius / 8.0
    rmax = lam.r_max
    if isinstance(rmax, LogRadius):
        rf = rmax.to_float()
        top = min(top, 0.5 * rf)
    return [top * 0.25 ** k for k in range(count)]


def check_g2_continuity(spec: GrowthSpec, lam: LambdaSpec, K: Optional[float] = None,
                        ball=None, radii=None, plan: Optional[SamplePlan] = None,
                        c2: Optional[float] = None, n_v: int = 16) -> ConditionReport:
    """Continuity in ``x``: ``g(x1, v/r) <= c2 e^lambda(r) g(x2, v/r)``.

    Pairs ``x1, x2`` are drawn in ``B_r(x0)`` for each radius and
    ``v`` is log-spaced over ``[r, K]``.  ``ball = (x0, R)`` is the domain;
    every radius must satisfy ``8 r <= R``.  The declared ``c2`` defaults to
    ``spec.constants['c2']`` or else to :func:`predicted_c2`.  The report's
    ``details['c2_min']`` is the smallest constant consistent with the
    samples.
    """
    plan = plan or SamplePlan()
    K = float(spec.K if K is None else K)
    if ball is None:
        x0, dom = _point(spec), float(spec.R if spec.R is not None else 0.5)
    else:
        x0, dom = np.asarray(ball[0], dtype=float), float(ball[1])
    radii = list(default_radii(lam, dom) if radii is None else radii)
    if not radii:
        raise UsageError("no radii given")
    for r in radii:
        if not 0 < r < 1:
            raise UsageError("radii must lie in (0, 1)")
        if 8 * r > dom * (1 + 1e-12):
            raise UsageError(f"domain radius {dom} too small for B_8r with r={r}")
    if c2 is None:
        if "c2" in spec.constants:
            c2, source = spec.constant("c2"), "declared"
        else:
            c2, source = predicted_c2(spec, lam, K, radii), "predicted"
    else:
        c2, source = float(c2), "argument"
    chunks, wits = [], []
    for idx, r in enumerate(radii):
        if K < r:
            continue
        lvr = np.log(np.geomspace(r, K, n_v) / r) if K > r else np.zeros(1)
        p1, t1 = plan.points(x0, spec.t0, radius=r, salt=100 + 2 * idx)
        p2, t2 = plan.points(x0, spec.t0, radius=r, salt=101 + 2 * idx)
        lam_r = lam(r)
        lr = _lr_g2(spec, p1[:, None, :], t1[:, None], p2[:, None, :], t2[:, None],
                    lvr[None, :], lam_r, c2)
        chunks.append(lr.ravel())
        for i in range(p1.shape[0]):
            for j in range(lvr.size):
                wits.append((p1[i], t1[i], p2[i], t2[i], r * math.exp(lvr[j]), r))
    if not chunks:
        raise UsageError("v range [r, K] is empty for every radius")
    lr = np.concatenate(chunks)

    def wit(k):
        a, ta, b, tb, v, r = wits[k]
        return _wit(a, ta, b, tb, v, v, r)

    rep = _finish("g2", lr, wit, lr.size, {"c2": c2, "K": K},
                  {"c2_source": source,
                   "c2_min": float(math.exp(np.max(lr)) * c2),
                   "radii": [float(r) for r in radii]})
    return rep


# --------------------------------------------------------------------------
# parabolic psi conditions

def _threshold(spec: GrowthSpec, R: Optional[float]) -> float:
    if spec.delta > 0:
        if R is None:
            raise UsageError("R must be set when delta > 0")
        return spec.b0 * R ** (-spec.delta)
    return spec.b0


def check_psi_regime(spec: GrowthSpec, regime: str, x0=None, t0: Optional[float] = None,
                     R: Optional[float] = None, plan: Optional[SamplePlan] = None) -> ConditionReport:
    """Check the two ``psi``-ratio inequalities of a regime.

    Degenerate::

        psi(x0,t0,w)/psi(x0,t0,v) >= c7 (w/v)^mu1
        psi(x,t,w)/psi(x,t,v)     <= c8 (w/v)^mu2    on the cylinder

    Singular::

        psi(x0,t0,w)/psi(x0,t0,v) >= c9 (v/w)^mu4
        psi(x,t,w)/psi(x,t,v)     <= c10 (v/w)^mu3   on the cylinder

    for ``w >= v > b0 R^(-delta)``.  Constants default to 1; the ``mu``
    values must be set on ``spec``.
    """
    plan = plan or SamplePlan()
    regime = str(regime).lower()
    R = spec.R if R is None else R
    t0 = spec.t0 if t0 is None else t0
    x0 = _point(spec, x0)
    thr = _threshold(spec, R)
    if regime == "degenerate":
        mus = (spec.mu1, spec.mu2)
        names = ("c7", "c8")
        kinds = ("degenerate-lower", "degenerate-upper")
    elif regime == "singular":
        mus = (spec.mu4, spec.mu3)
        names = ("c9", "c10")
        kinds = ("singular-lower", "singular-upper")
    else:
        raise UsageError(f"unknown regime {regime!r}")
    if any(m is None for m in mus):
        raise UsageError(f"{regime} regime constants (mu) are missing")
    consts = {nm: spec.constant(nm, 1.0) for nm in names}
    v, w = plan.pairs(thr)
    rad = float(R) if R is not None else plan.radius
    pts, ts = plan.points(x0, t0, radius=rad, salt=7)
    lr_low = _lr_psi(kinds[0], spec, x0, t0, v, w, consts[names[0]], mus[0])
    lr_up = _lr_psi(kinds[1], spec, pts[:, None, :], ts[:, None], v[None, :], w[None, :],
                    consts[names[1]], mus[1])
    lr_low = np.atleast_1d(lr_low)
    lr = np.concatenate([lr_low, lr_up.ravel()])
    nlow = lr_low.size

    def wit(k):
        if k < nlow:
            return _wit(x0, t0, x0, t0, v[k], w[k], None, part=0)
        i, j = np.unravel_index(k - nlow, lr_up.shape)
        return _wit(pts[i], ts[i], pts[i], ts[i], v[j], w[j], None, part=1)

    mu_names = ("mu1", "mu2") if regime == "degenerate" else ("mu4", "mu3")
    c = dict(consts, **{mu_names[0]: float(mus[0]), mu_names[1]: float(mus[1]),
                        "threshold": float(thr)})
    return _finish(f"psi-{regime}", lr, wit, lr.size, c,
                   {"worst_lower": float(np.exp(np.max(lr_low))),
                    "worst_upper": float(np.exp(np.max(lr_up)))})


# --------------------------------------------------------------------------
# Young-type inequalities

def check_young(spec: GrowthSpec, plan: Optional[SamplePlan] = None,
                p_param: Optional[float] = None, c7: Optional[float] = None) -> ConditionReport:
    """Sample the two Young-type inequalities::

        g(x,a) b <= eps g(x,a) a + g(x, b/eps) b
        g(x,a) b <= g(x,a) a / eps + eps^(p-1)/c7 g(x,b) b

    with ``eps`` in (0,1), ``a, b`` in (0, 100] and ``x`` in the unit cube.
    """
    plan = plan or SamplePlan()
    p = float(spec.p if p_param is None else p_param)
    c7 = spec.constant("c7", 1.0) if c7 is None else float(c7)
    rng = plan.rng(11)
    n = plan.n_young
    eps = 1.0 - rng.random(n)  # (0, 1]
    eps = np.where(eps >= 1.0, 0.5, eps)
    a = 100.0 * (1.0 - rng.random(n))
    b = 100.0 * (1.0 - rng.random(n))
    x = rng.random((n, spec.n))
    t = rng.random(n)
    lr1 = _lr_young1(spec, x, t, eps, a, b)
    lr2 = _lr_young2(spec, x, t, eps, a, b, c7, p)
    lr = np.concatenate([lr1, lr2])

    def wit(k):
        part, i = divmod(k, n)
        return _wit(x[i], t[i], x[i], t[i], a[i], b[i], None, eps=eps[i], part=part)

    return _finish("young", lr, wit, lr.size, {"c7": c7, "p": p},
                   {"worst_first": float(np.exp(np.max(lr1))),
                    "worst_second": float(np.exp(np.max(lr2))),
                    "violations": int(np.sum(lr > math.log1p(RATIO_TOL)))})


def recheck_witness(spec: GrowthSpec, report: ConditionReport, lam: Optional[LambdaSpec] = None) -> float:
    """Re-evaluate the inequality of ``report`` at its witness; returns the ratio."""
    w = report.witness
    if w is None:
        raise UsageError("report has no witness")
    c = report.constants
    x1 = np.array([w["x1"]])
    x2 = np.array([w["x2"]])
    t1, t2 = np.array([w["t1"]]), np.array([w["t2"]])
    v, ww = np.array([w["v"]]), np.array([w["w"]])
    cond = report.condition
    if cond == "g1":
        lr = _lr_g1(spec, x1, t1, v, ww, c["c1"], c["q"])
    elif cond == "g3":
        lr = _lr_g3(spec, x1, t1, v, ww, c["c7"], c["p"])
    elif cond == "g2":
        if lam is None:
            raise UsageError("g2 witness needs a LambdaSpec")
        r = w["r"]
        lr = _lr_g2(spec, x1, t1, x2, t2, np.log(v / r), lam(r), c["c2"])
    elif cond.startswith("psi-"):
        regime = cond[4:]
        part = int(w["part"])
        if regime == "degenerate":
            kind = ("degenerate-lower", "degenerate-upper")[part]
            const = (c["c7"], c["c8"])[part]
            mu = (c["mu1"], c["mu2"])[part]
        else:
            kind = ("singular-lower", "singular-upper")[part]
            const = (c["c9"], c["c10"])[part]
            mu = (c["mu4"], c["mu3"])[part]
        xx = x1[0] if part == 0 else x1
        tt = t1[0] if part == 0 else t1
        lr = _lr_psi(kind, spec, xx, tt, v, ww, const, mu)
    elif cond == "young":
        eps = np.array([w["eps"]])
        if int(w["part"]) == 0:
            lr = _lr_young1(spec, x1, t1, eps, v, ww)
        else:
            lr = _lr_young2(spec, x1, t1, eps, v, ww, c["c7"], c["p"])
    else:
        raise UsageError(f"unknown condition {cond!r}")
    return float(np.exp(np.asarray(lr).ravel()[0]))


# --------------------------------------------------------------------------
# regime classification

@dataclass
class RegimeClassification:
    """Regime constants produced by the worked examples."""

    regime: str  # degenerate | singular | inconclusive
    case: str
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    mu3: Optional[float] = None
    mu4: Optional[float] = None
    delta: Optional[float] = None
    b0: Optional[float] = None
    R: Optional[float] = None
    R_residual: Optional[float] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"type": "regime", "regime": self.regime, "case": self.case,
                "mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "mu4": self.mu4,
                "delta": self.delta, "b0": self.b0, "R": self.R,
                "R_residual": self.R_residual, "reason": self.reason}

    def apply(self, spec: GrowthSpec) -> GrowthSpec:
        """Copy of ``spec`` carrying these regime constants."""
        if self.regime == "inconclusive":
            return spec
        changes = {k: getattr(self, k) for k in ("mu1", "mu2", "mu3", "mu4")
                   if getattr(self, k) is not None}
        changes["delta"] = self.delta
        changes["b0"] = self.b0
        if self.R is not None and math.isfinite(self.R):
            changes["R"] = self.R
        return spec.with_(**changes)


def _solve_R(log_f, hi_start: float = 1.0, lam: Optional[LambdaSpec] = None):
    """Bisection in ``ln R`` for an increasing-at-root scalar ``log_f``.

    ``log_f(R) < 0`` below the root and ``> 0`` above it.  Returns the root
    and the final residual of ``log_f``.
    """
    def ok(R):
        return lam is None or lam.in_domain(R)

    lo = hi = hi_start
    while not ok(hi) and hi > 1e-300:
        hi *= 0.5
    lo = hi
    it = 0
    while log_f(hi) < 0:
        lo = hi
        nxt = hi * 2.0
        if not ok(nxt) or it > 2000:
            return hi, log_f(hi)
        hi = nxt
        it += 1
    it = 0
    while log_f(lo) > 0:
        hi = lo
        lo *= 0.5
        it += 1
        if lo < 1e-300 or it > 2000:
            raise DomainError("admissible R not found above 1e-300")
    a, b = math.log(lo), math.log(hi)
    for _ in range(400):
        m = 0.5 * (a + b)
        if log_f(math.exp(m)) > 0:
            b = m
        else:
            a = m
        if b - a < 1e-15:
            break
    R = math.exp(a)
    return R, log_f(R)


def classify_example(spec: GrowthSpec, lam: Optional[LambdaSpec] = None) -> RegimeClassification:
    """Regime constants for the four built-in families.

    ``p``/``q`` are the lower/upper exponent bounds, ``p1`` the upper bound
    of ``p(x,t)`` and ``q1`` the lower bound of ``q(x,t)``.  Exponent ranges
    the worked examples do not cover give an ``inconclusive`` result.
    """
    lam = lam or LambdaSpec()
    fam = spec.family
    p, q, p1, q1 = spec.p, spec.q, spec.p1, spec.q1
    x0 = _point(spec)
    if fam is Family.G1:
        if p > 2:
            return RegimeClassification("degenerate", "g1:p>2", mu1=p - 2, mu2=q - 2, delta=0.0, b0=0.0)
        if q < 2:
            return RegimeClassification("singular", "g1:q<2", mu3=2 - q, mu4=2 - p, delta=0.0, b0=0.0)
        if p1 < 2 < q1:
            mu1 = (q1 - 2) / 2
            b0 = max(1.0, ((2 - p + mu1) / (q1 - 2 + mu1)) ** (1.0 / (q1 - p1)))
            return RegimeClassification("degenerate", "g1:p1<2<q1", mu1=mu1, mu2=q - 2, delta=0.0, b0=b0)
        return _inconclusive("g1", "exponent range touches 2 without the split p1 < 2 < q1")
    if fam is Family.G2:
        if p > 2:
            return RegimeClassification("degenerate", "g2:p>2", mu1=p - 2, mu2=p - 1, delta=0.0, b0=0.0)
        if p1 < 2:
            return RegimeClassification("singular", "g2:p1<2", mu3=(2 - p) / 2, mu4=2 - p, delta=0.0,
                                        b0=math.exp(2 / (2 - p)) - 1)
        return _inconclusive("g2", "p <= 2 <= p1")
    if fam is Family.G3:
        a_x0 = float(spec.a_field(x0, spec.t0))
        if p > 2 and a_x0 > 0:
            mu1 = (q - 2) / 2
            delta = spec.alpha / (q - p)
            base = (2.0 / spec.a0) * (q + 2 - 2 * p) / (q - 2)
            b0 = base ** (1.0 / (q - p)) if base > 0 else 0.0
            target = math.log(0.5 * a_x0)

            def log_f(R):
                return math.log(spec.a0) + spec.alpha * math.log(R) + lam(R) - target

            R, res = _solve_R(log_f, lam=lam)
            resid = spec.a0 * R ** spec.alpha * math.exp(lam(R)) - 0.5 * a_x0
            return RegimeClassification("degenerate", "g3:2<p<q,a(x0)>0", mu1=mu1, mu2=q - 2,
                                        delta=delta, b0=b0, R=R, R_residual=resid)
        if p > 2:
            return RegimeClassification("degenerate", "g3:p>2", mu1=p - 2, mu2=q - 2, delta=0.0, b0=0.0)
        if q < 2:
            return RegimeClassification("singular", "g3:q<2", mu3=2 - q, mu4=2 - p, delta=0.0, b0=0.0)
        if p < 2 < q and a_x0 == 0:
            rhs = (2 - p) / 2
            coef = spec.a0 * (q - 1 - p / 2) * spec.M ** (q - p)
            if coef <= 0:
                R, resid = math.inf, 0.0
            else:
                def log_f(R):
                    return math.log(coef) + spec.alpha * math.log(R) + lam(R) - math.log(rhs)

                R, _ = _solve_R(log_f, lam=lam)
                resid = coef * R ** spec.alpha * math.exp(lam(R)) - rhs
            return RegimeClassification("singular", "g3:p<2<q,a(x0)=0", mu3=(2 - p) / 2, mu4=2 - p,
                                        delta=0.0, b0=0.0, R=R, R_residual=resid)
        return _inconclusive("g3", "p < 2 < q with a(x0) > 0, or an exponent equal to 2")
    if fam is Family.G4:
        if p > 2:
            return RegimeClassification("degenerate", "g4:p>2", mu1=p - 2, mu2=p - 1, delta=0.0, b0=0.0)
        if p < 2:
            return RegimeClassification("singular", "g4:p<2", mu3=(2 - p) / 2, mu4=2 - p, delta=0.0,
                                        b0=math.exp(2 / (2 - p)) - 1)
        return _inconclusive("g4", "p = 2")
    return _inconclusive("custom", "custom growth has no worked example")


def _inconclusive(case, reason):
    return RegimeClassification("inconclusive", case, reason=reason)


# --------------------------------------------------------------------------
# lambda admissibility

@dataclass
class AdmissibilityReport:
    """Finite-truncation verdicts for the conditions on ``lambda``."""

    criterion: str
    doubling: dict
    divergence: dict
    vanishing: dict
    remark: Optional[dict] = None
    overall: Verdict = Verdict.INCONCLUSIVE

    def to_dict(self) -> dict:
        return {"type": "admissibility", "criterion": self.criterion,
                "doubling": self.doubling, "divergence": self.divergence,
                "vanishing": self.vanishing, "remark": self.remark,
                "overall": self.overall.value}


def _combine(*verdicts) -> Verdict:
    vs = [Verdict(v) for v in verdicts]
    if all(v is Verdict.HOLDS for v in vs):
        return Verdict.HOLDS
    if any(v is Verdict.VIOLATED for v in vs):
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


def _grid(top: LogRadius, bottom_ell1: Optional[float], n_max: int, per_octave: int = 4):
    """Radii ``top * 2^(-k/per_octave)``, ``k >= per_octave``, down to the bottom."""
    out = []
    step = math.log(2.0) / per_octave
    k = per_octave
    while len(out) < n_max:
        r = top.shift(k * step)
        if bottom_ell1 is not None and r.ell(1) > bottom_ell1 * (1 + 1e-12):
            break
        out.append(r)
        k += 1
    return out


def _log_doubling_excess(lam, c, beta, r: LogRadius, mult_log: float, threshold: float):
    """``ln(mult * c * (Lambda(r) - Lambda(2r))) - ln(threshold)``.

    ``mult_log`` is ``ln`` of an extra factor (``ln 8`` for the singular
    variant).  The difference is formed as
    ``Lambda(r) * (1 - exp(beta (lambda(2r) - lambda(r))))`` in logs.
    """
    r2 = r.scale(2.0)
    l1, l2 = lam(r), lam(r2)
    d = beta * (l2 - l1)
    if d >= 0:
        return -math.inf
    return mult_log + math.log(c) + beta * l1 + math.log(-math.expm1(d)) - math.log(threshold)


def _doubling(lam, c, beta, radii, factor_ln, singular=False):
    worst, wr = -math.inf, None
    for r in radii:
        if singular:
            # 8 (Lambda1(r) - Lambda1(2r)) with Lambda1 = exp(c Lambda)
            cl, cl2 = c * eval_Lambda(lam, beta, r), c * eval_Lambda(lam, beta, r.scale(2.0))
            if math.isinf(cl):
                ex = math.nan if math.isinf(cl2) else math.inf
            elif cl2 >= cl:
                ex = -math.inf
            else:
                ex = math.log(8.0) + cl + math.log(-math.expm1(cl2 - cl)) - math.log(factor_ln)
        else:
            ex = _log_doubling_excess(lam, c, beta, r, 0.0, factor_ln)
        if math.isnan(ex):
            return {"verdict": Verdict.INCONCLUSIVE.value, "worst_log_excess": None,
                    "witness_r": str(r), "grid_size": len(radii), "threshold": factor_ln}
        if ex > worst:
            worst, wr = ex, r
    verdict = Verdict.HOLDS if worst <= 1e-12 else Verdict.VIOLATED
    return {"verdict": verdict.value, "worst_log_excess": worst,
            "witness_r": None if wr is None else str(wr), "grid_size": len(radii),
            "threshold": factor_ln}


def _local_exponent(logf, u1: float, u2: float) -> float:
    """``-d ln f / d ln u`` by a secant between ``u1 < u2``."""
    return -(logf(u2) - logf(u1)) / (math.log(u2) - math.log(u1))


def _divergence_integral(lam, c, beta, ell_top: float, ell_bottom: float, pieces: int = 5):
    """Partial integrals of ``exp(-c Lambda(beta, r)) dr / r`` in ``u = ln(1/r)``."""

    def logf(u):
        return -c * eval_Lambda(lam, beta, LogRadius(1, u))

    def f(u):
        return math.exp(logf(u))

    span = ell_bottom - ell_top
    cuts = [ell_top + span * 2.0 ** (m - pieces) for m in range(pieces + 1)]
    partials, total, prev = [], 0.0, ell_top
    for cut in cuts:
        total += adaptive_simpson(f, prev, cut, rtol=1e-8)
        partials.append({"r_min": math.exp(-cut), "value": total})
        prev = cut
    u_end = ell_bottom
    a_end = _local_exponent(logf, 0.9 * u_end, u_end)
    a_mid = _local_exponent(logf, 0.45 * u_end, 0.5 * u_end) if 0.45 * u_end > ell_top else a_end
    growth = None
    if len(partials) >= 2 and partials[-2]["value"] > 0:
        growth = (math.log(partials[-1]["value"] / partials[-2]["value"])
                  / math.log((cuts[-1] - ell_top) / (cuts[-2] - ell_top)))
    tol = 1e-9
    if a_end <= 1 + tol and a_end <= a_mid + tol:
        verdict = Verdict.HOLDS
    elif a_end > 1 + tol and a_end >= a_mid - tol:
        verdict = Verdict.VIOLATED
    else:
        verdict = Verdict.INCONCLUSIVE
    return {"verdict": verdict.value, "truncation": math.exp(-ell_bottom),
            "partial": total, "partials": partials, "growth_exponent": growth,
            "tail_exponent": a_end, "tail_exponent_mid": a_mid}


def _vanishing(margins, ell2s):
    """Verdict from the log-log margins along a decreasing-radius grid."""
    m = np.asarray(margins, dtype=float)
    n = m.size
    tail = m[max(0, n - max(2, n // 4)):]
    e2 = np.asarray(ell2s, dtype=float)[max(0, n - max(2, n // 4)):]
    finite = np.isfinite(tail)
    with np.errstate(invalid="ignore"):
        diffs = np.diff(tail)
    diffs = diffs[np.isfinite(diffs)]
    slope = None
    if finite.sum() >= 2 and np.all(np.isfinite(e2[finite])) and e2[finite][-1] != e2[finite][0]:
        slope = float((tail[finite][-1] - tail[finite][0]) / (e2[finite][-1] - e2[finite][0]))
    last = float(tail[-1])
    tol = 1e-12 * max(1.0, float(np.max(np.abs(tail[np.isfinite(tail)]))) if finite.any() else 1.0)
    monotone = bool(np.all(diffs >= -tol))
    if last > 0 and monotone:
        verdict = Verdict.HOLDS
    elif last <= 0 and (slope is None or slope <= 0):
        verdict = Verdict.VIOLATED
    else:
        verdict = Verdict.INCONCLUSIVE
    return {"verdict": verdict.value, "margin_last": last,
            "margin_min": float(np.min(m)), "slope": slope, "tail_monotone": monotone}


def _require_domain(lam: LambdaSpec, r, what: str):
    if not lam.in_domain(r):
        raise UsageError(f"lambda domain does not reach {what} = {r}")


def _tail_margin(lam, c, beta, radii, one_minus_delta0):
    ms, e2 = [], []
    for r in radii:
        ell2 = r.ell(2)
        ms.append(ell2 + math.log(one_minus_delta0) - math.log(c) - eval_log_Lambda(lam, beta, r))
        e2.append(ell2)
    return ms, e2


def _check_lambda_common(criterion, lam, c, beta, top, r_min, one_minus_delta0):
    if not (c > 0 and beta > 0):
        raise DomainError("c and beta must be positive")
    if not 0 < r_min < top / 2:
        raise UsageError("need 0 < r_min < top/2")
    _require_domain(lam, top, "the top radius")
    _require_domain(lam, r_min, "r_min")
    top_lr = LogRadius.from_float(top)
    bottom = -math.log(r_min)
    radii = _grid(top_lr, bottom, n_max=100_000)
    doubling = _doubling(lam, c, beta, radii, one_minus_delta0 * LN_3_2)
    divergence = _divergence_integral(lam, c, beta, top_lr.ell(1), bottom)
    ms, e2 = _tail_margin(lam, c, beta, radii, one_minus_delta0)
    vanishing = _vanishing(ms, e2)
    vanishing["log_value_at_truncation"] = (c * eval_Lambda(lam, beta, LogRadius(1, bottom))
                                            - one_minus_delta0 * bottom)
    overall = _combine(doubling["verdict"], divergence["verdict"], vanishing["verdict"])
    return AdmissibilityReport(criterion, doubling, divergence, vanishing, None, overall)


def check_lambda_elliptic(lam: LambdaSpec, c: float, beta: float, rho0: float,
                          r_min: float = 1e-12) -> AdmissibilityReport:
    """Elliptic admissibility of ``lambda`` on ``(r_min, rho0)``.

    * doubling: ``c (Lambda(r) - Lambda(2r)) <= ln(3/2)`` on a quarter-dyadic
      grid below ``rho0 / 2``;
    * divergence of ``int exp(-c Lambda) dr/r``: partial integrals at
      successively smaller truncations plus the local decay exponent of
      the integrand in ``u = ln(1/r)`` (divergent when it stays <= 1);
    * ``r exp(c Lambda) -> 0``: the log-log margin
      ``ln ln(1/r) - ln c - beta lambda(r)`` must be positive and
      non-decreasing along the tail of the grid.
    """
    return _check_lambda_common("elliptic", lam, c, beta, rho0, r_min, 1.0)


def check_lambda_parabolic_degenerate(lam: LambdaSpec, c: float, beta: float, delta0: float,
                                      R: float, r_min: float = 1e-12) -> AdmissibilityReport:
    """Degenerate-case admissibility: the elliptic checks with the
    ``(3/2)^(1-delta0)`` doubling factor and ``r^(1-delta0)`` in the limit."""
    if not 0 < delta0 < 1:
        raise DomainError("delta0 must lie in (0, 1)")
    return _check_lambda_common("degenerate", lam, c, beta, R, r_min, 1.0 - delta0)


def check_lambda_parabolic_singular(lam: LambdaSpec, c: float, beta: float, cbar: float,
                                    delta0: float, rho, max_terms: int = 2000,
                                    n_grid: int = 256) -> AdmissibilityReport:
    """Singular-case admissibility for a float or :class:`LogRadius` ``rho``.

    Generates ``r_i = cbar r_(i-1) exp(-8 Lambda1(c, beta, r_(i-1)))`` in
    iterated-log form, sums ``exp(-8 Lambda1(r_i))`` and judges divergence
    by the decay exponent of the terms against the index.  The
    lower-bound chain ``S_j >= ln(ln(1/r_j)/ln(1/rho)) / ln(gamma0) * t_j``
    with ``gamma0 = 2 - delta0`` and the first-step bound
    ``r_1 >= rho^gamma0`` are reported under ``remark``.
    """
    if not 0 < delta0 < 1:
        raise DomainError("delta0 must lie in (0, 1)")
    if not (c > 0 and beta > 0 and cbar > 0):
        raise DomainError("c, beta and cbar must be positive")
    rho_lr = LogRadius.coerce(rho).normalized()
    _require_domain(lam, rho_lr, "rho")
    one_m = 1.0 - delta0
    radii = _grid(rho_lr, None, n_max=n_grid)
    radii = [r for r in radii if lam.in_domain(r)]

    # sequence r_i and partial sums
    seq = [rho_lr]
    log_terms, sums, incs = [], [], []
    S = 0.0
    D = 0.0
    termination = "max-terms"
    for i in range(max_terms):
        r = seq[-1]
        L1 = c * eval_Lambda(lam, beta, r)  # ln Lambda1
        eight_l1 = 8.0 * math.exp(L1) if L1 < 709.0 else math.inf
        if math.isinf(eight_l1):
            termination = "underflow"
            break
        log_terms.append(-eight_l1)
        S += math.exp(-eight_l1)
        sums.append(S)
        inc = eight_l1 - math.log(cbar)
        D += inc
        incs.append(D)
        seq.append(r.shift(inc))
    J = len(log_terms)
    if J < 8:
        divergence = {"verdict": Verdict.INCONCLUSIVE.value, "terms": J, "partial": S,
                      "termination": termination}
    else:
        def a_between(i1, i2):
            return -(log_terms[i2] - log_terms[i1]) / (math.log(i2 + 1) - math.log(i1 + 1))

        a_end = a_between(J // 2 - 1, J - 1)
        a_mid = a_between(J // 4 - 1, J // 2 - 1)
        growth = math.log(sums[-1] / sums[J // 2 - 1]) / math.log(J / (J // 2))
        tol = 1e-9
        if termination == "underflow" and sums[-1] == sums[J // 2 - 1]:
            verdict = Verdict.INCONCLUSIVE
        elif a_end <= 1 + tol and a_end <= a_mid + tol:
            verdict = Verdict.HOLDS
        elif a_end > 1 + tol and a_end >= a_mid - tol:
            verdict = Verdict.VIOLATED
        else:
            verdict = Verdict.INCONCLUSIVE
        divergence = {"verdict": verdict.value, "terms": J, "partial": S,
                      "growth_exponent": growth, "tail_exponent": a_end,
                      "tail_exponent_mid": a_mid, "termination": termination,
                      "truncation": str(seq[J - 1])}

    dbl = [r for r in radii + seq[:J] if lam.in_domain(r.scale(2.0))]
    doubling = _doubling(lam, c, beta, dbl, one_m * LN_3_2, singular=True)

    ms, e2 = [], []
    for r in radii:
        ell2 = r.ell(2)
        ms.append(ell2 + math.log(one_m) - math.log(8.0) - c * eval_Lambda(lam, beta, r))
        e2.append(ell2)
    vanishing = _vanishing(ms, e2)

    # first-step and chain bounds
    gamma0 = 2.0 - delta0
    ell1_0 = rho_lr.ell(1)
    first_inc = incs[0] if incs else math.inf
    r1_ok = first_inc <= one_m * ell1_0
    chain_ok, chain_ok_explicit, worst_gap = True, True, math.inf
    is_quad = lam.family.value == "quad_log"
    for j in range(1, J):
        lnratio = math.log1p(incs[j - 1] / ell1_0) if math.isfinite(ell1_0) else 0.0
        proxy = lnratio / math.log(gamma0) * math.exp(log_terms[j])
        if sums[j] < proxy * (1 - 1e-12):
            chain_ok = False
        worst_gap = min(worst_gap, sums[j] - proxy)
        if is_quad:
            ell3 = seq[j].ell(3)
            if sums[j] < lnratio / math.log(gamma0) / ell3 * (1 - 1e-12):
                chain_ok_explicit = False
    remark_ok = r1_ok and chain_ok and chain_ok_explicit
    remark = {"verdict": (Verdict.HOLDS if remark_ok else Verdict.VIOLATED).value,
              "gamma0": gamma0, "first_step_ok": bool(r1_ok),
              "first_step_log_increment": first_inc, "chain_ok": bool(chain_ok),
              "explicit_chain_ok": bool(chain_ok_explicit) if is_quad else None,
              "min_gap": worst_gap if J > 1 else None}
    overall = _combine(doubling["verdict"], divergence["verdict"], vanishing["verdict"])
    return AdmissibilityReport("singular", doubling, divergence, vanishing, remark, overall)
