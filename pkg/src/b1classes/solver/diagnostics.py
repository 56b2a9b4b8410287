"""Discrete diagnostics on solver output.

Integrals use midpoint quadrature over grid cells: the cell value of
``u`` is the mean of its four nodes and ``grad u`` is the average of the
two edge differences in each direction.  A cell belongs to ``B_rho``
when its center does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..conditions import Verdict
from ..errors import UsageError
from ..growth import GrowthSpec, LambdaSpec, eval_g
from ..iteration import IterationParams, elliptic_modulus
from .cutoff import CutoffSpec
from .grid import GridField, ball_mask, check_ball_inside


def measure_oscillation(field: GridField, center, radii: Sequence[float]):
    """``[(r, max - min over nodes in B_r(center))]`` for each radius.

    Raises
    ------
    UsageError
        If a ball leaves the grid or contains no node.
    """
    out = []
    for r in radii:
        if not r > 0:
            raise UsageError("radii must be positive")
        check_ball_inside(field, center, r)
        m = ball_mask(field, center, r)
        if not m.any():
            raise UsageError(f"ball of radius {r} contains no grid node")
        vals = field.values[m]
        out.append((float(r), float(vals.max() - vals.min())))
    return out


@dataclass
class CellData:
    xc: np.ndarray
    yc: np.ndarray
    u: np.ndarray
    grad: np.ndarray
    area: float


def cell_data(field: GridField) -> CellData:
    u = field.values
    uc = 0.25 * (u[:-1, :-1] + u[:-1, 1:] + u[1:, :-1] + u[1:, 1:])
    gx = 0.5 * ((u[:-1, 1:] - u[:-1, :-1]) + (u[1:, 1:] - u[1:, :-1])) / field.hx
    gy = 0.5 * ((u[1:, :-1] - u[:-1, :-1]) + (u[1:, 1:] - u[:-1, 1:])) / field.hy
    ox, oy = field.origin
    xs = ox + field.hx * (np.arange(field.nx) + 0.5)
    ys = oy + field.hy * (np.arange(field.ny) + 0.5)
    X, Y = np.meshgrid(xs, ys)
    return CellData(X, Y, uc, np.hypot(gx, gy), field.hx * field.hy)


def _ball_cells(cd: CellData, center, rho):
    return np.hypot(cd.xc - center[0], cd.yc - center[1]) <= rho * (1 + 1e-12)


# --------------------------------------------------------------------------
# minimal K1 estimate

@dataclass(frozen=True)
class K1SamplePlan:
    """Deterministic level/parameter design of :func:`estimate_K1`."""

    n_levels: int = 8
    eps: tuple = (1.0, 0.5, 0.1)
    sigmas: tuple = (0.25, 0.5)
    c4: float = 1.0
    c5: float = 1.0
    c6: float = 1.0
    rtol: float = 1e-10


@dataclass
class K1Report:
    k1: Optional[float]
    verdict: Verdict
    samples: List[dict] = field(default_factory=list)
    gated: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"type": "k1_estimate", "k1": self.k1, "verdict": self.verdict.value,
                "gated": self.gated, "details": self.details, "samples": self.samples}


def _level_sets(cd, ball, zeta, exponent, level, side):
    """Left side, strip mask, super/sub-level mask and truncation ``w``."""
    k, l = level
    uc = cd.u
    if side == "plus":
        strip = ball & (uc > k) & (uc <= l)
        big = ball & (uc > k)
        w = np.where(big, uc - k, 0.0)
    else:
        strip = ball & (uc < l) & (uc >= k)
        big = ball & (uc < l)
        w = np.where(big, l - uc, 0.0)
    lhs = float(np.sum(cd.grad[strip] * zeta[strip] ** exponent) * cd.area)
    return lhs, strip, big, w


def estimate_K1(field: GridField, spec: GrowthSpec, cutoff: CutoffSpec,
                plan: Optional[K1SamplePlan] = None, lam: Optional[LambdaSpec] = None,
                t: float = 0.0) -> K1Report:
    """Smallest ``K1`` for which the discrete level-set energy inequalities hold.

    For every sampled ``(k, l, eps, sigma)`` and each sign the least
    ``K1 >= 0`` with

    ``int_{strip} |grad u| zeta^c3 <= K1 e^(c4 lambda(rho)) / eps * M/rho * |strip|
    + K1 eps^c5 sigma^-c6 / g(x0, M/rho) * int g(x, K1 w / (sigma rho zeta)) w/rho zeta^(c3-1)``

    is found by bracketing and bisection (the right side is non-decreasing
    in ``K1`` because ``g`` is).  ``M`` is ``M_+(k, rho)`` or ``M_-(l, rho)``
    and ``w`` the matching truncation; levels with ``M < rho`` and levels
    with ``|k|`` or ``|l|`` not below ``sup |u|`` are skipped.  Cells where
    ``zeta = 0`` contribute nothing to the second integral (the test
    function vanishes there).  ``cutoff.exponent`` plays ``c3``.

    Returns
    -------
    K1Report
        ``k1`` is the maximum over samples; the verdict is ``inconclusive``
        with ``k1 = None`` when no level passes the gating, and ``k1 = 0``
        when the discrete gradient vanishes on the ball.
    """
    plan = plan or K1SamplePlan()
    center, rho = cutoff.center, cutoff.radius
    check_ball_inside(field, center, rho)
    cd = cell_data(field)
    ball = _ball_cells(cd, center, rho)
    if not ball.any():
        raise UsageError("cutoff ball contains no grid cell")
    if not np.any(cd.grad[ball] > 0):
        # every left side vanishes, so K1 = 0 satisfies all inequalities
        return K1Report(0.0, Verdict.HOLDS, [], 0,
                        {"reason": "gradient vanishes on the ball", "rho": rho,
                         "center": list(center), "c3": cutoff.exponent, "kind": cutoff.kind})
    node_ball = ball_mask(field, center, rho)
    u_nodes = field.values[node_ball]
    M_all = float(np.abs(field.values).max())
    lam_rho = lam(rho) if lam is not None else 0.0
    qs = np.linspace(0.0, 1.0, plan.n_levels + 3)[1:-1]
    levels = np.quantile(cd.u[ball], qs)
    x0 = np.asarray(center, dtype=float)
    samples, gated = [], 0
    for a, b in zip(levels[:-1], levels[1:]):
        k, l = float(a), float(b)
        if not k < l or not (abs(k) < M_all and abs(l) < M_all):
            gated += 1
            continue
        for side in ("plus", "minus"):
            Mpm = float(np.max(u_nodes - k)) if side == "plus" else float(np.max(l - u_nodes))
            if not Mpm >= rho:
                gated += 1
                continue
            g_ref = float(eval_g(spec, x0, t, Mpm / rho))
            for sigma in plan.sigmas:
                z = cutoff.with_(sigma=sigma)
                zeta = z(cd.xc, cd.yc)
                for eps in plan.eps:
                    rec = _one_sample(spec, cd, ball, zeta, z, k, l, side, eps, sigma, Mpm, g_ref,
                                      lam_rho, plan, t)
                    samples.append(rec)
    if not samples:
        return K1Report(None, Verdict.INCONCLUSIVE, [], gated,
                        {"reason": "no admissible levels", "rho": rho})
    k1 = max(s["k1"] for s in samples)
    return K1Report(k1, Verdict.HOLDS if math.isfinite(k1) else Verdict.VIOLATED, samples, gated,
                    {"rho": rho, "center": list(center), "M": M_all, "c3": cutoff.exponent,
                     "kind": cutoff.kind, "lambda_rho": lam_rho})


def k1_sides(spec, field, cutoff, k, l, side, eps, sigma, K, plan=None, lam=None, t=0.0):
    """Both sides of one sampled inequality at a given ``K`` (for inspection and tests)."""
    plan = plan or K1SamplePlan()
    cd = cell_data(field)
    ball = _ball_cells(cd, cutoff.center, cutoff.radius)
    z = cutoff.with_(sigma=sigma)
    zeta = z(cd.xc, cd.yc)
    u_nodes = field.values[ball_mask(field, cutoff.center, cutoff.radius)]
    Mpm = float(np.max(u_nodes - k)) if side == "plus" else float(np.max(l - u_nodes))
    g_ref = float(eval_g(spec, np.asarray(cutoff.center, float), t, Mpm / cutoff.radius))
    lam_rho = lam(cutoff.radius) if lam is not None else 0.0
    lhs, rhs = _sides(spec, cd, ball, zeta, z, k, l, side, eps, sigma, Mpm, g_ref, lam_rho, plan, t)
    return lhs, rhs(K)


def _sides(spec, cd, ball, zeta, z, k, l, side, eps, sigma, Mpm, g_ref, lam_rho, plan, t):
    rho, c3 = z.radius, z.exponent
    lhs, strip, big, w = _level_sets(cd, ball, zeta, c3, (k, l), side)
    t1 = math.exp(plan.c4 * lam_rho) / eps * Mpm / rho * float(strip.sum()) * cd.area
    sel = big & (zeta > 0) & (w > 0)
    pts = np.stack([cd.xc[sel], cd.yc[sel]], axis=-1)
    wz = w[sel]
    zz = zeta[sel]
    pref = eps ** plan.c5 * sigma ** (-plan.c6) / g_ref

    def rhs(K):
        if K <= 0:
            return 0.0
        second = 0.0
        if wz.size:
            gv = np.asarray(eval_g(spec, pts, t, K * wz / (sigma * rho * zz)), dtype=float)
            second = pref * float(np.sum(gv * wz / rho * zz ** (c3 - 1.0))) * cd.area
        return K * t1 + K * second

    return lhs, rhs


def _one_sample(spec, cd, ball, zeta, z, k, l, side, eps, sigma, Mpm, g_ref, lam_rho, plan, t):
    lhs, rhs = _sides(spec, cd, ball, zeta, z, k, l, side, eps, sigma, Mpm, g_ref, lam_rho, plan, t)
    rec = {"k": k, "l": l, "side": side, "eps": eps, "sigma": sigma, "M": Mpm, "lhs": lhs}
    if lhs <= 0.0:
        rec["k1"] = 0.0
        return rec
    lo, hi = 0.0, 1.0
    doublings = 0
    while rhs(hi) < lhs:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > 2000:
            rec["k1"] = math.inf
            return rec
    while hi - lo > plan.rtol * hi:
        mid = 0.5 * (lo + hi)
        if rhs(mid) >= lhs:
            hi = mid
        else:
            lo = mid
    rec["k1"] = hi
    return rec


# --------------------------------------------------------------------------
# De Giorgi-Poincare check

@dataclass
class PoincareReport:
    lhs: float
    rhs_core: float
    implied_constant: Optional[float]
    verdict: Verdict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"type": "dg_poincare", "lhs": self.lhs, "rhs_core": self.rhs_core,
                "implied_constant": self.implied_constant, "verdict": self.verdict.value,
                "details": self.details}


def check_dg_poincare(field: GridField, center, rho: float, k: float, l: float,
                      side: str = "minus", n: int = 2) -> PoincareReport:
    """Both sides of the level-set isoperimetric inequality on ``B_rho``.

    For ``side="minus"``::

        lhs      = (l - k) |A-_k|^(1 - 1/n)
        rhs_core = rho^n / |B \\ A-_l| * int_{A-_l \\ A-_k} |grad u|

    and symmetrically for ``"plus"``.  The implied constant is
    ``lhs / rhs_core``; when ``|B \\ A-_l|`` vanishes the inequality is
    vacuous and the verdict is ``inconclusive``.
    """
    if not k < l:
        raise UsageError("need k < l")
    if side not in ("minus", "plus"):
        raise UsageError("side must be 'minus' or 'plus'")
    check_ball_inside(field, center, rho)
    cd = cell_data(field)
    ball = _ball_cells(cd, center, rho)
    if not ball.any():
        raise UsageError("ball contains no grid cell")
    u = cd.u
    if side == "minus":
        small = ball & (u < k)
        comp = ball & ~(u < l)
        strip = ball & (u < l) & ~(u < k)
    else:
        small = ball & (u > l)
        comp = ball & ~(u > k)
        strip = ball & (u > k) & ~(u > l)
    lhs = (l - k) * (float(small.sum()) * cd.area) ** (1.0 - 1.0 / n)
    denom = float(comp.sum()) * cd.area
    integral = float(cd.grad[strip].sum()) * cd.area
    details = {"k": k, "l": l, "side": side, "rho": rho, "measure_small": float(small.sum()) * cd.area,
               "measure_complement": denom, "strip_integral": integral}
    if denom == 0.0:
        return PoincareReport(lhs, math.nan, None, Verdict.INCONCLUSIVE, details)
    rhs_core = rho ** n / denom * integral
    if lhs == 0.0:
        return PoincareReport(0.0, rhs_core, 0.0, Verdict.HOLDS, details)
    if rhs_core == 0.0:
        return PoincareReport(lhs, 0.0, math.inf, Verdict.VIOLATED, details)
    return PoincareReport(lhs, rhs_core, lhs / rhs_core, Verdict.HOLDS, details)


# --------------------------------------------------------------------------
# empirical modulus

@dataclass
class ModulusReport:
    radii: List[float]
    osc: List[List[float]]
    monotone: List[bool]
    slope: Optional[float]
    status: str
    gamma_min: Optional[float]
    bound: List[float] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"type": "empirical_modulus", "radii": self.radii, "osc": self.osc,
                "monotone": self.monotone, "slope": self.slope, "status": self.status,
                "gamma_min": self.gamma_min, "bound": self.bound, "details": self.details}


def empirical_modulus(fields: Sequence[GridField], center, radii: Sequence[float],
                      params: Optional[IterationParams] = None, lam: Optional[LambdaSpec] = None,
                      rho: Optional[float] = None, omega0: Optional[float] = None,
                      gamma_max: float = 1e12, mono_tol: float = 0.0) -> ModulusReport:
    """Measured oscillation decay versus the stationary modulus bound.

    Oscillations are measured on every field (coarse to fine); the slope of
    ``log osc`` against ``log r`` and the comparison with
    :func:`elliptic_modulus` use the last (finest) field.  ``rho`` defaults
    to twice the largest radius, ``omega0`` to ``2 max |u|``.
    ``gamma_min`` is the smallest ``gamma >= 1`` (to relative 1e-6) for
    which the bound is at least the measured oscillation at every radius,
    found by doubling then bisection; ``None`` when ``gamma_max`` does not
    suffice.
    """
    if len(radii) < 2:
        raise UsageError("need at least two radii")
    if not fields:
        raise UsageError("need at least one field")
    radii = sorted(float(r) for r in radii)
    params = params or IterationParams()
    if lam is None:
        from ..growth import LambdaFamily
        lam = LambdaSpec(LambdaFamily.CONSTANT, 0.0)
    curves, mono = [], []
    for f in fields:
        osc = [o for _, o in measure_oscillation(f, center, radii)]
        curves.append(osc)
        mono.append(all(b >= a - mono_tol for a, b in zip(osc, osc[1:])))
    fine = curves[-1]
    # oscillations at roundoff level carry no slope information
    noise = 1e-12 * max(1.0, float(np.abs(fields[-1].values).max()))
    pos = [(r, o) for r, o in zip(radii, fine) if o > noise]
    if len(pos) < 2:
        status, slope = "zero oscillation", None
    else:
        lr = np.log([r for r, _ in pos])
        lo = np.log([o for _, o in pos])
        slope = float(np.polyfit(lr, lo, 1)[0])
        status = "monotone" if mono[-1] else "non-monotone"
    rho = 2.0 * radii[-1] if rho is None else float(rho)
    M = float(np.abs(fields[-1].values).max())
    om0 = 2.0 * M if omega0 is None else float(omega0)
    p_bound = params.with_(M=max(M, 1e-300))

    def bounds(g):
        pg = p_bound.with_(gamma=g)
        return [elliptic_modulus(om0, rho, r, pg, lam) for r in radii]

    def dominates(g):
        return all(b >= o for b, o in zip(bounds(g), fine))

    gamma_min = None
    if dominates(1.0):
        gamma_min = 1.0
    else:
        lo_g, hi_g = 1.0, 2.0
        while hi_g <= gamma_max and not dominates(hi_g):
            lo_g, hi_g = hi_g, 2.0 * hi_g
        if hi_g <= gamma_max:
            while hi_g - lo_g > 1e-6 * hi_g:
                mid = 0.5 * (lo_g + hi_g)
                if dominates(mid):
                    hi_g = mid
                else:
                    lo_g = mid
            gamma_min = hi_g
    bnd = bounds(gamma_min) if gamma_min is not None else []
    return ModulusReport(radii, curves, mono, slope, status, gamma_min, bnd,
                         {"rho": rho, "omega0": om0, "c": params.c, "beta": params.beta,
                          "s0": params.s0})
