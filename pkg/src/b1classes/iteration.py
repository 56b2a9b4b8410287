"""Iteration constants and oscillation-decay recursions.

The generic constant ``gamma`` of the regularity estimates is not
computable from the structural data, so it is a user knob (default 1)
carried in :class:`IterationParams` and echoed in every trace header.
Traces describe the *shape* of the modulus of continuity, not calibrated
absolute values.

Quantities of the form ``exp(c exp(...))`` are handled through their
logarithms; rows carry both the linear value (possibly ``0`` or ``inf``)
and its natural log together with a flag when the linear value is not
representable.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional

from .errors import DomainError, UsageError
from .growth import GrowthSpec, LambdaSpec, eval_psi
from .logradius import LogRadius
from .quadrature import adaptive_simpson

log = logging.getLogger(__name__)

LOG_TINY = -700.0
LOG_HUGE = 700.0


def eval_Lambda(lam: LambdaSpec, beta: float, r) -> float:
    """``exp(beta lambda(r))`` for ``beta >= 0`` (``inf`` on overflow)."""
    x = beta * lam(r) if beta else 0.0
    return math.inf if x > 709.78 else math.exp(x)


def _exp_flag(x: float):
    """``(exp(x), flag)`` with flag marking values kept only in log form."""
    if x < LOG_TINY:
        return (0.0 if x < -745.1 else math.exp(x)), "log-underflow"
    if x > LOG_HUGE:
        return (math.inf if x > 709.78 else math.exp(x)), "log-overflow"
    return math.exp(x), ""


@dataclass(frozen=True)
class IterationParams:
    """Structural data and knobs of the iteration machinery.

    Every threshold that the formulas would compute can be overridden by
    setting the corresponding field (``nu1``, ``sigma0``).  ``delta_bar``
    defaults to ``max(delta/delta0, 1+delta, 1+delta0) + 0.5`` which meets
    both lower bounds required by the degenerate and singular drivers.
    """

    n: int = 2
    gamma: float = 1.0
    c: float = 1.0
    beta: float = 1.0
    cbar: float = 1.0
    c0: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c10: float = 1.0
    delta0: float = 0.5
    delta: float = 0.0
    delta_bar: Optional[float] = None
    M: float = 1.0
    s0: float = 0.0
    b0: float = 0.0
    xi: float = 0.5
    a: float = 0.5
    alpha: float = 0.5
    nu: float = 0.5
    nu1: Optional[float] = None
    nu2: float = 0.5
    nubar: float = 1.0
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    mu3: Optional[float] = None
    gamma0: float = 2.0
    R: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if not self.gamma >= 1:
            raise DomainError("gamma must be >= 1")
        if not 0 < self.delta0 < 1:
            raise DomainError("delta0 must lie in (0, 1)")
        for name in ("xi", "a", "alpha"):
            if not 0 < getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in (0, 1)")
        for name in ("c", "beta", "cbar", "c4", "c5", "c10", "M", "nubar", "nu2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.c0 < 0 or self.s0 < 0 or self.b0 < 0 or self.delta < 0:
            raise DomainError("c0, s0, b0 and delta must be >= 0")
        if not 0 < self.nu <= 1:
            raise DomainError("nu must lie in (0, 1]")
        if not self.gamma0 >= 1:
            raise DomainError("gamma0 must be >= 1")
        if self.delta_bar is None:
            object.__setattr__(self, "delta_bar", self.default_delta_bar())
        lower = max(self.delta / self.delta0, 1 + self.delta, 1 + self.delta0)
        if not self.delta_bar > lower:
            raise DomainError(f"delta_bar must exceed {lower}")

    def default_delta_bar(self) -> float:
        return max(self.delta / self.delta0, 1 + self.delta, 1 + self.delta0) + 0.5

    def with_(self, **kw) -> "IterationParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TraceRow:
    j: int
    radius: float
    log_radius: float
    omega: float
    log_omega: float
    theta: Optional[float] = None
    theta_tilde: Optional[float] = None
    floor: Optional[float] = None
    factor: Optional[float] = None
    flags: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class IterationTrace:
    """Rows of a recursion plus its termination reason and header data."""

    kind: str
    rows: List[TraceRow]
    termination: str
    header: dict = field(default_factory=dict)
    final_bound: Optional[float] = None

    CSV_COLUMNS = ("j", "radius", "log_radius", "omega", "log_omega", "theta", "floor", "log_flags")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.j, _num(r.radius), _num(r.log_radius), _num(r.omega),
                        _num(r.log_omega), _num(r.theta), _num(r.floor), r.flags])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"type": "trace", "kind": self.kind, "termination": self.termination,
                "header": dict(self.header), "final_bound": self.final_bound,
                "rows": [r.to_dict() for r in self.rows]}

    @property
    def omegas(self):
        return [r.omega for r in self.rows]

    @property
    def radii(self):
        return [r.radius for r in self.rows]


def _num(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


# --------------------------------------------------------------------------
# fast geometric convergence

@dataclass
class DeGiorgiResult:
    nu: float
    trace: IterationTrace
    bounds: List[float]
    log_values: List[float]
    converged: bool


def degiorgi_nu(c: float, b: float, delta: float) -> float:
    """Threshold ``nu = c^(-1/delta) b^(-1/delta^2)`` as used by :func:`degiorgi_lemma`."""
    return math.exp(-math.log(c) / delta - math.log(b) / delta ** 2)


def degiorgi_lemma(c: float, b: float, delta: float, y0: float, jmax: int = 40) -> DeGiorgiResult:
    """Iterate the extremal recursion ``y_(j+1) = c b^j y_j^(1+delta)``.

    With ``nu = c^(-1/delta) b^(-1/delta^2)`` the substitution
    ``y_j = nu b^(-j/delta) z_j`` turns the recursion into
    ``z_(j+1) = z_j^(1+delta)``, which is iterated in log form.  Iterating
    ``y`` directly would amplify the rounding of ``y_0`` by ``(1+delta)^j``.
    The closed-form bound
    ``c^(((1+delta)^j-1)/delta) b^(((1+delta)^j-1)/delta^2 - j/delta) y0^((1+delta)^j)``
    is evaluated in the algebraically equal form
    ``nu b^(-j/delta) (y0/nu)^((1+delta)^j)``.

    Returns
    -------
    DeGiorgiResult
        ``converged`` is True when ``y0 <= nu`` (then ``y_j -> 0``).
    """
    for name, val in (("c", c), ("b", b)):
        if not (math.isfinite(val) and val > 1):
            raise DomainError(f"{name} must be finite and > 1")
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError("delta must be finite and positive")
    if not (math.isfinite(y0) and y0 >= 0):
        raise DomainError("y0 must be finite and >= 0")
    ln_c, ln_b = math.log(c), math.log(b)
    ln_nu = -ln_c / delta - ln_b / delta ** 2
    nu = degiorgi_nu(c, b, delta)
    rows, bounds, logs = [], [], []
    termination = "max-iter"
    if y0 == 0:
        for j in range(jmax + 1):
            rows.append(TraceRow(j, math.nan, math.nan, 0.0, -math.inf))
            bounds.append(0.0)
            logs.append(-math.inf)
        tr = IterationTrace("degiorgi-y", rows, "converged", {"c": c, "b": b, "delta": delta, "nu": nu})
        return DeGiorgiResult(nu, tr, bounds, logs, True)
    ratio = y0 / nu
    ln_z = math.log(ratio) if ratio != 1.0 else 0.0
    for j in range(jmax + 1):
        ln_y = ln_nu - j * ln_b / delta + ln_z
        y, flag = _exp_flag(ln_y)
        growth = (1.0 + delta) ** j if j < 10_000 else math.inf
        ln_bound = ln_nu - j * ln_b / delta + (growth * math.log(ratio) if ratio != 1.0 else 0.0)
        bnd, _ = _exp_flag(ln_bound) if math.isfinite(ln_bound) else (
            (0.0 if ln_bound < 0 else math.inf), "")
        if math.isinf(ln_y) or math.isnan(ln_y):
            termination = "underflow" if ln_y < 0 else "overflow"
            break
        rows.append(TraceRow(j, math.nan, math.nan, y, ln_y, flags=flag))
        bounds.append(bnd)
        logs.append(ln_y)
        ln_z = (1.0 + delta) * ln_z
    converged = ratio <= 1.0
    if converged and termination == "max-iter":
        termination = "converged"
    tr = IterationTrace("degiorgi-y", rows, termination,
                        {"c": c, "b": b, "delta": delta, "nu": nu, "y0": y0})
    return DeGiorgiResult(nu, tr, bounds, logs, converged)


# --------------------------------------------------------------------------
# elliptic constants and recursion

def elliptic_thresholds(params: IterationParams, lam: Optional[LambdaSpec] = None, r: float = None) -> dict:
    """``nu1 = gamma^-1 (1-a)^n``, ``beta = 2 c4 (n-1)(c5+1)/(n c5)`` and

    ``j* = 2 + log2(1/xi) + (gamma/nu1)^((n-1)(c5+1)/(n c5)) e^(beta lambda(r/4))``.

    ``params.nu1`` overrides the computed ``nu1``.  ``lam`` defaults to
    ``lambda = 0``; ``r`` is needed only for non-constant moduli.
    """
    n, g = params.n, params.gamma
    nu1 = params.nu1 if params.nu1 is not None else (1.0 - params.a) ** n / g
    expo = (n - 1) * (params.c5 + 1) / (n * params.c5)
    beta = 2.0 * params.c4 * expo
    lam_val = 0.0
    if lam is not None:
        if r is None:
            if lam.family.value != "constant":
                raise UsageError("radius r is required for a non-constant lambda")
            r = 1.0
        lam_val = lam(r / 4.0)
    jstar = 2.0 + math.log2(1.0 / params.xi) + (g / nu1) ** expo * math.exp(beta * lam_val)
    return {"nu1": nu1, "jstar": jstar, "beta": beta}


def _integral_dt_over_t(lam, c, beta, lo, hi) -> float:
    """``int_lo^hi exp(-c Lambda(beta, t)) dt / t`` via ``s = ln t``."""
    if hi <= lo:
        return 0.0

    def f(s):
        return math.exp(-c * eval_Lambda(lam, beta, math.exp(s)))

    return adaptive_simpson(f, math.log(lo), math.log(hi), rtol=1e-8)


def elliptic_modulus(omega0: Optional[float], rho: float, r: float, params: IterationParams,
                     lam: LambdaSpec) -> float:
    """Oscillation bound on ``B_r``::

        omega0 exp(-gamma int_{2r}^{rho} exp(-c Lambda(beta,t)) dt/t)
            + gamma (1 + s0) rho exp(c Lambda(beta, rho))

    ``omega0`` defaults to ``2 M``.  ``2 r = rho`` gives the empty integral;
    ``2 r > rho`` is rejected.
    """
    if not (r > 0 and rho > 0):
        raise UsageError("radii must be positive")
    if 2 * r > rho * (1 + 1e-15):
        raise UsageError("need 2r <= rho")
    omega0 = 2.0 * params.M if omega0 is None else float(omega0)
    I = _integral_dt_over_t(lam, params.c, params.beta, 2 * r, rho)
    return (omega0 * math.exp(-params.gamma * I)
            + params.gamma * (1 + params.s0) * rho * math.exp(params.c * eval_Lambda(lam, params.beta, rho)))


def elliptic_oscillation_trace(omega0: float, rho: float, params: IterationParams, lam: LambdaSpec,
                               jmax: int = 50, include_floor: bool = True) -> IterationTrace:
    """Iterate ``omega_(j+1) = (1 - exp(-gamma Lambda(beta, rho_j))) omega_j + floor_j``

    on ``rho_j = 2^-j rho`` with
    ``floor_j = gamma (1 + s0) rho_j exp(gamma Lambda(beta, rho_j))``
    (omitted when ``include_floor`` is False).  Termination is
    ``floor-reached`` once the additive term has dominated the contracted
    term at some step, else ``max-iter``.
    """
    if omega0 < 0:
        raise DomainError("omega0 must be >= 0")
    if omega0 > 2 * params.M * (1 + 1e-12):
        raise DomainError("omega0 must not exceed 2M")
    g, beta = params.gamma, params.beta
    rows = []
    omega = float(omega0)
    dominated_at = None
    for j in range(jmax + 1):
        rho_j = rho * 2.0 ** (-j)
        if rho_j == 0.0:
            term = "underflow"
            break
        Lam = eval_Lambda(lam, beta, rho_j)
        x = g * Lam
        factor = -math.expm1(-x)  # 1 - exp(-x)
        floor = g * (1 + params.s0) * rho_j * math.exp(x) if include_floor else 0.0
        flags = "floor" if include_floor and floor >= factor * omega else ""
        rows.append(TraceRow(j, rho_j, math.log(rho_j), omega, math.log(omega) if omega > 0 else -math.inf,
                             floor=floor if include_floor else None, factor=x, flags=flags))
        if flags and dominated_at is None:
            dominated_at = j
        omega = factor * omega + floor
    else:
        term = "floor-reached" if dominated_at is not None else "max-iter"
    header = {"gamma": g, "beta": beta, "c": params.c, "s0": params.s0, "rho": rho,
              "omega0": omega0, "include_floor": include_floor, "floor_first": dominated_at}
    return IterationTrace("elliptic-osc", rows, term, header)


def product_bound_holds(trace: IterationTrace) -> bool:
    """``prod (1 - e^-x_i) <= exp(-sum e^-x_i)`` along an elliptic trace."""
    lhs = 0.0
    rhs = 0.0
    for row in trace.rows:
        x = row.factor
        lhs += math.log(-math.expm1(-x)) if x > 0 else -math.inf
        rhs -= math.exp(-x)
        if lhs > rhs + 1e-15 * max(1.0, abs(rhs)):
            return False
    return True


# --------------------------------------------------------------------------
# degenerate parabolic case

def degenerate_betas(params: IterationParams, mu1: float, mu2: float) -> dict:
    """``beta0 = c0(n+2)/mu1``, ``beta1 = c0(2n+3 + (1+(3+mu2)(2n+3))/(mu1-1))``,
    ``beta2 = c0(5n+8)(c4+1)/c4``."""
    n, c0 = params.n, params.c0
    if mu1 is None or mu1 <= 0:
        raise DomainError("mu1 must be positive")
    beta0 = c0 * (n + 2) / mu1
    beta2 = c0 * (5 * n + 8) * (params.c4 + 1) / params.c4
    if mu1 <= 1:
        beta1 = math.nan
    else:
        beta1 = c0 * (2 * n + 3 + (1 + (3 + mu2) * (2 * n + 3)) / (mu1 - 1))
    return {"beta0": beta0, "beta1": beta1, "beta2": beta2}


def parabolic_degenerate_thresholds(params: IterationParams, lam: LambdaSpec, rho: float,
                                    mu1: Optional[float] = None, mu2: Optional[float] = None) -> dict:
    """Chained counters of the degenerate alternative.

    In order::

        n sigma = (nubar^2/16) e^(-2 c0 (2n+3) lambda)
        gamma sigma^(-1-mu2) 2^(-s(mu1-1)) e^(c0 lambda) = (nubar^2/16) e^(-2 c0 (2n+3) lambda)
        2^(-s1) = 2^(-s) [1 - (1 + (nubar^2/2) e^(-c0(2n+3) lambda))^(-1/2)]
        s_lower = s1 + gamma e^(beta2 lambda)
        2^(s_upper) = gamma 2^(s_lower) e^(beta0 lambda)

    Raises
    ------
    DomainError
        If ``mu1 <= 1`` (``beta1`` and the choice of ``s`` are singular).
    """
    mu1 = params.mu1 if mu1 is None else mu1
    mu2 = params.mu2 if mu2 is None else mu2
    if mu1 is None or mu2 is None:
        raise UsageError("mu1 and mu2 are required")
    if mu1 <= 1:
        raise DomainError("regime violation: mu1 <= 1 makes beta1 singular")
    n, c0, g, nb = params.n, params.c0, params.gamma, params.nubar
    lv = lam(rho)
    betas = degenerate_betas(params, mu1, mu2)
    target = nb ** 2 / 16.0 * math.exp(-2 * c0 * (2 * n + 3) * lv)
    sigma = target / n
    # gamma sigma^(-1-mu2) e^(c0 lv) / target = 2^(s(mu1-1))
    s = (math.log(g) - (1 + mu2) * math.log(sigma) + c0 * lv - math.log(target)) / ((mu1 - 1) * math.log(2))
    A = nb ** 2 / 2.0 * math.exp(-c0 * (2 * n + 3) * lv)
    bracket = -math.expm1(-0.5 * math.log1p(A))  # 1 - (1+A)^(-1/2)
    s1 = s - math.log2(bracket)
    s_lower = s1 + g * math.exp(betas["beta2"] * lv)
    s_upper = math.log2(g) + s_lower + betas["beta0"] * lv / math.log(2)
    return {"sigma": sigma, "s": s, "s1": s1, "s_lower_star": s_lower,
            "s_upper_star": s_upper, "nubar": nb, **betas}


def parabolic_degenerate_trace(omega0: float, rho: float, params: IterationParams, lam: LambdaSpec,
                               jmax: int = 30, spec: Optional[GrowthSpec] = None,
                               admissibility=None) -> IterationTrace:
    """Iterate ``omega_(j+1) = (1 - exp(-gamma Lambda(beta, r_j))/2) omega_j``

    on ``r_j = rho / 8^(j+1)``.  Each row carries
    ``floor_j = 4 (1 + b0) r_j^(1-delta0) exp(gamma Lambda(beta, r_j))`` and,
    when ``spec`` is given, ``theta_j = r_j^2 / psi(x0, t0, omega_j / (4 r_j))``.
    The closing bound
    ``omega0 exp(-gamma int_{2 r_J}^{rho} exp(-gamma Lambda) ds/s)
    + gamma (1+b0) rho^(1-delta0) exp(gamma Lambda(beta, rho))`` is stored in
    ``final_bound``.  When ``omega_j / (4 r_j)`` is not above the threshold
    ``b0 R^-delta`` of the psi conditions the trace stops with
    ``floor-reached``.
    """
    if omega0 < 0:
        raise DomainError("omega0 must be >= 0")
    if admissibility is not None and getattr(admissibility, "overall", None) is not None:
        if admissibility.overall.value != "holds":
            log.warning("degenerate trace requested for a lambda that is not admissible")
    g, beta, b0, d0 = params.gamma, params.beta, params.b0, params.delta0
    thr = 0.0
    if spec is not None:
        R = params.R if params.R is not None else spec.R
        if spec.delta > 0:
            if R is None:
                raise UsageError("R must be set when delta > 0")
            thr = spec.b0 * R ** (-spec.delta)
        else:
            thr = spec.b0
        x0 = spec.x0
    rows = []
    omega = float(omega0)
    term = "max-iter"
    for j in range(jmax + 1):
        r_j = rho / 8.0 ** (j + 1)
        if r_j == 0.0:
            term = "underflow"
            break
        x = g * eval_Lambda(lam, beta, r_j)
        floor = 4 * (1 + b0) * r_j ** (1 - d0) * math.exp(x)
        theta = None
        flags = []
        if omega <= floor:
            flags.append("floor")
        if spec is not None:
            arg = omega / (4 * r_j)
            if not arg > thr:
                rows.append(TraceRow(j, r_j, math.log(r_j), omega,
                                     math.log(omega) if omega > 0 else -math.inf,
                                     None, None, floor, x, "|".join(flags + ["below-threshold"])))
                term = "floor-reached"
                break
            theta = r_j ** 2 / eval_psi(spec, x0, spec.t0, arg)
        rows.append(TraceRow(j, r_j, math.log(r_j), omega, math.log(omega) if omega > 0 else -math.inf,
                             theta, None, floor, x, "|".join(flags)))
        omega = (1.0 - 0.5 * math.exp(-x)) * omega
    if term == "max-iter" and rows and "floor" in rows[-1].flags:
        term = "floor-reached"
    header = {"gamma": g, "beta": beta, "b0": b0, "delta0": d0, "rho": rho, "omega0": omega0}
    if params.mu1 is not None and params.mu2 is not None:
        header.update(degenerate_betas(params, params.mu1, params.mu2))
    tr = IterationTrace("parabolic-degenerate-osc", rows, term, header)
    if rows:
        rJ = rows[-1].radius
        I = _integral_dt_over_t(lam, g, beta, min(2 * rJ, rho), rho)
        tr.final_bound = (omega0 * math.exp(-g * I)
                          + g * (1 + b0) * rho ** (1 - d0) * math.exp(g * eval_Lambda(lam, beta, rho)))
    return tr


def ratio_monotone(trace: IterationTrace) -> bool:
    """``omega_j / r_j`` is non-decreasing along the trace."""
    prev = -math.inf
    for r in trace.rows:
        q = r.omega / r.radius
        if q < prev * (1 - 1e-14):
            return False
        prev = q
    return True


# --------------------------------------------------------------------------
# singular parabolic case

def jstar_from_sigma0(sigma0: float, target_log: float) -> int:
    """Smallest ``j >= 1`` with ``j ln(1 - sigma0) <= target_log``.

    The ceiling of the log ratio is corrected downward when the previous
    integer already satisfies the inequality up to rounding.
    """
    if not 0 < sigma0 < 1:
        raise DomainError("sigma0 must lie in (0, 1)")
    step = math.log1p(-sigma0)
    q = target_log / step
    j = max(1, math.ceil(q))
    while j > 1 and (j - 1) * step <= target_log + 1e-12 * abs(target_log):
        j -= 1
    while j * step > target_log + 1e-12 * abs(target_log):
        j += 1
    return j


def parabolic_singular_thresholds(params: IterationParams, lam: LambdaSpec, rho, nu: Optional[float] = None,
                                  mu3: Optional[float] = None) -> dict:
    """Constants of the singular alternative at radius ``rho``::

        sigma = 1/(16 n),  gamma sigma^-gamma eta^mu3 = 1/16
        (1 + 4 c10^2) eps^mu3 = exp(-(4 gamma/nu) e^(c0(n+2) lambda)) / 2
        sigma0 = exp(-(4 gamma/nu) e^(c0(n+2) lambda)) / 4
        (1 - sigma0)^j* <= nu e^(-c0 (n+1) lambda)
        tau1 = exp(-8 Lambda1(C, beta, rho)) / gamma0,  C = 4 gamma/nu,  beta = c0 (n+2)

    ``tau1`` and ``epsilon`` are also returned as logarithms.
    """
    nu = params.nu if nu is None else nu
    mu3 = params.mu3 if mu3 is None else mu3
    if not 0 < nu <= 1:
        raise DomainError("nu must lie in (0, 1]")
    if mu3 is None or not 0 < mu3 < 1:
        raise DomainError("mu3 must lie in (0, 1)")
    n, g, c0 = params.n, params.gamma, params.c0
    lv = lam(rho)
    sigma = 1.0 / (16 * n)
    eta = (sigma ** g / (16 * g)) ** (1.0 / mu3)
    C = 4 * g / nu
    beta = c0 * (n + 2)
    E = C * math.exp(beta * lv)  # (4 gamma/nu) e^(c0 (n+2) lambda)
    log_eps = (math.log(0.5) - E - math.log1p(4 * params.c10 ** 2)) / mu3
    log_sigma0 = math.log(0.25) - E
    sigma0 = math.exp(log_sigma0)
    target = math.log(nu) - c0 * (n + 1) * lv
    jstar = jstar_from_sigma0(sigma0, target) if sigma0 > 0 else math.inf
    log_tau1 = -math.log(params.gamma0) - 8.0 * math.exp(E) if E < 709 else -math.inf
    tau1, _ = _exp_flag(log_tau1)
    return {"sigma": sigma, "eta": eta, "epsilon": math.exp(log_eps), "log_epsilon": log_eps,
            "sigma0": sigma0, "jstar": jstar, "tau1": tau1, "log_tau1": log_tau1,
            "C": C, "beta": beta}


def parabolic_singular_trace(omega0: float, rho: float, params: IterationParams, lam: LambdaSpec,
                             jmax: int = 30, spec: Optional[GrowthSpec] = None, nu: Optional[float] = None
                             ) -> IterationTrace:
    """Iterate the singular-case recursion in log form::

        rho_j   = (1 - 1/(2 gamma0)) rho_(j-1) tau1(rho_(j-1)) / 2
        omega_j = max{(1 - tau1(rho_(j-1))/2) omega_(j-1),
                      2 gamma0^2 (1+b0)/(2 gamma0 - 1) rho_(j-1)^(1-delta/delta_bar) / tau1(rho_(j-1))}

    ``theta_j = rho_j^2 / psi(x0, t0, omega_j/rho_j)`` and
    ``theta~_j = rho_j^2 / psi(x0, t0, (1+b0) rho_(j-1)^(-delta/delta_bar))``
    are added when ``spec`` is given.  When ``ln tau1`` is not finite (the
    double exponential overflowed) or ``ln rho_j`` leaves the double range,
    the trace stops with ``underflow``.  ``final_bound`` is
    ``omega0 exp(-sum tau1(rho_i)/2) + gamma (1+b0) rho^(1-delta0) exp(8 Lambda1(C, beta, rho))``.
    """
    if omega0 < 0:
        raise DomainError("omega0 must be >= 0")
    nu = params.nu if nu is None else nu
    g0, b0 = params.gamma0, params.b0
    C = 4 * params.gamma / nu
    beta = params.c0 * (params.n + 2)
    expo = 1.0 - params.delta / params.delta_bar
    coef = 2 * g0 ** 2 * (1 + b0) / (2 * g0 - 1)
    shrink = math.log(0.5 * (1 - 1 / (2 * g0)))

    def log_tau1(lr: LogRadius) -> float:
        E = C * eval_Lambda(lam, beta, lr)
        if E > 709:
            return -math.inf
        return -math.log(g0) - 8.0 * math.exp(E)

    rows = []
    lr = LogRadius.coerce(rho)
    ln_rho = lr.log_r
    ln_omega = math.log(omega0) if omega0 > 0 else -math.inf
    tau_sum = 0.0
    term = "max-iter"
    x0 = spec.x0 if spec is not None else None

    def add_row(j, ln_r, ln_w, ln_prev_r, flags):
        rad, f1 = _exp_flag(ln_r)
        om, f2 = _exp_flag(ln_w) if math.isfinite(ln_w) else (0.0, "")
        theta = theta_t = None
        if spec is not None and rad > 0 and om > 0:
            arg = om / rad
            if math.isfinite(arg) and arg > 0:
                theta = rad ** 2 / eval_psi(spec, x0, spec.t0, arg)
            if ln_prev_r is not None:
                arg_t = (1 + b0) * math.exp(-params.delta / params.delta_bar * ln_prev_r)
                if math.isfinite(arg_t) and arg_t > 0:
                    theta_t = rad ** 2 / eval_psi(spec, x0, spec.t0, arg_t)
        fl = "|".join(f for f in (f1, f2, flags) if f)
        rows.append(TraceRow(j, rad, ln_r, om, ln_w, theta, theta_t, None, None, fl))

    add_row(0, ln_rho, ln_omega, None, "")
    for j in range(1, jmax + 1):
        lt = log_tau1(lr)
        if not math.isfinite(lt):
            term = "underflow"
            break
        tau = math.exp(lt)
        tau_sum += tau
        rows[-1].factor = lt
        ln_contract = ln_omega + math.log1p(-0.5 * tau) if math.isfinite(ln_omega) else -math.inf
        ln_floor = math.log(coef) + expo * ln_rho - lt
        floor_branch = ln_floor >= ln_contract
        new_ln_omega = max(ln_contract, ln_floor)
        new_ln_rho = ln_rho + shrink + lt
        if not math.isfinite(new_ln_rho):
            term = "underflow"
            break
        prev_ln_rho = ln_rho
        ln_rho, ln_omega = new_ln_rho, new_ln_omega
        lr = LogRadius.from_log(ln_rho)
        add_row(j, ln_rho, ln_omega, prev_ln_rho, "floor" if floor_branch else "")
        rows[-1].floor = _exp_flag(ln_floor)[0]
    header = {"gamma": params.gamma, "gamma0": g0, "C": C, "beta": beta, "b0": b0,
              "delta": params.delta, "delta_bar": params.delta_bar, "rho": float(rho)
              if not isinstance(rho, LogRadius) else str(rho), "omega0": omega0, "tau_sum": tau_sum}
    tr = IterationTrace("parabolic-singular-osc", rows, term, header)
    lr0 = LogRadius.coerce(rho)
    E0 = C * eval_Lambda(lam, beta, lr0)
    ln_add = (math.log(params.gamma * (1 + b0)) + (1 - params.delta0) * lr0.log_r
              + (8.0 * math.exp(E0) if E0 < 709 else math.inf))
    add, _ = _exp_flag(ln_add) if math.isfinite(ln_add) else (math.inf, "")
    tr.final_bound = omega0 * math.exp(-0.5 * tau_sum) + add
    tr.header["final_bound_log_additive"] = ln_add
    return tr


def partial_tau_sums(trace: IterationTrace) -> List[float]:
    """Cumulative ``sum tau1(rho_i)`` along a singular trace (from row factors)."""
    out, s = [], 0.0
    for r in trace.rows:
        if r.factor is None:
            break
        s += math.exp(r.factor)
        out.append(s)
    return out
