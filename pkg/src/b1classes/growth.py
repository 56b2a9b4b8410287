"""Generalized Orlicz growth functions and the modulus helpers.

Families (``v > 0``)::

    G1: v**(p-1) + v**(q-1)              p = p(x,t), q = q(x,t)
    G2: v**(p-1) * (1 + ln(1 + v))       p = p(x,t)
    G3: v**(p-1) + a(x,t) v**(q-1)       p, q constant
    G4: v**(p-1) * (1 + b(x,t) ln(1+v))  p constant

plus a user-supplied ``Custom`` callable.  ``G(z)`` is the primitive in the
last argument, ``psi = g / v``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import hyp2f1

from .errors import DomainError, InvariantViolation, UsageError
from .fields import ConstField, Field, parse_field
from .logradius import LogRadius
from .quadrature import adaptive_simpson

__all__ = [
    "Family", "GrowthSpec", "LambdaFamily", "LambdaSpec",
    "eval_g", "eval_G", "eval_psi", "eval_log_g",
    "eval_Lambda", "eval_Lambda1", "eval_log_Lambda", "eval_log_Lambda1",
]


class Family(str, enum.Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    G4 = "G4"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, text) -> "Family":
        if isinstance(text, Family):
            return text
        key = str(text).strip().lower()
        for fam in cls:
            if fam.value.lower() == key:
                return fam
        raise UsageError(f"unknown growth family {text!r}")


CONSTANT_NAMES = tuple(f"c{i}" for i in range(1, 11))


@dataclass(frozen=True)
class GrowthSpec:
    """A growth family together with its structural data.

    Parameters
    ----------
    family : Family
    p, q : float
        Exponent bounds.  For G1/G2 the exponent fields default to the
        constants ``p`` and ``q``; ``p1`` (upper bound of ``p(x,t)``) and
        ``q1`` (lower bound of ``q(x,t)``) default to ``p`` and ``q``.
    p_field, q_field, a_field, b_field : Field
        Exponent and coefficient fields.  ``a_field`` is the double-phase
        weight of G3, ``b_field`` the log weight of G4.
    a0, b0coef, alpha : float
        Declared moduli of the coefficient fields:
        ``osc a <= a0 r^alpha e^lambda(r)`` and
        ``osc b <= b0coef e^lambda(r) / ln(1/r)``.
    constants : mapping
        Any of ``c1`` .. ``c10``.
    mu1, mu2, mu3, mu4, s0, b0, delta : float
        Regime constants and thresholds.
    n, M, R, K : float
        Dimension, bound on ``|u|``, cylinder size and the (inert) ``K``.
    x0, t0 : point
        Reference point used by the regime conditions.
    custom_g : callable, optional
        ``custom_g(x, t, v)`` for the Custom family.
    """

    family: Family = Family.G1
    p: float = 2.0
    q: float = 2.0
    p1: Optional[float] = None
    q1: Optional[float] = None
    p_field: Optional[Field] = None
    q_field: Optional[Field] = None
    a_field: Field = ConstField(1.0)
    b_field: Field = ConstField(1.0)
    a0: float = 1.0
    b0coef: float = 1.0
    alpha: float = 1.0
    constants: Mapping[str, float] = field(default_factory=dict)
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    mu3: Optional[float] = None
    mu4: Optional[float] = None
    s0: float = 0.0
    b0: float = 0.0
    delta: float = 0.0
    n: int = 2
    M: float = 1.0
    R: Optional[float] = None
    K: float = 1.0
    x0: tuple = (0.5, 0.5)
    t0: float = 0.0
    custom_g: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        fam = self.family
        if self.p_field is None:
            object.__setattr__(self, "p_field", ConstField(float(self.p)))
        if self.q_field is None:
            object.__setattr__(self, "q_field", ConstField(float(self.q)))
        for name in ("p_field", "q_field", "a_field", "b_field"):
            object.__setattr__(self, name, parse_field(getattr(self, name)))
        if self.p1 is None:
            object.__setattr__(self, "p1", float(self.p))
        if self.q1 is None:
            object.__setattr__(self, "q1", float(self.q))
        if fam in (Family.G1, Family.G3) and not (1.0 < self.p <= self.q):
            raise InvariantViolation(f"{fam.value} requires 1 < p <= q, got p={self.p}, q={self.q}")
        if fam in (Family.G2, Family.G4) and not self.p > 1.0:
            raise InvariantViolation(f"{fam.value} requires p > 1, got p={self.p}")
        if fam is Family.CUSTOM and self.custom_g is None:
            raise UsageError("Custom family needs custom_g")
        if not 0.0 < self.alpha <= 1.0:
            raise InvariantViolation("alpha must lie in (0, 1]")
        for k, v in self.constants.items():
            if k not in CONSTANT_NAMES:
                raise UsageError(f"unknown structural constant {k!r}")
            if not v > 0:
                raise InvariantViolation(f"{k} must be positive")
        for name in ("s0", "b0", "delta"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} must be >= 0")
        if self.n < 2:
            raise InvariantViolation("dimension n must be >= 2")
        if not self.M > 0:
            raise InvariantViolation("M must be positive")
        if self.mu1 is not None and self.mu2 is not None and not 0 < self.mu1 <= self.mu2:
            raise InvariantViolation("degenerate regime needs 0 < mu1 <= mu2")
        if self.mu3 is not None and self.mu4 is not None and not 0 < self.mu3 <= self.mu4 < 1:
            raise InvariantViolation("singular regime needs 0 < mu3 <= mu4 < 1")

    def constant(self, name: str, default: Optional[float] = None) -> float:
        if name in self.constants:
            return float(self.constants[name])
        if default is None:
            raise UsageError(f"structural constant {name} is not set")
        return float(default)

    def with_(self, **changes) -> "GrowthSpec":
        return replace(self, **changes)

    @property
    def x_independent(self) -> bool:
        """True when g does not depend on ``(x, t)``."""
        fam = self.family
        if fam in (Family.G1,):
            return self.p_field.is_constant and self.q_field.is_constant
        if fam is Family.G2:
            return self.p_field.is_constant
        if fam is Family.G3:
            return self.a_field.is_constant
        if fam is Family.G4:
            return self.b_field.is_constant
        return False


# --------------------------------------------------------------------------
# growth evaluation

def _check_v(v):
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("growth functions are defined for v > 0 only")
    return v


def _coef(fieldfun, x, t, name):
    val = fieldfun(x, t)
    if np.any(np.asarray(val) < 0):
        raise InvariantViolation(f"coefficient field {name} is negative at a sampled point")
    return val


def _out(val):
    return float(val) if np.ndim(val) == 0 else val


def eval_g(spec: GrowthSpec, x, t, v):
    """Evaluate ``g(x, t, v)``.

    Parameters
    ----------
    spec : GrowthSpec
    x : array_like
        Point(s); last axis holds coordinates.
    t : float or None
    v : float or array_like
        Strictly positive arguments.

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        If any ``v <= 0``.
    InvariantViolation
        If a coefficient field is negative at ``x``.
    """
    v = _check_v(v)
    fam = spec.family
    if fam is Family.G1:
        p, q = spec.p_field(x, t), spec.q_field(x, t)
        return _out(v ** (p - 1.0) + v ** (q - 1.0))
    if fam is Family.G2:
        p = spec.p_field(x, t)
        return _out(v ** (p - 1.0) * (1.0 + np.log1p(v)))
    if fam is Family.G3:
        a = _coef(spec.a_field, x, t, "a")
        return _out(v ** (spec.p - 1.0) + a * v ** (spec.q - 1.0))
    if fam is Family.G4:
        b = _coef(spec.b_field, x, t, "b")
        return _out(v ** (spec.p - 1.0) * (1.0 + b * np.log1p(v)))
    out = spec.custom_g(x, t, v)
    out = np.asarray(out, dtype=float)
    if np.any(out < 0):
        raise InvariantViolation("custom g returned a negative value")
    return _out(out)


def eval_log_g(spec: GrowthSpec, x, t, log_v):
    """``ln g(x, t, exp(log_v))`` without forming ``v`` (built-in families)."""
    lv = np.asarray(log_v, dtype=float)
    fam = spec.family
    if fam is Family.G1:
        p, q = spec.p_field(x, t), spec.q_field(x, t)
        return _out(np.logaddexp((p - 1.0) * lv, (q - 1.0) * lv))
    if fam is Family.G2:
        p = spec.p_field(x, t)
        return _out((p - 1.0) * lv + np.log1p(_log1p_exp(lv)))
    if fam is Family.G3:
        a = np.asarray(_coef(spec.a_field, x, t, "a"), dtype=float)
        with np.errstate(divide="ignore"):
            la = np.log(a)
        return _out(np.logaddexp((spec.p - 1.0) * lv, la + (spec.q - 1.0) * lv))
    if fam is Family.G4:
        b = np.asarray(_coef(spec.b_field, x, t, "b"), dtype=float)
        return _out((spec.p - 1.0) * lv + np.log1p(b * _log1p_exp(lv)))
    return _out(np.log(eval_g(spec, x, t, np.exp(lv))))


def _log1p_exp(lv):
    """``ln(1 + e^lv)`` stably."""
    return np.logaddexp(0.0, lv)


def eval_psi(spec: GrowthSpec, x, t, v):
    """``psi(x, t, v) = g(x, t, v) / v``."""
    v = _check_v(v)
    return _out(np.asarray(eval_g(spec, x, t, v)) / v)


def _pow_log_primitive(p, z):
    """``int_0^z s^(p-1) ln(1+s) ds`` for ``p > 0`` (closed form)."""
    # integrate by parts: (z^p ln(1+z) - int_0^z s^p/(1+s) ds) / p
    k = z ** (p + 1.0) / (p + 1.0) * hyp2f1(1.0, p + 1.0, p + 2.0, -z)
    return (z ** p * np.log1p(z) - k) / p


def eval_G(spec: GrowthSpec, x, t, z):
    """Primitive ``G(x, t, z) = int_0^z g(x, t, s) ds``.

    Closed forms are used for the four built-in families (the exponent is
    evaluated at the same ``(x, t)`` as the integrand, so it is fixed along
    the integration variable).  Custom growth uses adaptive Simpson with
    relative tolerance 1e-10.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("G is defined for z >= 0")
    fam = spec.family
    with np.errstate(invalid="ignore"):
        if fam is Family.G1:
            p, q = spec.p_field(x, t), spec.q_field(x, t)
            return _out(z ** p / p + z ** q / q)
        if fam is Family.G3:
            a = _coef(spec.a_field, x, t, "a")
            return _out(z ** spec.p / spec.p + a * z ** spec.q / spec.q)
        if fam is Family.G2:
            p = spec.p_field(x, t)
            return _out(z ** p / p + np.where(z > 0, _pow_log_primitive(p, z), 0.0))
        if fam is Family.G4:
            b = _coef(spec.b_field, x, t, "b")
            p = spec.p
            return _out(z ** p / p + b * np.where(z > 0, _pow_log_primitive(p, z), 0.0))

    def integrand_at(s):
        if s <= 0.0:
            return 0.0
        return float(eval_g(spec, x, t, s))

    flat = z.ravel()
    out = np.empty_like(flat)
    for i, zi in enumerate(flat):
        out[i] = adaptive_simpson(integrand_at, 0.0, float(zi), rtol=1e-10)
    return _out(out.reshape(z.shape))


# --------------------------------------------------------------------------
# modulus families

class LambdaFamily(str, enum.Enum):
    CONSTANT = "constant"
    SINGLE_LOG = "single_log"
    TRIPLE_LOG = "triple_log"
    QUAD_LOG = "quad_log"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, text) -> "LambdaFamily":
        if isinstance(text, LambdaFamily):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {"triplelog": "triple_log", "quadlogvariant": "quad_log",
                   "quadlog": "quad_log", "singlelog": "single_log", "const": "constant"}
        key = aliases.get(key, key)
        for fam in cls:
            if fam.value == key:
                return fam
        raise UsageError(f"unknown lambda family {text!r}")


@dataclass(frozen=True)
class LambdaSpec:
    """A modulus ``lambda(r)``.

    Families::

        constant    lambda = L
        single_log  lambda = L ln(1/r)                (Lambda = r**(-beta L))
        triple_log  lambda = L ln ln ln(1/r)          r < exp(-e)
        quad_log    lambda = L ln ln( ln ln ln ln(1/r) / 8 )
        custom      lambda = func(r), r in (0, r_max)

    ``r_max`` is the largest radius where ``lambda >= 0`` and every inner
    logarithm is positive; it is computed on construction and stored as a
    :class:`LogRadius` (``inf`` for the constant family).
    """

    family: LambdaFamily = LambdaFamily.CONSTANT
    L: float = 0.0
    func: Optional[Callable[[float], float]] = None
    custom_r_max: float = 1.0
    r_max: object = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", LambdaFamily.parse(self.family))
        if not self.L >= 0:
            raise InvariantViolation("L must be >= 0")
        fam = self.family
        if fam is LambdaFamily.CONSTANT:
            rmax = math.inf
        elif fam is LambdaFamily.SINGLE_LOG:
            rmax = LogRadius(1, 0.0)
        elif fam is LambdaFamily.TRIPLE_LOG:
            rmax = LogRadius(3, 0.0).normalized()
        elif fam is LambdaFamily.QUAD_LOG:
            rmax = LogRadius(4, 8.0 * math.e).normalized()
        else:
            if self.func is None:
                raise UsageError("custom lambda needs func")
            rmax = LogRadius.from_float(self.custom_r_max)
        object.__setattr__(self, "r_max", rmax)

    def in_domain(self, r) -> bool:
        if self.family is LambdaFamily.CONSTANT:
            if isinstance(r, LogRadius):
                return True
            return r > 0
        lr = r if isinstance(r, LogRadius) else (LogRadius.from_float(r) if r > 0 else None)
        return lr is not None and lr < self.r_max

    def __call__(self, r) -> float:
        """``lambda(r)`` for a float radius or a :class:`LogRadius`."""
        fam = self.family
        if fam is LambdaFamily.CONSTANT:
            if not isinstance(r, LogRadius) and not r > 0:
                raise DomainError("radius must be positive")
            return float(self.L)
        if not self.in_domain(r):
            raise DomainError(f"radius {r} outside (0, r_max) of the {fam.value} modulus")
        lr = LogRadius.coerce(r)
        if fam is LambdaFamily.SINGLE_LOG:
            return self.L * lr.ell(1) if self.L else 0.0
        if fam is LambdaFamily.TRIPLE_LOG:
            return self.L * lr.ell(3) if self.L else 0.0
        if fam is LambdaFamily.QUAD_LOG:
            inner = math.log(lr.ell(4) / 8.0)
            return self.L * math.log(inner) if self.L else 0.0
        rf = lr.to_float()
        if rf == 0.0:
            raise DomainError("custom lambda cannot be evaluated below the double range")
        return float(self.func(rf))

    def to_dict(self) -> dict:
        return {"family": self.family.value, "L": float(self.L)}


def _check_pos(name, val):
    if not val > 0:
        raise DomainError(f"{name} must be positive")


def eval_log_Lambda(lam: LambdaSpec, beta: float, r) -> float:
    """``ln Lambda(beta, r) = beta * lambda(r)``."""
    _check_pos("beta", beta)
    return beta * lam(r)


def eval_Lambda(lam: LambdaSpec, beta: float, r) -> float:
    """``Lambda(beta, r) = exp(beta * lambda(r))`` (``inf`` on overflow)."""
    x = eval_log_Lambda(lam, beta, r)
    return math.inf if x > 709.78 else math.exp(x)


def eval_log_Lambda1(lam: LambdaSpec, c: float, beta: float, r) -> float:
    """``ln Lambda_1(c, beta, r) = c * Lambda(beta, r)``."""
    _check_pos("c", c)
    return c * eval_Lambda(lam, beta, r)


def eval_Lambda1(lam: LambdaSpec, c: float, beta: float, r) -> float:
    """``Lambda_1(c, beta, r) = exp(c * Lambda(beta, r))``."""
    x = eval_log_Lambda1(lam, c, beta, r)
    return math.inf if x > 709.78 else math.exp(x)
