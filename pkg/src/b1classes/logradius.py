"""Radii stored through iterated logarithms.

The nested-log modulus families are only real for radii such as
``exp(-exp(exp(exp(8e))))``, far below the smallest positive double.  A
:class:`LogRadius` stores ``ell_k(r)`` for some depth ``k`` where

    ell_1(r) = ln(1/r),   ell_{k+1}(r) = ln(ell_k(r)).

Shallower levels are recovered with ``exp`` and become ``inf`` when they
overflow, which is the honest floating-point answer.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import total_ordering

from .errors import DomainError

_EXP_MAX = 709.782712893384  # ln(DBL_MAX)


def _exp(x: float) -> float:
    if x > _EXP_MAX:
        return math.inf
    return math.exp(x)


def _log(x: float) -> float:
    if x > 0:
        return math.log(x)
    if x == 0:
        return -math.inf
    return math.nan


@total_ordering
@dataclass(frozen=True)
class LogRadius:
    """A radius ``r`` represented by ``ell_depth(r) = value``.

    Parameters
    ----------
    depth : int
        Number of nested logarithms, at least 1.
    value : float
        ``ell_depth(r)``.
    """

    depth: int
    value: float

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError("depth must be >= 1")
        if math.isnan(self.value):
            raise DomainError("iterated log value is NaN")

    # construction -------------------------------------------------------
    @classmethod
    def from_float(cls, r: float) -> "LogRadius":
        r = float(r)
        if not r > 0 or math.isinf(r):
            raise DomainError(f"radius must be positive and finite, got {r!r}")
        return cls(1, -math.log(r))

    @classmethod
    def from_log(cls, log_r: float) -> "LogRadius":
        """Build from ``ln r`` (which may be far below ``ln(DBL_MIN)``)."""
        return cls(1, -float(log_r))

    @classmethod
    def coerce(cls, r) -> "LogRadius":
        if isinstance(r, LogRadius):
            return r
        return cls.from_float(r)

    # access ---------------------------------------------------------------
    def ell(self, k: int) -> float:
        """Return ``ell_k(r)``; may be ``inf`` (overflow) or NaN (undefined)."""
        if k < 1:
            raise DomainError("k must be >= 1")
        v = self.value
        d = self.depth
        while d > k:
            v = _exp(v)
            d -= 1
        while d < k:
            v = _log(v)
            d += 1
        return v

    @property
    def log_r(self) -> float:
        """``ln r``; ``-inf`` for tower radii."""
        return -self.ell(1)

    def to_float(self) -> float:
        """``r`` itself; 0.0 once it underflows."""
        l1 = self.ell(1)
        if l1 > 745.2:
            return 0.0
        return math.exp(-l1)

    def normalized(self) -> "LogRadius":
        """Equivalent representation at the smallest depth that is finite."""
        d, v = self.depth, self.value
        while d > 1:
            up = _exp(v)
            if math.isinf(up):
                break
            d, v = d - 1, up
        return LogRadius(d, v)

    def shift(self, d: float) -> "LogRadius":
        """Radius ``r * exp(-d)``, i.e. ``ell_1`` increased by ``d``.

        The increment is pushed through the levels via
        ``ell_{k+1}' = ell_{k+1} + log1p(inc_k / ell_k)``; once a level is
        infinite the increment is absorbed, which is exact to double
        precision.
        """
        base = self.normalized()
        if d == 0:
            return base
        if base.depth == 1:
            v = base.value + d
            return LogRadius(1, v)
        inc = float(d)
        for k in range(1, base.depth):
            lk = base.ell(k)
            if math.isinf(lk):
                inc = 0.0
                break
            ratio = inc / lk
            if ratio <= -1.0:
                raise DomainError("shift leaves the domain of the iterated logarithm")
            inc = math.log1p(ratio)
        return LogRadius(base.depth, base.value + inc)

    def scale(self, factor: float) -> "LogRadius":
        """Radius ``factor * r`` for ``factor > 0``."""
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        return self.shift(-math.log(factor))

    # ordering by radius ---------------------------------------------------
    def _key_depth(self, other: "LogRadius") -> int:
        return max(self.normalized().depth, other.normalized().depth)

    def __lt__(self, other):
        if not isinstance(other, LogRadius):
            other = LogRadius.coerce(other)
        k = self._key_depth(other)
        # smaller radius <=> larger iterated log
        return self.ell(k) > other.ell(k)

    def __eq__(self, other):
        if not isinstance(other, LogRadius):
            try:
                other = LogRadius.coerce(other)
            except (DomainError, TypeError):
                return NotImplemented
        k = self._key_depth(other)
        return self.ell(k) == other.ell(k)

    def __hash__(self):
        n = self.normalized()
        return hash((n.depth, n.value))

    def __str__(self):
        n = self.normalized()
        if n.depth == 1:
            return repr(n.to_float()) if n.value < 745 else f"ell1={n.value!r}"
        return f"ell{n.depth}={n.value!r}"


_ELL_RE = re.compile(r"^\s*ell(\d+)\s*=\s*([-+0-9.eE]+)\s*$")


def parse_radius(text) -> LogRadius | float:
    """Parse ``"0.01"`` or ``"ell4=30"`` into a float or :class:`LogRadius`."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ELL_RE.match(str(text))
    if m:
        return LogRadius(int(m.group(1)), float(m.group(2))).normalized()
    try:
        return float(text)
    except ValueError as exc:
        raise DomainError(f"cannot parse radius {text!r}") from exc


def radius_to_str(r) -> str:
    if isinstance(r, LogRadius):
        n = r.normalized()
        if n.depth == 1 and n.value < 700:
            return repr(n.to_float())
        return f"ell{n.depth}={n.value!r}"
    return repr(float(r))
