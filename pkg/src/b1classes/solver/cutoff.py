"""Radial cutoff functions ``zeta`` supported in a ball.

Any admissible ``zeta`` equals 1 on ``B_((1-sigma) rho)``, vanishes
outside ``B_rho`` and has ``|grad zeta| <= 1/(sigma rho)``.  Over a collar
of width ``sigma rho`` the only profile meeting that slope bound with
equality to 0 and 1 at its ends is the linear ramp, which is therefore
the default.  The smooth ``"bump"`` profile
``(1 - s^2)_+^2`` (``s`` the relative collar depth) is offered for
comparison; its steepest slope is ``8/(3 sqrt 3)`` times the bound.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import UsageError

BUMP_SLOPE = 8.0 / (3.0 * np.sqrt(3.0))


@dataclass(frozen=True)
class CutoffSpec:
    center: tuple
    radius: float
    sigma: float = 0.5
    exponent: float = 2.0
    kind: str = "linear"

    def __post_init__(self):
        if not self.radius > 0:
            raise UsageError("cutoff radius must be positive")
        if not 0 < self.sigma < 1:
            raise UsageError("sigma must lie in (0, 1)")
        if not self.exponent >= 1:
            raise UsageError("cutoff exponent must be >= 1")
        if self.kind not in ("linear", "bump"):
            raise UsageError(f"unknown cutoff kind {self.kind!r}")

    def with_(self, **kw) -> "CutoffSpec":
        return replace(self, **kw)

    @property
    def grad_bound(self) -> float:
        return 1.0 / (self.sigma * self.radius)

    def _depth(self, d):
        inner = (1.0 - self.sigma) * self.radius
        return np.clip((d - inner) / (self.sigma * self.radius), 0.0, 1.0)

    def __call__(self, X, Y):
        d = np.hypot(np.asarray(X) - self.center[0], np.asarray(Y) - self.center[1])
        s = self._depth(d)
        if self.kind == "linear":
            return 1.0 - s
        return (1.0 - s * s) ** 2

    def grad_norm(self, X, Y):
        """Exact ``|grad zeta|`` (one-sided value at the kinks of the ramp)."""
        d = np.hypot(np.asarray(X) - self.center[0], np.asarray(Y) - self.center[1])
        inner = (1.0 - self.sigma) * self.radius
        inside = (d > inner) & (d < self.radius)
        s = self._depth(d)
        if self.kind == "linear":
            slope = np.ones_like(s)
        else:
            slope = 4.0 * s * (1.0 - s * s)
        return np.where(inside, slope * self.grad_bound, 0.0)

    def gradient_bound_holds(self, X, Y, rtol: float = 1e-12) -> bool:
        return bool(np.all(self.grad_norm(X, Y) <= self.grad_bound * (1 + rtol)))
