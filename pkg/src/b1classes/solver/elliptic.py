"""Damped Picard solver for the stationary equation.

Each sweep freezes the edge conductances at the current iterate, solves
the linear Dirichlet problem, and relaxes toward the solution.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import NonConvergenceError, UsageError
from ..growth import GrowthSpec
from .grid import GridField
from .operator import assemble, conductances, edge_midpoints, flux_scale, residual

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveConfig:
    """Numerical knobs shared by the stationary and evolution solvers.

    ``tol`` bounds the interior net flux relative to the largest edge
    flux; ``inner_tol`` plays the same role for each implicit step.
    """

    eps_reg: float = 1e-8
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500
    dt: float = 1e-3
    inner_tol: float = 1e-10
    inner_max_iter: int = 200

    def __post_init__(self):
        if not self.eps_reg > 0:
            raise UsageError("eps_reg must be positive")
        if not 0 < self.damping <= 1:
            raise UsageError("damping must lie in (0, 1]")
        if not (self.tol > 0 and self.inner_tol > 0):
            raise UsageError("tolerances must be positive")
        if not self.dt > 0:
            raise UsageError("dt must be positive")
        if self.max_iter < 1 or self.inner_max_iter < 1:
            raise UsageError("iteration caps must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def make_grid(n: int, extent=(0.0, 1.0, 0.0, 1.0), ny: Optional[int] = None) -> GridField:
    """Uniform grid on ``[x0, x1] x [y0, y1]`` with ``n`` (and ``ny``) cells."""
    ny = n if ny is None else ny
    x0, x1, y0, y1 = extent
    if not (x1 > x0 and y1 > y0):
        raise UsageError("empty extent")
    return GridField(n, ny, (x1 - x0) / n, (y1 - y0) / ny, (x0, y0))


def sample(grid: GridField, fun: Callable, t: Optional[float] = None) -> np.ndarray:
    """Evaluate ``fun(x, y)`` (or ``fun(x, y, t)``) at all nodes."""
    X, Y = grid.coords()
    vals = fun(X, Y) if t is None else fun(X, Y, t)
    return np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy()


def _linear_solve(A, b):
    return spla.splu(A.tocsc()).solve(b)


FLUX_FLOOR = 1e-4


def picard(spec: GrowthSpec, grid: GridField, u, cfg: SolveConfig, t: float = 0.0,
           mass: Optional[float] = None, rhs_extra=None, tol=None, max_iter=None, mids=None):
    """Picard loop for ``mass * u - div(k(u) grad u) = rhs_extra`` with Dirichlet ring of ``u``.

    Returns ``(u, history)`` where ``history`` lists the relative residual
    at each iterate.  ``mass`` is ``1/dt`` for implicit steps, ``None``
    for the stationary problem.
    """
    tol = cfg.tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    mids = edge_midpoints(grid) if mids is None else mids
    area = grid.hx * grid.hy
    u = np.array(u, dtype=float)
    history = []
    for it in range(max_iter + 1):
        kx, ky = conductances(spec, grid, u, cfg.eps_reg, t, mids)
        r = residual(grid, u, kx, ky)[1:-1, 1:-1]
        if mass is not None:
            r = r - area * mass * u[1:-1, 1:-1] + (rhs_extra if rhs_extra is not None else 0.0)
        # floor keeps the relative residual meaningful for (nearly) flat iterates
        kmax = float(max(kx.max(initial=0.0), ky.max(initial=0.0)))
        scale = max(flux_scale(grid, u, kx, ky),
                    FLUX_FLOOR * kmax * max(1.0, float(np.abs(u).max(initial=0.0))))
        if mass is not None and rhs_extra is not None:
            scale = max(scale, float(np.abs(rhs_extra).max(initial=0.0)))
        rel = float(np.abs(r).max(initial=0.0)) / scale if scale > 0 else 0.0
        history.append(rel)
        if rel <= tol:
            return u, history
        if it == max_iter:
            break
        A, b = assemble(grid, kx, ky, u)
        if mass is not None:
            A = A + area * mass * _identity(A.shape[0])
            if rhs_extra is not None:
                b = b + rhs_extra.ravel()
        u_new = _linear_solve(A, b).reshape(grid.ny - 1, grid.nx - 1)
        theta = cfg.damping if it > 0 else 1.0
        u[1:-1, 1:-1] = (1 - theta) * u[1:-1, 1:-1] + theta * u_new
    raise NonConvergenceError(
        f"Picard iteration did not reach tolerance {tol:g} in {max_iter} iterations",
        residual_history=history)


def _identity(m):
    import scipy.sparse as sp
    return sp.identity(m, format="csr")


def solve_elliptic(spec: GrowthSpec, boundary: Callable, grid: GridField,
                   cfg: Optional[SolveConfig] = None, initial=None) -> GridField:
    """Solve ``div(g(x, |grad u|) grad u / |grad u|) = 0`` with Dirichlet data.

    Parameters
    ----------
    spec : GrowthSpec
    boundary : callable
        ``boundary(X, Y)`` evaluated on the boundary ring (and used as the
        harmonic initial guess source).
    grid : GridField
        Supplies the mesh; its values are ignored.
    cfg : SolveConfig, optional
    initial : array_like, optional
        Interior starting iterate; default is the discrete harmonic
        extension of the boundary data (the first Picard step taken with
        unit conductance).

    Returns
    -------
    GridField
        With ``meta`` holding ``iterations`` and ``residual_history``.

    Raises
    ------
    NonConvergenceError
        When the residual misses ``cfg.tol`` after ``cfg.max_iter`` sweeps.
    """
    cfg = cfg or SolveConfig()
    if grid.nx < 2 or grid.ny < 2:
        raise UsageError("need at least one interior node")
    u = sample(grid, boundary)
    bvals = u[grid.boundary_mask()]
    if not np.all(np.isfinite(bvals)):
        raise UsageError("boundary data must be finite")
    if initial is not None:
        u[1:-1, 1:-1] = np.asarray(initial, dtype=float).reshape(u.shape)[1:-1, 1:-1]
    else:
        ones = np.ones((grid.ny + 1, grid.nx))
        A, b = assemble(grid, ones, np.ones((grid.ny, grid.nx + 1)), u)
        u[1:-1, 1:-1] = _linear_solve(A, b).reshape(grid.ny - 1, grid.nx - 1)
    u, hist = picard(spec, grid, u, cfg)
    out = grid.with_values(u)
    out.meta = {"iterations": len(hist) - 1, "residual_history": hist,
                "boundary_min": float(bvals.min()), "boundary_max": float(bvals.max())}
    log.debug("elliptic solve converged in %d sweeps", len(hist) - 1)
    return out
