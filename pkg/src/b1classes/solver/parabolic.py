"""Implicit Euler in time with an inner Picard loop per step."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from ..errors import NonConvergenceError, UsageError
from ..growth import GrowthSpec
from .elliptic import SolveConfig, picard, sample
from .grid import GridField
from .operator import edge_midpoints


def solve_parabolic(spec: GrowthSpec, initial: Callable, boundary: Callable, grid: GridField, T: float,
                    cfg: Optional[SolveConfig] = None, store_every: int = 1,
                    consistency_tol: float = 1e-12) -> GridField:
    """Solve ``u_t - div(g(x, t, |grad u|) grad u / |grad u|) = 0`` up to ``T``.

    Parameters
    ----------
    initial : callable
        ``initial(X, Y)``.
    boundary : callable
        ``boundary(X, Y, t)`` on the boundary ring.
    T : float
        Final time; the step is ``cfg.dt`` (the last step is not shortened,
        ``ceil(T/dt)`` steps of size ``T/ceil(T/dt)`` are taken).
    store_every : int
        Keep every ``store_every``-th time level in ``snapshots`` (the
        initial and final levels are always kept).

    Raises
    ------
    UsageError
        If the initial data disagree with the boundary data at ``t = 0``.
    NonConvergenceError
        If an inner Picard loop fails; ``step`` carries the step index.
    """
    cfg = cfg or SolveConfig()
    if not T > 0:
        raise UsageError("T must be positive")
    nsteps = max(1, math.ceil(T / cfg.dt - 1e-12))
    dt = T / nsteps
    u = sample(grid, initial)
    ring = grid.boundary_mask()
    b0 = sample(grid, boundary, 0.0)
    if np.abs(u[ring] - b0[ring]).max() > consistency_tol * max(1.0, np.abs(u).max()):
        raise UsageError("initial data are inconsistent with boundary data at t = 0")
    mids = edge_midpoints(grid)
    area = grid.hx * grid.hy
    times, snaps = [0.0], [u.copy()]
    inner_its = []
    for step in range(1, nsteps + 1):
        t = step * dt
        prev = u.copy()
        u[ring] = sample(grid, boundary, t)[ring]
        rhs = area * prev[1:-1, 1:-1] / dt
        try:
            u, hist = picard(spec, grid, u, cfg, t=t, mass=1.0 / dt, rhs_extra=rhs,
                             tol=cfg.inner_tol, max_iter=cfg.inner_max_iter, mids=mids)
        except NonConvergenceError as exc:
            raise NonConvergenceError(f"implicit step {step} failed: {exc}",
                                      residual_history=exc.residual_history, step=step) from exc
        inner_its.append(len(hist) - 1)
        if step % store_every == 0 or step == nsteps:
            times.append(t)
            snaps.append(u.copy())
    out = grid.with_values(u)
    out.times, out.snapshots = times, snaps
    out.meta = {"steps": nsteps, "dt": dt, "T": T, "inner_iterations": inner_its}
    return out
