"""Finite-volume assembly of ``div(g(x, |grad u|) grad u / |grad u|)``.

The five-point control-volume scheme lives on the nodes; edges carry the
frozen conductance ``k = g(x_e, v) / v`` with ``v = max(|grad u|_e, eps_reg)``.
Boundary nodes are Dirichlet.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .. import kernels
from ..growth import GrowthSpec, eval_g
from .grid import GridField


def edge_midpoints(grid: GridField):
    """Coordinates of x-edge and y-edge midpoints, each ``(..., 2)``."""
    ox, oy = grid.origin
    xs = ox + grid.hx * np.arange(grid.nx + 1)
    ys = oy + grid.hy * np.arange(grid.ny + 1)
    xm = 0.5 * (xs[1:] + xs[:-1])
    ym = 0.5 * (ys[1:] + ys[:-1])
    Xe, Ye = np.meshgrid(xm, ys)
    Xn, Yn = np.meshgrid(xs, ym)
    return np.stack([Xe, Ye], -1), np.stack([Xn, Yn], -1)


def conductances(spec: GrowthSpec, grid: GridField, u, eps_reg: float, t: float = 0.0, mids=None):
    """Frozen edge conductances ``(kx, ky)`` for the current iterate ``u``."""
    vx, vy = kernels.edge_grad_norms(u, grid.hx, grid.hy)
    px, py = mids if mids is not None else edge_midpoints(grid)
    vx = np.maximum(vx, eps_reg)
    vy = np.maximum(vy, eps_reg)
    kx = np.asarray(eval_g(spec, px, t, vx), dtype=float) / vx
    ky = np.asarray(eval_g(spec, py, t, vy), dtype=float) / vy
    return kx, ky


def interior_index(grid: GridField):
    """Map node ``(j, i)`` to unknown number, ``-1`` on the boundary."""
    idx = -np.ones(grid.shape, dtype=np.int64)
    m = (grid.ny - 1) * (grid.nx - 1)
    idx[1:-1, 1:-1] = np.arange(m).reshape(grid.ny - 1, grid.nx - 1)
    return idx


def assemble(grid: GridField, kx, ky, u_bc):
    """Sparse matrix ``A`` and right side ``b`` of ``-div(k grad u) = 0``.

    Rows are scaled by the control-volume area, so ``A u - b`` is the
    negative net flux at each interior node.  Dirichlet values are taken
    from the boundary ring of ``u_bc``.
    """
    nx, ny = grid.nx, grid.ny
    sx, sy = grid.hy / grid.hx, grid.hx / grid.hy
    idx = interior_index(grid)
    m = (ny - 1) * (nx - 1)
    rows, cols, vals = [], [], []
    b = np.zeros(m)
    diag = np.zeros(m)
    jj, ii = np.mgrid[1:ny, 1:nx]
    P = idx[1:-1, 1:-1].ravel()
    nbrs = (
        (kx[1:-1, 1:nx] * sx, 0, 1),   # east edge (j, i)
        (kx[1:-1, 0:nx - 1] * sx, 0, -1),  # west edge (j, i-1)
        (ky[1:ny, 1:-1] * sy, 1, 0),   # north edge (j, i)
        (ky[0:ny - 1, 1:-1] * sy, -1, 0),  # south edge (j-1, i)
    )
    for coef, dj, di in nbrs:
        c = coef.ravel()
        diag += c
        nj, ni = (jj + dj).ravel(), (ii + di).ravel()
        q = idx[nj, ni]
        inside = q >= 0
        rows.append(P[inside])
        cols.append(q[inside])
        vals.append(-c[inside])
        np.add.at(b, P[~inside], c[~inside] * u_bc[nj[~inside], ni[~inside]])
    rows.append(P)
    cols.append(P)
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
    return A, b


def residual(grid: GridField, u, kx, ky):
    """Net flux into each node; interior entries vanish for a discrete solution."""
    return kernels.net_flux(u, kx, ky, grid.hx, grid.hy)


def flux_scale(grid: GridField, u, kx, ky) -> float:
    """Largest edge flux magnitude, used to make residuals relative."""
    fx = np.abs(kx * np.diff(u, axis=1)) * (grid.hy / grid.hx)
    fy = np.abs(ky * np.diff(u, axis=0)) * (grid.hx / grid.hy)
    return float(max(fx.max(initial=0.0), fy.max(initial=0.0)))
