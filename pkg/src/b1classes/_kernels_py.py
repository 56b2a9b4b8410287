"""Vectorized numpy implementations of the stencil kernels.

Used when the compiled extension is unavailable or disabled through the
``B1CLASSES_PURE_PYTHON`` environment variable.  Array layout is
``u[j, i]`` with ``x = ox + i hx`` and ``y = oy + j hy``.
"""
from __future__ import annotations

import numpy as np


def _transverse_y(u, hy):
    """``du/dy`` at nodes: central inside, one-sided on the bottom/top rows."""
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * hy)
    d[0] = (u[1] - u[0]) / hy
    d[-1] = (u[-1] - u[-2]) / hy
    return d


def _transverse_x(u, hx):
    d = np.empty_like(u)
    d[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * hx)
    d[:, 0] = (u[:, 1] - u[:, 0]) / hx
    d[:, -1] = (u[:, -1] - u[:, -2]) / hx
    return d


def edge_grad_norms(u, hx: float, hy: float):
    """``|grad u|`` on x-edges ``(ny+1, nx)`` and y-edges ``(ny, nx+1)``.

    The component along the edge is the one-sided difference across it;
    the transverse component is the average of the nodal central
    differences at the two end nodes.
    """
    u = np.ascontiguousarray(u, dtype=float)
    ux_e = (u[:, 1:] - u[:, :-1]) / hx
    dy = _transverse_y(u, hy)
    uy_e = 0.5 * (dy[:, 1:] + dy[:, :-1])
    vx = np.sqrt(ux_e * ux_e + uy_e * uy_e)
    uy_n = (u[1:] - u[:-1]) / hy
    dx = _transverse_x(u, hx)
    ux_n = 0.5 * (dx[1:] + dx[:-1])
    vy = np.sqrt(uy_n * uy_n + ux_n * ux_n)
    return vx, vy


def net_flux(u, kx, ky, hx: float, hy: float):
    """Net flux into every node's control volume, shape ``(ny+1, nx+1)``.

    Edge fluxes are ``k (u_nb - u_P) h_perp / h``; boundary nodes receive
    only the edges that exist, so the total over all nodes vanishes.
    """
    u = np.ascontiguousarray(u, dtype=float)
    fx = kx * (u[:, 1:] - u[:, :-1]) * (hy / hx)
    fy = ky * (u[1:] - u[:-1]) * (hx / hy)
    out = np.zeros_like(u)
    out[:, :-1] += fx
    out[:, 1:] -= fx
    out[:-1] += fy
    out[1:] -= fy
    return out
