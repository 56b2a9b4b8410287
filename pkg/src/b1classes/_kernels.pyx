# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels; same contract as ``_kernels_py``."""
import numpy as np
from libc.math cimport sqrt


def edge_grad_norms(u_in, double hx, double hy):
    cdef double[:, ::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t ny1 = u.shape[0], nx1 = u.shape[1]
    vx_arr = np.empty((ny1, nx1 - 1))
    vy_arr = np.empty((ny1 - 1, nx1))
    cdef double[:, ::1] vx = vx_arr
    cdef double[:, ::1] vy = vy_arr
    cdef Py_ssize_t i, j
    cdef double a, b, da, db

    for j in range(ny1):
        for i in range(nx1 - 1):
            a = (u[j, i + 1] - u[j, i]) / hx
            if j == 0:
                da = (u[1, i] - u[0, i]) / hy
                db = (u[1, i + 1] - u[0, i + 1]) / hy
            elif j == ny1 - 1:
                da = (u[j, i] - u[j - 1, i]) / hy
                db = (u[j, i + 1] - u[j - 1, i + 1]) / hy
            else:
                da = (u[j + 1, i] - u[j - 1, i]) / (2.0 * hy)
                db = (u[j + 1, i + 1] - u[j - 1, i + 1]) / (2.0 * hy)
            b = 0.5 * (db + da)
            vx[j, i] = sqrt(a * a + b * b)
    for j in range(ny1 - 1):
        for i in range(nx1):
            a = (u[j + 1, i] - u[j, i]) / hy
            if i == 0:
                da = (u[j, 1] - u[j, 0]) / hx
                db = (u[j + 1, 1] - u[j + 1, 0]) / hx
            elif i == nx1 - 1:
                da = (u[j, i] - u[j, i - 1]) / hx
                db = (u[j + 1, i] - u[j + 1, i - 1]) / hx
            else:
                da = (u[j, i + 1] - u[j, i - 1]) / (2.0 * hx)
                db = (u[j + 1, i + 1] - u[j + 1, i - 1]) / (2.0 * hx)
            b = 0.5 * (db + da)
            vy[j, i] = sqrt(a * a + b * b)
    return vx_arr, vy_arr


def net_flux(u_in, kx_in, ky_in, double hx, double hy):
    cdef double[:, ::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef double[:, ::1] kx = np.ascontiguousarray(kx_in, dtype=np.float64)
    cdef double[:, ::1] ky = np.ascontiguousarray(ky_in, dtype=np.float64)
    cdef Py_ssize_t ny1 = u.shape[0], nx1 = u.shape[1]
    out_arr = np.zeros((ny1, nx1))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double f, sx = hy / hx, sy = hx / hy
    for j in range(ny1):
        for i in range(nx1 - 1):
            f = kx[j, i] * (u[j, i + 1] - u[j, i]) * sx
            out[j, i] += f
            out[j, i + 1] -= f
    for j in range(ny1 - 1):
        for i in range(nx1):
            f = ky[j, i] * (u[j + 1, i] - u[j, i]) * sy
            out[j, i] += f
            out[j + 1, i] -= f
    return out_arr
