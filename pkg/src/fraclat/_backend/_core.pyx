# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-sum kernels.

Same contracts as the NumPy fallback: ordered pair sums over an
offset-indexed stencil.  Per-offset partials are accumulated sequentially and
tree-summed at the end, so results are deterministic and agree with the
fallback up to summation rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()


cdef inline double _pabs(double t, double p) nogil:
    if p == 1.0:
        return fabs(t)
    if p == 2.0:
        return t * t
    return pow(fabs(t), p)


cdef inline double _pgrad(double t, double p) nogil:
    if p == 2.0:
        return 2.0 * t
    if p == 1.0:
        return 1.0 if t > 0 else (-1.0 if t < 0 else 0.0)
    if t > 0:
        return p * pow(t, p - 1.0)
    if t < 0:
        return -p * pow(-t, p - 1.0)
    return 0.0


def pair_energy(u, stencil, double p):
    if u.ndim == 1:
        return _pair_energy_1d(u, stencil, p)
    return _pair_energy_2d(u, stencil, p)


def pair_energy_grad(u, stencil, double p):
    g = np.zeros_like(u)
    if u.ndim == 1:
        e = _pair_energy_grad_1d(u, stencil, p, g)
    else:
        e = _pair_energy_grad_2d(u, stencil, p, g)
    return e, g


def smoothed_tv_energy_grad(u, stencil, double eps):
    g = np.zeros_like(u)
    if u.ndim == 1:
        e = _smoothed_1d(u, stencil, eps, g)
    else:
        e = _smoothed_2d(u, stencil, eps, g)
    return e, g


def strip_pair_energy(u, stencil, mask, double p):
    m = np.ascontiguousarray(mask, dtype=np.float64)
    if u.ndim == 1:
        return _strip_1d(u, stencil, m, p)
    return _strip_2d(u, stencil, m, p)


cdef double _pair_energy_1d(double[::1] u, double[::1] st, double p):
    cdef Py_ssize_t n = u.shape[0], d, i
    cdef double w, acc
    parts = np.zeros(max(n - 1, 1))
    cdef double[::1] pv = parts
    with nogil:
        for d in range(1, n):
            w = st[n - 1 + d]
            if w == 0.0:
                continue
            acc = 0.0
            for i in range(n - d):
                acc += _pabs(u[i + d] - u[i], p)
            pv[d - 1] = 2.0 * w * acc
    return float(parts.sum())


cdef double _pair_energy_grad_1d(double[::1] u, double[::1] st, double p,
                                 double[::1] g):
    cdef Py_ssize_t n = u.shape[0], d, i
    cdef double w, acc, diff, t
    parts = np.zeros(max(n - 1, 1))
    cdef double[::1] pv = parts
    with nogil:
        for d in range(1, n):
            w = st[n - 1 + d]
            if w == 0.0:
                continue
            acc = 0.0
            for i in range(n - d):
                diff = u[i + d] - u[i]
                acc += _pabs(diff, p)
                t = 2.0 * w * _pgrad(diff, p)
                g[i + d] += t
                g[i] -= t
            pv[d - 1] = 2.0 * w * acc
    return float(parts.sum())


cdef double _smoothed_1d(double[::1] u, double[::1] st, double eps,
                         double[::1] g):
    cdef Py_ssize_t n = u.shape[0], d, i
    cdef double w, acc, diff, root, t
    parts = np.zeros(max(n - 1, 1))
    cdef double[::1] pv = parts
    with nogil:
        for d in range(1, n):
            w = st[n - 1 + d]
            if w == 0.0:
                continue
            acc = 0.0
            for i in range(n - d):
                diff = u[i + d] - u[i]
                root = sqrt(diff * diff + eps * eps)
                acc += root - eps
                t = 2.0 * w * (diff / root)
                g[i + d] += t
                g[i] -= t
            pv[d - 1] = 2.0 * w * acc
    return float(parts.sum())


cdef double _strip_1d(double[::1] u, double[::1] st, double[::1] m, double p):
    cdef Py_ssize_t n = u.shape[0], d, i
    cdef double w, acc, v
    parts = np.zeros(max(n - 1, 1))
    cdef double[::1] pv = parts
    with nogil:
        for d in range(1, n):
            w = st[n - 1 + d]
            if w == 0.0:
                continue
            acc = 0.0
            for i in range(n - d):
                v = _pabs(u[i + d] - u[i], p)
                acc += v * (m[i + d] + m[i])
            pv[d - 1] = w * acc
    return float(parts.sum())


cdef double _pair_energy_2d(double[:, ::1] u, double[:, ::1] st, double p):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t dx, dy, i, j, i0, j0, jlo, jhi, k
    cdef double w, acc
    cdef Py_ssize_t noff = nx * (2 * ny - 1)
    parts = np.zeros(noff)
    cdef double[::1] pv = parts
    with nogil:
        k = 0
        for dx in range(nx):
            for dy in range(-(ny - 1), ny):
                if dx == 0 and dy <= 0:
                    continue
                w = st[nx - 1 + dx, ny - 1 + dy]
                if w != 0.0:
                    jlo = -dy if dy < 0 else 0
                    jhi = ny - (dy if dy > 0 else 0)
                    acc = 0.0
                    for i in range(nx - dx):
                        for j in range(jlo, jhi):
                            acc += _pabs(u[i, j] - u[i + dx, j + dy], p)
                    pv[k] = 2.0 * w * acc
                k += 1
    return float(parts.sum())


cdef double _pair_energy_grad_2d(double[:, ::1] u, double[:, ::1] st, double p,
                                 double[:, ::1] g):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t dx, dy, i, j, jlo, jhi, k
    cdef double w, acc, diff, t
    cdef Py_ssize_t noff = nx * (2 * ny - 1)
    parts = np.zeros(noff)
    cdef double[::1] pv = parts
    with nogil:
        k = 0
        for dx in range(nx):
            for dy in range(-(ny - 1), ny):
                if dx == 0 and dy <= 0:
                    continue
                w = st[nx - 1 + dx, ny - 1 + dy]
                if w != 0.0:
                    jlo = -dy if dy < 0 else 0
                    jhi = ny - (dy if dy > 0 else 0)
                    acc = 0.0
                    for i in range(nx - dx):
                        for j in range(jlo, jhi):
                            diff = u[i, j] - u[i + dx, j + dy]
                            acc += _pabs(diff, p)
                            t = 2.0 * w * _pgrad(diff, p)
                            g[i, j] += t
                            g[i + dx, j + dy] -= t
                    pv[k] = 2.0 * w * acc
                k += 1
    return float(parts.sum())


cdef double _smoothed_2d(double[:, ::1] u, double[:, ::1] st, double eps,
                         double[:, ::1] g):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t dx, dy, i, j, jlo, jhi, k
    cdef double w, acc, diff, root, t
    cdef Py_ssize_t noff = nx * (2 * ny - 1)
    parts = np.zeros(noff)
    cdef double[::1] pv = parts
    with nogil:
        k = 0
        for dx in range(nx):
            for dy in range(-(ny - 1), ny):
                if dx == 0 and dy <= 0:
                    continue
                w = st[nx - 1 + dx, ny - 1 + dy]
                if w != 0.0:
                    jlo = -dy if dy < 0 else 0
                    jhi = ny - (dy if dy > 0 else 0)
                    acc = 0.0
                    for i in range(nx - dx):
                        for j in range(jlo, jhi):
                            diff = u[i, j] - u[i + dx, j + dy]
                            root = sqrt(diff * diff + eps * eps)
                            acc += root - eps
                            t = 2.0 * w * (diff / root)
                            g[i, j] += t
                            g[i + dx, j + dy] -= t
                    pv[k] = 2.0 * w * acc
                k += 1
    return float(parts.sum())


cdef double _strip_2d(double[:, ::1] u, double[:, ::1] st, double[:, ::1] m,
                      double p):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t dx, dy, i, j, jlo, jhi, k
    cdef double w, acc, v
    cdef Py_ssize_t noff = nx * (2 * ny - 1)
    parts = np.zeros(noff)
    cdef double[::1] pv = parts
    with nogil:
        k = 0
        for dx in range(nx):
            for dy in range(-(ny - 1), ny):
                if dx == 0 and dy <= 0:
                    continue
                w = st[nx - 1 + dx, ny - 1 + dy]
                if w != 0.0:
                    jlo = -dy if dy < 0 else 0
                    jhi = ny - (dy if dy > 0 else 0)
                    acc = 0.0
                    for i in range(nx - dx):
                        for j in range(jlo, jhi):
                            v = _pabs(u[i, j] - u[i + dx, j + dy], p)
                            acc += v * (m[i, j] + m[i + dx, j + dy])
                    pv[k] = w * acc
                k += 1
    return float(parts.sum())
