# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Same signatures and semantics as ``_fallback``."""

import numpy as np

from libc.math cimport sqrt, fabs, hypot

cdef double TINY = 1e-290


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def jacobi_eigh(a_in, double tol=1e-15, int max_sweeps=64):
    cdef double complex[:, ::1] a = np.array(a_in, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, r, sweep
    cdef double fro2 = 0.0, off2, r_pq, tau, t, c, s, app, aqq
    cdef double complex ph, g00, g01, g10, g11, x, y

    for p in range(n):
        for q in range(n):
            fro2 += cabs2(a[p, q])
    cdef double thresh2 = tol * tol * fro2

    for sweep in range(max_sweeps + 1):
        off2 = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off2 += cabs2(a[p, q])
        if off2 <= thresh2:
            w = np.array([a[p, p].real for p in range(n)])
            return w, v_arr, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r_pq = hypot(a[p, q].real, a[p, q].imag)
                if r_pq < TINY:  # phase would overflow; the entry is already negligible
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                ph = a[p, q] / r_pq
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r_pq)
                if fabs(tau) > 1e150:  # tau * tau would overflow
                    t = 0.5 / tau
                elif tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(ph)) @ [[c, s], [-s, c]]
                g00 = c
                g01 = s
                g10 = -s * ph.conjugate()
                g11 = c * ph.conjugate()
                for r in range(n):
                    x = a[r, p]
                    y = a[r, q]
                    a[r, p] = x * g00 + y * g10
                    a[r, q] = x * g01 + y * g11
                for r in range(n):
                    x = a[p, r]
                    y = a[q, r]
                    a[p, r] = g00.conjugate() * x + g10.conjugate() * y
                    a[q, r] = g01.conjugate() * x + g11.conjugate() * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for r in range(n):
                    x = v[r, p]
                    y = v[r, q]
                    v[r, p] = x * g00 + y * g10
                    v[r, q] = x * g01 + y * g11
    return None


def overlap_product(frames_in, w0_in=None):
    cdef double complex[:, :, ::1] f = np.ascontiguousarray(frames_in, dtype=np.complex128)
    cdef Py_ssize_t steps = f.shape[0] - 1, dim = f.shape[1], k = f.shape[2]
    if w0_in is None:
        w_arr = np.eye(k, dtype=np.complex128)
    else:
        w_arr = np.array(w0_in, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] w = w_arr
    cdef double complex[:, ::1] o = np.empty((k, k), dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.empty((k, k), dtype=np.complex128)
    cdef Py_ssize_t m, i, j, r
    cdef double complex acc
    with nogil:
        for m in range(steps):
            for i in range(k):
                for j in range(k):
                    acc = 0.0
                    for r in range(dim):
                        acc = acc + f[m + 1, r, i].conjugate() * f[m, r, j]
                    o[i, j] = acc
            for i in range(k):
                for j in range(k):
                    acc = 0.0
                    for r in range(k):
                        acc = acc + o[i, r] * w[r, j]
                    tmp[i, j] = acc
            w[:, :] = tmp
    return w_arr


def projector_steps(psi_in, frames_in, double complex phase, record=False):
    cdef double complex[:, ::1] psi = psi_in
    cdef double complex[:, :, ::1] g = np.ascontiguousarray(frames_in, dtype=np.complex128)
    cdef Py_ssize_t steps = g.shape[0], dim = g.shape[1], k = g.shape[2]
    cdef Py_ssize_t ncol = psi.shape[1]
    cdef double complex[:, ::1] tmp = np.empty((k, ncol), dtype=np.complex128)
    cdef double complex factor = phase - 1.0
    cdef double complex acc
    cdef bint rec = record
    pops_arr = np.zeros((steps if rec else 0, ncol))
    cdef double[:, ::1] pops = pops_arr
    cdef Py_ssize_t m, i, j, r
    with nogil:
        for m in range(steps):
            for i in range(k):
                for j in range(ncol):
                    acc = 0.0
                    for r in range(dim):
                        acc = acc + g[m, r, i].conjugate() * psi[r, j]
                    tmp[i, j] = acc
            if rec:
                for j in range(ncol):
                    for i in range(k):
                        pops[m, j] += cabs2(tmp[i, j])
            for r in range(dim):
                for j in range(ncol):
                    acc = 0.0
                    for i in range(k):
                        acc = acc + g[m, r, i] * tmp[i, j]
                    psi[r, j] = psi[r, j] + factor * acc
    if rec:
        return pops_arr
    return None
