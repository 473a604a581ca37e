# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel core: cyclic Jacobi Hermitian eigensolver and the
Walsh-Hadamard butterfly.  Mirrors the numpy lane in `_kernels_py`."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

COMPILED = True

ctypedef double complex cplx


cdef double _cabs(cplx z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef int _jacobi(cplx[:, ::1] a, cplx[:, ::1] v, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double normf, off, app, aqq, r, tau, t, c, sgn
    cdef cplx apq, phase, sigma, sig_c, xp, xq

    normf = 0.0
    for p in range(n):
        for q in range(n):
            normf += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
    normf = sqrt(normf)
    if normf == 0.0:
        return 0

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if sqrt(off) <= tol * normf:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = _cabs(apq)
                if r <= 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau > 1e150:
                    tau = 1e150
                elif tau < -1e150:
                    tau = -1e150
                sgn = 1.0 if tau >= 0.0 else -1.0
                t = sgn / (fabs(tau) + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                phase = apq / r
                sigma = (t * c) * phase
                sig_c = sigma.conjugate()
                for i in range(n):
                    xp = a[i, p]
                    xq = a[i, q]
                    a[i, p] = c * xp - sig_c * xq
                    a[i, q] = sigma * xp + c * xq
                for i in range(n):
                    xp = a[p, i]
                    xq = a[q, i]
                    a[p, i] = c * xp - sigma * xq
                    a[q, i] = sig_c * xp + c * xq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for i in range(n):
                    xp = v[i, p]
                    xq = v[i, q]
                    v[i, p] = c * xp - sig_c * xq
                    v[i, q] = sigma * xp + c * xq
    return max_sweeps


def jacobi_eigh(mat, double tol=1e-12, int max_sweeps=60):
    """Eigensystem of one Hermitian matrix (ascending eigenvalues)."""
    a = np.array(mat, dtype=np.complex128, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    _jacobi(a, v, tol, max_sweeps)
    w = np.diagonal(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def jacobi_eigh_batch(mats, double tol=1e-12, int max_sweeps=60):
    """Eigensystems of a (B, n, n) Hermitian batch, one matrix at a time."""
    a = np.array(mats, dtype=np.complex128, order="C", copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (B, n, n) batch")
    cdef Py_ssize_t batch = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t b
    v = np.empty_like(a)
    eye = np.eye(n, dtype=np.complex128)
    cdef cplx[:, :, ::1] av = a
    cdef cplx[:, :, ::1] vv = v
    for b in range(batch):
        v[b] = eye
        _jacobi(av[b], vv[b], tol, max_sweeps)
    w = np.einsum("bii->bi", a).real.copy()
    order = np.argsort(w, axis=1, kind="stable")
    w_sorted = np.take_along_axis(w, order, axis=1)
    v_sorted = np.take_along_axis(v, order[:, None, :], axis=2)
    return w_sorted, v_sorted


def fwht(values):
    """Unnormalized Walsh-Hadamard transform of a length-2^m vector."""
    a = np.array(values, dtype=np.complex128, copy=True)
    if a.ndim != 1:
        raise ValueError("expected a 1-D table")
    cdef Py_ssize_t n = a.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    cdef cplx[::1] buf = a
    cdef Py_ssize_t h = 1, i, j
    cdef cplx x, y
    with nogil:
        while h < n:
            i = 0
            while i < n:
                for j in range(i, i + h):
                    x = buf[j]
                    y = buf[j + h]
                    buf[j] = x + y
                    buf[j + h] = x - y
                i += 2 * h
            h *= 2
    return a
