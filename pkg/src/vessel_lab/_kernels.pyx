# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernels for small dense complex matrix ODEs.

Coefficient arrays are sampled on the half-step lattice ``x0 + j*h/2``
(``2*nsteps + 1`` samples) or hold a single sample for constant
coefficients.
"""
import numpy as np
cimport numpy as cnp

ctypedef double complex cplx

cnp.import_array()


cdef inline void _matmul(cplx[:, ::1] a, cplx[:, ::1] b, cplx[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n = a.shape[0], p = a.shape[1], m = b.shape[1]
    cdef cplx acc
    for i in range(n):
        for j in range(m):
            acc = 0
            for k in range(p):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


cdef inline void _gen_mul(cplx[:, ::1] c, cplx[:, ::1] y, cplx[:, ::1] out) noexcept nogil:
    _matmul(c, y, out)


def rk4_linear(cplx[:, :, ::1] C, cplx[:, ::1] Y0, double h, Py_ssize_t nsteps):
    """Integrate Y' = C(x) Y over ``nsteps`` steps of size ``h``."""
    cdef Py_ssize_t d = Y0.shape[0], p = Y0.shape[1]
    cdef bint const = C.shape[0] == 1
    Y_np = np.array(Y0, dtype=np.complex128, copy=True)
    cdef cplx[:, ::1] Y = Y_np
    cdef cplx[:, ::1] tmp = np.empty((d, p), dtype=np.complex128)
    cdef cplx[:, ::1] k1 = np.empty((d, p), dtype=np.complex128)
    cdef cplx[:, ::1] k2 = np.empty((d, p), dtype=np.complex128)
    cdef cplx[:, ::1] k3 = np.empty((d, p), dtype=np.complex128)
    cdef cplx[:, ::1] k4 = np.empty((d, p), dtype=np.complex128)
    cdef Py_ssize_t step, i, j, i0, i1, i2
    cdef double hh = 0.5 * h, h6 = h / 6.0
    with nogil:
        for step in range(nsteps):
            if const:
                i0 = 0; i1 = 0; i2 = 0
            else:
                i0 = 2 * step; i1 = i0 + 1; i2 = i0 + 2
            _gen_mul(C[i0], Y, k1)
            for i in range(d):
                for j in range(p):
                    tmp[i, j] = Y[i, j] + hh * k1[i, j]
            _gen_mul(C[i1], tmp, k2)
            for i in range(d):
                for j in range(p):
                    tmp[i, j] = Y[i, j] + hh * k2[i, j]
            _gen_mul(C[i1], tmp, k3)
            for i in range(d):
                for j in range(p):
                    tmp[i, j] = Y[i, j] + h * k3[i, j]
            _gen_mul(C[i2], tmp, k4)
            for i in range(d):
                for j in range(p):
                    Y[i, j] = Y[i, j] + h6 * (k1[i, j] + 2 * k2[i, j] + 2 * k3[i, j] + k4[i, j])
    return Y_np


cdef inline void _vessel_rhs(cplx[:, ::1] A, cplx[:, ::1] M, cplx[:, ::1] N,
                             cplx[:, ::1] S, cplx[:, ::1] B,
                             cplx[:, ::1] AB, cplx[:, ::1] BS,
                             cplx[:, ::1] kB, cplx[:, ::1] kX) noexcept nogil:
    # kB = -A B M - B N ; kX = B S B^H
    cdef Py_ssize_t n = B.shape[0], m = B.shape[1]
    cdef Py_ssize_t i, j, k
    cdef cplx acc
    _matmul(A, B, AB)
    for i in range(n):
        for j in range(m):
            acc = 0
            for k in range(m):
                acc = acc + AB[i, k] * M[k, j] + B[i, k] * N[k, j]
            kB[i, j] = -acc
    _matmul(B, S, BS)
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(m):
                acc = acc + BS[i, k] * B[j, k].conjugate()
            kX[i, j] = acc


def rk4_sweep(cplx[:, ::1] A, cplx[:, :, ::1] M, cplx[:, :, ::1] N, cplx[:, :, ::1] S,
              cplx[:, ::1] B0, cplx[:, ::1] X0, double h, Py_ssize_t nsteps):
    """Joint RK4 sweep of B' = -A B M - B N and X' = B S B^H.

    Returns the trajectories ``(nsteps + 1, n, m)`` and ``(nsteps + 1, n, n)``;
    X is re-symmetrized after every step.
    """
    cdef Py_ssize_t n = B0.shape[0], m = B0.shape[1]
    cdef bint const = M.shape[0] == 1
    Btr_np = np.empty((nsteps + 1, n, m), dtype=np.complex128)
    Xtr_np = np.empty((nsteps + 1, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] Btr = Btr_np
    cdef cplx[:, :, ::1] Xtr = Xtr_np
    cdef cplx[:, ::1] B = np.array(B0, dtype=np.complex128, copy=True)
    cdef cplx[:, ::1] X = np.array(X0, dtype=np.complex128, copy=True)
    cdef cplx[:, ::1] tmp = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] AB = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] BS = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] k1B = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] k2B = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] k3B = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] k4B = np.empty((n, m), dtype=np.complex128)
    cdef cplx[:, ::1] k1X = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] k2X = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] k3X = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] k4X = np.empty((n, n), dtype=np.complex128)
    cdef Py_ssize_t step, i, j, i0, i1, i2
    cdef double hh = 0.5 * h, h6 = h / 6.0
    cdef cplx a, b
    with nogil:
        Btr[0, :, :] = B
        Xtr[0, :, :] = X
        for step in range(nsteps):
            if const:
                i0 = 0; i1 = 0; i2 = 0
            else:
                i0 = 2 * step; i1 = i0 + 1; i2 = i0 + 2
            _vessel_rhs(A, M[i0], N[i0], S[i0], B, AB, BS, k1B, k1X)
            for i in range(n):
                for j in range(m):
                    tmp[i, j] = B[i, j] + hh * k1B[i, j]
            _vessel_rhs(A, M[i1], N[i1], S[i1], tmp, AB, BS, k2B, k2X)
            for i in range(n):
                for j in range(m):
                    tmp[i, j] = B[i, j] + hh * k2B[i, j]
            _vessel_rhs(A, M[i1], N[i1], S[i1], tmp, AB, BS, k3B, k3X)
            for i in range(n):
                for j in range(m):
                    tmp[i, j] = B[i, j] + h * k3B[i, j]
            _vessel_rhs(A, M[i2], N[i2], S[i2], tmp, AB, BS, k4B, k4X)
            for i in range(n):
                for j in range(m):
                    B[i, j] = B[i, j] + h6 * (k1B[i, j] + 2 * k2B[i, j] + 2 * k3B[i, j] + k4B[i, j])
            for i in range(n):
                for j in range(n):
                    X[i, j] = X[i, j] + h6 * (k1X[i, j] + 2 * k2X[i, j] + 2 * k3X[i, j] + k4X[i, j])
            for i in range(n):
                for j in range(i, n):
                    a = X[i, j]
                    b = X[j, i].conjugate()
                    X[i, j] = 0.5 * (a + b)
                    X[j, i] = X[i, j].conjugate()
            Btr[step + 1, :, :] = B
            Xtr[step + 1, :, :] = X
    return Btr_np, Xtr_np
