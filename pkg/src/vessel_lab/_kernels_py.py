"""Pure numpy versions of the compiled RK4 kernels (same signatures)."""
import numpy as np


def rk4_linear(C, Y0, h, nsteps):
    const = C.shape[0] == 1
    Y = np.array(Y0, dtype=np.complex128, copy=True)
    hh = 0.5 * h
    for step in range(nsteps):
        if const:
            c0 = c1 = c2 = C[0]
        else:
            c0, c1, c2 = C[2 * step], C[2 * step + 1], C[2 * step + 2]
        k1 = c0 @ Y
        k2 = c1 @ (Y + hh * k1)
        k3 = c1 @ (Y + hh * k2)
        k4 = c2 @ (Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return Y


def _rhs(A, M, N, S, B):
    return -(A @ B @ M + B @ N), B @ S @ B.conj().T


def rk4_sweep(A, M, N, S, B0, X0, h, nsteps):
    n, m = B0.shape
    const = M.shape[0] == 1
    Btr = np.empty((nsteps + 1, n, m), dtype=np.complex128)
    Xtr = np.empty((nsteps + 1, n, n), dtype=np.complex128)
    B = np.array(B0, dtype=np.complex128, copy=True)
    X = np.array(X0, dtype=np.complex128, copy=True)
    Btr[0], Xtr[0] = B, X
    hh = 0.5 * h
    for step in range(nsteps):
        if const:
            i0 = i1 = i2 = 0
        else:
            i0, i1, i2 = 2 * step, 2 * step + 1, 2 * step + 2
        k1B, k1X = _rhs(A, M[i0], N[i0], S[i0], B)
        k2B, k2X = _rhs(A, M[i1], N[i1], S[i1], B + hh * k1B)
        k3B, k3X = _rhs(A, M[i1], N[i1], S[i1], B + hh * k2B)
        k4B, k4X = _rhs(A, M[i2], N[i2], S[i2], B + h * k3B)
        B = B + (h / 6.0) * (k1B + 2 * k2B + 2 * k3B + k4B)
        X = X + (h / 6.0) * (k1X + 2 * k2X + 2 * k3X + k4X)
        X = 0.5 * (X + X.conj().T)
        Btr[step + 1], Xtr[step + 1] = B, X
    return Btr, Xtr
