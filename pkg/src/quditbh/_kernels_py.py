"""Pure-Python (numpy) implementations of the hot kernels.

Same algorithms as the compiled core in `_core.pyx`: cyclic Jacobi sweeps for
Hermitian eigensystems and the in-order Walsh-Hadamard butterfly.  The batch
eigensolver applies each (p, q) rotation across the whole batch at once, which
is what makes this lane usable for the 10^4-matrix PSD scans.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def _plane_rotation(apq, app, aqq):
    """Per-matrix rotation parameters (c real, sigma complex) zeroing A[p,q].

    Entries below 1e-300 get the identity rotation: dividing by a denormal
    pivot overflows, and such rotations are numerically no-ops anyway.
    """
    r = np.abs(apq)
    active = r > 1e-300
    safe_r = np.where(active, r, 1.0)
    tau = np.clip((aqq - app) / (2.0 * safe_r), -1e150, 1e150)
    t = np.sign(tau) + (tau == 0.0)  # sign convention: tau=0 -> +1
    t = t / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    sigma = s * (np.where(active, apq, 0.0) / safe_r)
    c = np.where(active, c, 1.0)
    sigma = np.where(active, sigma, 0.0 + 0.0j)
    return c, sigma


def jacobi_eigh_batch(mats: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigensystems of a (B, n, n) Hermitian batch via cyclic Jacobi.

    Returns (w, v) with w (B, n) ascending and v (B, n, n) unitary columns.
    Matrices that converge early receive identity rotations for the remaining
    sweeps, keeping each matrix's result independent of the rest of the batch.
    """
    a = np.array(mats, dtype=np.complex128, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (B, n, n) batch")
    batch, n = a.shape[0], a.shape[1]
    v = np.zeros_like(a)
    v[:, np.arange(n), np.arange(n)] = 1.0
    if n == 1:
        w = a[:, 0, 0].real.reshape(batch, 1)
        return w, v

    norms = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    diag_idx = np.arange(n)

    def offdiag_mass(m):
        total = np.sum(np.abs(m) ** 2, axis=(1, 2))
        return np.sqrt(np.maximum(total - np.sum(m[:, diag_idx, diag_idx].real ** 2, axis=1), 0.0))

    for _ in range(max_sweeps):
        unconverged = offdiag_mass(a) > tol * norms
        if not unconverged.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                c, sigma = _plane_rotation(apq, a[:, p, p].real, a[:, q, q].real)
                sigma = np.where(unconverged, sigma, 0.0 + 0.0j)
                c = np.where(unconverged, c, 1.0)
                sig_c = np.conj(sigma)
                # columns (A <- A J), then rows (A <- J^dagger A)
                colp, colq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = c[:, None] * colp - sig_c[:, None] * colq
                a[:, :, q] = sigma[:, None] * colp + c[:, None] * colq
                rowp, rowq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = c[:, None] * rowp - sigma[:, None] * rowq
                a[:, q, :] = sig_c[:, None] * rowp + c[:, None] * rowq
                rot = sigma != 0.0
                a[:, p, q] = np.where(rot, 0.0, a[:, p, q])
                a[:, q, p] = np.where(rot, 0.0, a[:, q, p])
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real
                vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = c[:, None] * vp - sig_c[:, None] * vq
                v[:, :, q] = sigma[:, None] * vp + c[:, None] * vq

    w = a[:, diag_idx, diag_idx].real
    order = np.argsort(w, axis=1, kind="stable")
    w_sorted = np.take_along_axis(w, order, axis=1)
    v_sorted = np.take_along_axis(v, order[:, None, :], axis=2)
    return w_sorted, v_sorted


def jacobi_eigh(mat: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigensystem of one Hermitian matrix (ascending eigenvalues)."""
    w, v = jacobi_eigh_batch(mat[None, :, :], tol=tol, max_sweeps=max_sweeps)
    return w[0], v[0]


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^m vector.

    Index bit i of a table position corresponds to coordinate i; the output at
    mask S is sum_x f(x) * (-1)^{popcount(S & x)}.
    """
    a = np.array(values, dtype=np.complex128, copy=True)
    n = a.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        top = a[:, 0, :] + a[:, 1, :]
        bottom = a[:, 0, :] - a[:, 1, :]
        a = np.stack((top, bottom), axis=1)
        h *= 2
    return a.reshape(n)
