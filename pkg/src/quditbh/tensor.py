"""Dense complex linear algebra substrate.

Operators live in numpy complex128 arrays.  The Hermitian eigensolver is the
package's own cyclic Jacobi kernel (no LAPACK in the implementation path), and
`kron` keeps factor provenance so that nested tensor products re-evaluate in
one canonical left-to-right order, making associativity exact at the bit
level.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from quditbh import kernels
from quditbh.errors import CapacityError, ContractError, ShapeError

MAX_DIM = 4096

_HERMITIAN_TOL = 1e-10
_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


class _KronProduct(np.ndarray):
    """ndarray subclass whose instances remember their kron factors.

    Provenance is attached only by `kron`; any derived array (slicing, ufuncs,
    copies) drops it and is treated as an atomic factor again.
    """

    def __array_finalize__(self, obj):
        self._kron_factors = None


def _as_operator(a, name: str = "operand") -> np.ndarray:
    mat = np.asarray(a)
    if mat.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {mat.shape}")
    mat = mat.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(mat)):
        raise ContractError(f"{name} contains non-finite entries")
    return mat


def _require_square(a, name: str = "operand") -> np.ndarray:
    mat = _as_operator(a, name)
    if mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {mat.shape}")
    return mat


def kron(a, b) -> np.ndarray:
    """Kronecker product with canonical evaluation order.

    kron(kron(a, b), c) and kron(a, kron(b, c)) flatten to the same factor
    list and therefore produce bitwise-identical results.
    """
    mat_a = _as_operator(a, "left factor")
    mat_b = _as_operator(b, "right factor")
    rows = mat_a.shape[0] * mat_b.shape[0]
    cols = mat_a.shape[1] * mat_b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise CapacityError(f"kron result {rows}x{cols} exceeds the {MAX_DIM} cap")
    # Provenance lives on the original arguments; np.asarray strips it.
    factors_a = getattr(a, "_kron_factors", None) or (mat_a,)
    factors_b = getattr(b, "_kron_factors", None) or (mat_b,)
    factors = tuple(factors_a) + tuple(factors_b)
    out = reduce(np.kron, factors).view(_KronProduct)
    out._kron_factors = factors
    return out


def kron_all(factors) -> np.ndarray:
    """Left-to-right Kronecker product of a factor sequence."""
    mats = [np.asarray(f) for f in factors]
    if not mats:
        raise ShapeError("kron_all needs at least one factor")
    if len(mats) == 1:
        return mats[0].astype(np.complex128, copy=True)
    out = mats[0]
    for mat in mats[1:]:
        out = kron(out, mat)
    return out


def trace(a) -> complex:
    """Sum of the diagonal of a square matrix."""
    return complex(np.trace(_require_square(a, "trace input")))


def dagger(a) -> np.ndarray:
    return np.conjugate(np.asarray(a)).T


def max_abs(a) -> float:
    arr = np.asarray(a)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def hermitian_defect(a) -> float:
    """max_ij |a[i,j] - conj(a[j,i])|."""
    mat = _require_square(a, "hermitian_defect input")
    return max_abs(mat - dagger(mat))


def hermitian_eigs(a, *, tol: float = _HERMITIAN_TOL):
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.

    Cyclic Jacobi rotations; per-pair residual ||A v - w v|| stays below 1e-9
    for well-scaled inputs.  Raises ContractError when the input is not
    Hermitian within `tol`.
    """
    mat = _require_square(a, "hermitian_eigs input")
    if hermitian_defect(mat) > tol:
        raise ContractError("input is not Hermitian within tolerance")
    return kernels.jacobi_eigh(mat, tol=_JACOBI_TOL, max_sweeps=_JACOBI_MAX_SWEEPS)


def hermitian_eigs_batch(mats, *, tol: float = _HERMITIAN_TOL):
    """Batched version of `hermitian_eigs` for a (B, n, n) stack."""
    arr = np.asarray(mats, dtype=np.complex128)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ShapeError("expected a (B, n, n) batch")
    defect = max_abs(arr - np.conjugate(np.transpose(arr, (0, 2, 1))))
    if defect > tol:
        raise ContractError("batch is not Hermitian within tolerance")
    return kernels.jacobi_eigh_batch(arr, tol=_JACOBI_TOL, max_sweeps=_JACOBI_MAX_SWEEPS)


def op_norm(a) -> float:
    """Largest singular value, computed from the Jacobi spectrum of a^dagger a."""
    mat = _require_square(a, "op_norm input")
    gram = dagger(mat) @ mat
    gram = 0.5 * (gram + dagger(gram))
    w, _ = kernels.jacobi_eigh(gram, tol=_JACOBI_TOL, max_sweeps=_JACOBI_MAX_SWEEPS)
    return float(np.sqrt(max(w[-1], 0.0)))


def op_norm_batch(mats) -> np.ndarray:
    arr = np.asarray(mats, dtype=np.complex128)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ShapeError("expected a (B, n, n) batch")
    gram = np.einsum("bji,bjk->bik", np.conjugate(arr), arr)
    gram = 0.5 * (gram + np.conjugate(np.transpose(gram, (0, 2, 1))))
    w, _ = kernels.jacobi_eigh_batch(gram, tol=_JACOBI_TOL, max_sweeps=_JACOBI_MAX_SWEEPS)
    return np.sqrt(np.maximum(w[:, -1], 0.0))


def power_iteration_norm(a, seed: int = 7, *, rel_tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Operator norm via power iteration on a^dagger a.

    Independent route used to cross-check `op_norm`; converges to relative
    `rel_tol` on the dominant eigenvalue of the Gram matrix.
    """
    from quditbh.rng import CounterRng

    mat = _require_square(a, "power_iteration input")
    n = mat.shape[0]
    rng = CounterRng(seed)
    vec = rng.complex_normal(n)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        vec = np.ones(n, dtype=np.complex128)
        norm = np.sqrt(n)
    vec = vec / norm
    gram_prev = 0.0
    for _ in range(max_iter):
        image = dagger(mat) @ (mat @ vec)
        gram = float(np.real(np.vdot(vec, image)))
        scale = np.linalg.norm(image)
        if scale == 0.0:
            return 0.0
        vec = image / scale
        if abs(gram - gram_prev) <= rel_tol * max(gram, 1e-300):
            return float(np.sqrt(max(gram, 0.0)))
        gram_prev = gram
    return float(np.sqrt(max(gram_prev, 0.0)))


def frobenius(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))
