"""Generalized Gell-Mann frame.

Per-site basis of M_K(C): the identity plus symmetric, antisymmetric, and
diagonal Hermitian matrices, orthonormal under the normalized trace inner
product (1/K) tr[M_a M_b].  Site labels are packed into a single slot index

    0                 -> identity
    1 .. P            -> symmetric (j, k), pairs in lexicographic order
    P+1 .. 2P         -> antisymmetric (j, k), same pair order
    2P+1 .. 2P+K-1    -> diagonal m = 1 .. K-1        (P = K(K-1)/2)

so that slot - 1 is also the coordinate offset of that label inside a site's
block of the sign cube {-1,+1}^{K^2-1}.  The cube-indexed product states built
by `site_state` turn operator expectations into multilinear sign polynomials;
`expected_cube_coefficients` gives the exact coefficient transfer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from quditbh import tensor
from quditbh.errors import InputError, LabelError, ShapeError

COEFF_TOL = 1e-12


# ---------------------------------------------------------------------------
# labels


def _check_dim(K: int) -> None:
    if not 2 <= K <= 64:
        raise InputError(f"local dimension K={K} out of range")


def pair_list(K: int) -> list[tuple[int, int]]:
    """1-based (j, k) pairs with j < k, lexicographic."""
    return list(combinations(range(1, K + 1), 2))


def site_label_count(K: int) -> int:
    return K * K


def label_tuple(K: int, slot: int):
    """Decode a slot index into ("I",), ("sym", j, k), ("asym", j, k), ("diag", m)."""
    _check_dim(K)
    npairs = K * (K - 1) // 2
    if not 0 <= slot < K * K:
        raise LabelError(f"slot {slot} out of range for K={K}")
    if slot == 0:
        return ("I",)
    if slot <= npairs:
        j, k = pair_list(K)[slot - 1]
        return ("sym", j, k)
    if slot <= 2 * npairs:
        j, k = pair_list(K)[slot - npairs - 1]
        return ("asym", j, k)
    return ("diag", slot - 2 * npairs)


def label_index(K: int, label) -> int:
    """Inverse of `label_tuple`; also accepts an already-int slot."""
    _check_dim(K)
    if isinstance(label, (int, np.integer)):
        if not 0 <= int(label) < K * K:
            raise LabelError(f"slot {label} out of range for K={K}")
        return int(label)
    kind = label[0]
    npairs = K * (K - 1) // 2
    if kind == "I":
        return 0
    if kind in ("sym", "asym"):
        j, k = int(label[1]), int(label[2])
        if not 1 <= j < k <= K:
            raise LabelError(f"pair ({j},{k}) out of range for K={K}")
        offset = pair_list(K).index((j, k))
        return 1 + offset + (npairs if kind == "asym" else 0)
    if kind == "diag":
        m = int(label[1])
        if not 1 <= m <= K - 1:
            raise LabelError(f"diagonal index {m} out of range for K={K}")
        return 2 * npairs + m
    raise LabelError(f"unknown label kind {kind!r}")


def label_name(K: int, slot: int) -> str:
    parts = label_tuple(K, slot)
    return parts[0] if parts[0] == "I" else ":".join(str(p) for p in parts)


def label_from_name(K: int, name: str):
    if name == "I":
        return ("I",)
    bits = name.split(":")
    if bits[0] in ("sym", "asym") and len(bits) == 3:
        return (bits[0], int(bits[1]), int(bits[2]))
    if bits[0] == "diag" and len(bits) == 2:
        return ("diag", int(bits[1]))
    raise LabelError(f"cannot parse label {name!r}")


# ---------------------------------------------------------------------------
# matrices


def diag_coupling(K: int, m: int) -> float:
    """Normalization sqrt(K / (m^2 + m)) of the m-th diagonal element."""
    return math.sqrt(K / (m * m + m))


def gm_matrix(K: int, label) -> np.ndarray:
    """The K x K basis matrix for a site label (slot int, tuple, or name)."""
    if isinstance(label, str):
        label = label_from_name(K, label)
    slot = label_index(K, label)
    return gm_basis(K)[slot].copy()


@lru_cache(maxsize=None)
def gm_basis(K: int) -> np.ndarray:
    """(K^2, K, K) stack of all site basis matrices in slot order."""
    _check_dim(K)
    scale = math.sqrt(K / 2.0)
    stack = np.zeros((K * K, K, K), dtype=np.complex128)
    stack[0] = np.eye(K)
    npairs = K * (K - 1) // 2
    for idx, (j, k) in enumerate(pair_list(K)):
        sym = np.zeros((K, K), dtype=np.complex128)
        sym[j - 1, k - 1] = scale
        sym[k - 1, j - 1] = scale
        stack[1 + idx] = sym
        asym = np.zeros((K, K), dtype=np.complex128)
        asym[j - 1, k - 1] = -1j * scale
        asym[k - 1, j - 1] = 1j * scale
        stack[1 + npairs + idx] = asym
    for m in range(1, K):
        diag = np.zeros(K)
        diag[:m] = 1.0
        diag[m] = -m
        stack[2 * npairs + m] = np.diag(diag * diag_coupling(K, m))
    stack.setflags(write=False)
    return stack


# ---------------------------------------------------------------------------
# coefficients


@dataclass
class GmCoeffs:
    """Fourier coefficients of an operator on (C^K)^{otimes n} in the GM frame.

    Stored densely as a (K^2,)*n tensor (the same byte footprint as the
    operator itself); `items` exposes the sparse-map view.
    """

    K: int
    n: int
    tensor: np.ndarray

    def __post_init__(self):
        shape = (self.K * self.K,) * self.n
        if self.tensor.shape != shape:
            raise ShapeError(f"coefficient tensor must have shape {shape}")

    @classmethod
    def zeros(cls, K: int, n: int) -> "GmCoeffs":
        return cls(K, n, np.zeros((K * K,) * n, dtype=np.complex128))

    @classmethod
    def from_entries(cls, K: int, n: int, entries) -> "GmCoeffs":
        """entries: mapping multi-index tuple (or iterable of pairs) -> value."""
        out = cls.zeros(K, n)
        pairs = entries.items() if hasattr(entries, "items") else entries
        for multi, value in pairs:
            idx = tuple(label_index(K, s) for s in multi)
            out.tensor[idx] += value
        return out

    def copy(self) -> "GmCoeffs":
        return GmCoeffs(self.K, self.n, self.tensor.copy())

    def coeff(self, multi) -> complex:
        idx = tuple(label_index(self.K, s) for s in multi)
        return complex(self.tensor[idx])

    def items(self, tol: float = COEFF_TOL):
        """Yield (multi-index tuple, coefficient) for |coefficient| > tol."""
        flat = self.tensor.reshape(-1)
        for pos in np.flatnonzero(np.abs(flat) > tol):
            yield self._unflatten(int(pos)), complex(flat[pos])

    def _unflatten(self, pos: int) -> tuple:
        width = self.K * self.K
        out = []
        for site in range(self.n - 1, -1, -1):
            out.append(pos % width)
            pos //= width
        return tuple(reversed(out))

    def support_degrees(self, tol: float = COEFF_TOL) -> np.ndarray:
        mask = np.abs(self.tensor) > tol
        if not mask.any():
            return np.zeros(0, dtype=np.int64)
        degrees = degree_table(self.K, self.n)
        return degrees[mask]

    def degree(self, tol: float = COEFF_TOL) -> int:
        degs = self.support_degrees(tol)
        return int(degs.max()) if degs.size else 0

    def l2_sq(self) -> float:
        """Normalized L2 norm squared: sum |coeff|^2 (Parseval)."""
        return float(np.sum(np.abs(self.tensor) ** 2))

    def to_entries(self, tol: float = COEFF_TOL) -> list[dict]:
        out = []
        for multi, value in self.items(tol):
            out.append(
                {
                    "labels": [label_name(self.K, s) for s in multi],
                    "re": float(value.real),
                    "im": float(value.imag),
                }
            )
        return out

    def to_json_dict(self, tol: float = COEFF_TOL) -> dict:
        return {"K": self.K, "n": self.n, "entries": self.to_entries(tol)}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "GmCoeffs":
        out = cls.zeros(int(doc["K"]), int(doc["n"]))
        for entry in doc["entries"]:
            multi = tuple(label_from_name(out.K, name) for name in entry["labels"])
            idx = tuple(label_index(out.K, s) for s in multi)
            out.tensor[idx] = complex(entry["re"], entry["im"])
        return out


@lru_cache(maxsize=None)
def degree_table(K: int, n: int) -> np.ndarray:
    """(K^2,)*n int8 tensor: number of non-identity slots per multi-index."""
    width = K * K
    site = (np.arange(width) > 0).astype(np.int8)
    table = np.zeros((width,) * n, dtype=np.int8)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = width
        table = table + site.reshape(shape)
    table.setflags(write=False)
    return table


def _sub(count: int) -> str:
    return "abcdefghijklmnopqrstuvwx"[:count]


def gm_expand(mat, K: int, n: int) -> GmCoeffs:
    """Coefficients A_hat(alpha) = K^{-n} tr[M_alpha A]."""
    arr = np.asarray(mat, dtype=np.complex128)
    dim = K**n
    if arr.shape != (dim, dim):
        raise ShapeError(f"operator must be {dim}x{dim} for K={K}, n={n}")
    basis = gm_basis(K)
    reshaped = arr.reshape((K,) * (2 * n))
    rows = _sub(n)
    cols = _sub(2 * n)[n:]
    outs = "ABCDEFGH"[:n]
    operands = ",".join(f"{outs[i]}{rows[i]}{cols[i]}" for i in range(n))
    subscripts = f"{operands},{cols}{rows}->{outs}"
    coeffs = np.einsum(subscripts, *([basis] * n), reshaped, optimize=True) / (K**n)
    return GmCoeffs(K, n, coeffs)


def gm_reconstruct(coeffs: GmCoeffs) -> np.ndarray:
    """Inverse of `gm_expand`."""
    K, n = coeffs.K, coeffs.n
    basis = gm_basis(K)
    rows = _sub(n)
    cols = _sub(2 * n)[n:]
    outs = "ABCDEFGH"[:n]
    operands = ",".join(f"{outs[i]}{rows[i]}{cols[i]}" for i in range(n))
    subscripts = f"{outs},{operands}->{rows}{cols}"
    mat = np.einsum(subscripts, coeffs.tensor, *([basis] * n), optimize=True)
    return mat.reshape(K**n, K**n)


def gm_degree(coeffs: GmCoeffs, tol: float = COEFF_TOL) -> int:
    """Largest number of non-identity tensor slots over surviving coefficients."""
    return coeffs.degree(tol)


def low_degree_indices(K: int, n: int, d: int) -> list[tuple]:
    """All multi-indices with at most d non-identity slots, canonical order."""
    width = K * K
    out: list[tuple] = [tuple([0] * n)]
    for deg in range(1, min(d, n) + 1):
        for sites in combinations(range(n), deg):
            for slots in product(range(1, width), repeat=deg):
                multi = [0] * n
                for site, slot in zip(sites, slots):
                    multi[site] = slot
                out.append(tuple(multi))
    return out


# ---------------------------------------------------------------------------
# cube-indexed product states


def cube_width(K: int, n: int) -> int:
    return n * (K * K - 1)


def cube_coordinates(K: int, multi) -> tuple[int, ...]:
    """Coordinates S(alpha) of a multi-index inside the sign cube."""
    out = []
    for site, slot in enumerate(multi):
        slot = label_index(K, slot)
        if slot:
            out.append(site * (K * K - 1) + slot - 1)
    return tuple(out)


def cube_mask(K: int, multi) -> int:
    mask = 0
    for coord in cube_coordinates(K, multi):
        mask |= 1 << coord
    return mask


@lru_cache(maxsize=None)
def _site_state_parts(K: int):
    """Projector stacks used by `site_state`.

    Returns (sym, asym, diag_scaled, base) where sym/asym have shape
    (P, 2, K, K) indexed by [pair, bit] with bit 0 <-> sign +1, and base is
    the constant diagonal term (K-1)/2 * I already scaled.
    """
    npairs = K * (K - 1) // 2
    sym = np.zeros((npairs, 2, K, K), dtype=np.complex128)
    asym = np.zeros((npairs, 2, K, K), dtype=np.complex128)
    for idx, (j, k) in enumerate(pair_list(K)):
        for bit, sign in enumerate((1.0, -1.0)):
            vec = np.zeros(K, dtype=np.complex128)
            vec[j - 1] = 1.0
            vec[k - 1] = sign
            vec /= math.sqrt(2.0)
            sym[idx, bit] = np.outer(vec, vec.conj())
            vec_a = np.zeros(K, dtype=np.complex128)
            vec_a[j - 1] = 1.0
            vec_a[k - 1] = 1j * sign
            vec_a /= math.sqrt(2.0)
            asym[idx, bit] = np.outer(vec_a, vec_a.conj())
    diag = np.zeros((K - 1, K, K), dtype=np.complex128)
    basis = gm_basis(K)
    for m in range(1, K):
        diag[m - 1] = basis[2 * npairs + m] / math.sqrt(2.0 * K)
    base = 0.5 * (K - 1) * np.eye(K, dtype=np.complex128)
    for part in (sym, asym, diag, base):
        part.setflags(write=False)
    return sym, asym, diag, base


def _split_signs(K: int, signs: np.ndarray):
    npairs = K * (K - 1) // 2
    return signs[..., :npairs], signs[..., npairs : 2 * npairs], signs[..., 2 * npairs :]


def site_state(K: int, signs) -> np.ndarray:
    """Density matrix rho(x, y, z) for one site's sign slice.

    `signs` holds the K^2-1 coordinates in slot order (x pairs, y pairs, z
    diagonals).  The output is positive semi-definite with unit trace, and
    tr[M_slot rho] = sqrt(K/2)/(3 C(K,2)) * signs[slot-1] for every
    non-identity slot.
    """
    arr = np.asarray(signs)
    if arr.shape != (K * K - 1,):
        raise ShapeError(f"expected {K * K - 1} signs for K={K}")
    if not np.all(np.abs(arr) == 1):
        raise InputError("cube coordinates must be +/-1")
    return site_states(K, arr[None, :])[0]


def site_states(K: int, signs) -> np.ndarray:
    """Batch of site states for a (B, K^2-1) array of +/-1 signs."""
    arr = np.asarray(signs)
    if arr.ndim != 2 or arr.shape[1] != K * K - 1:
        raise ShapeError(f"expected (B, {K * K - 1}) signs for K={K}")
    sym, asym, diag, base = _site_state_parts(K)
    x, y, z = _split_signs(K, arr)
    bits_x = ((1 - x) // 2).astype(np.int64)
    bits_y = ((1 - y) // 2).astype(np.int64)
    npairs = K * (K - 1) // 2
    pair_idx = np.arange(npairs)
    total = sym[pair_idx[None, :], bits_x].sum(axis=1)
    total += asym[pair_idx[None, :], bits_y].sum(axis=1)
    total += np.tensordot(z.astype(np.float64), diag, axes=(1, 0))
    total += base
    scale = 1.0 / (3.0 * math.comb(K, 2))
    return scale * total


def product_state(K: int, n: int, point) -> np.ndarray:
    """n-site tensor product state for one cube point of width n(K^2-1)."""
    arr = np.asarray(point)
    width = K * K - 1
    if arr.shape != (n * width,):
        raise ShapeError(f"expected cube point of length {n * width}")
    sites = [site_state(K, arr[s * width : (s + 1) * width]) for s in range(n)]
    return tensor.kron_all(sites) if n > 1 else sites[0]


def state_trace_values(mat, K: int, n: int, points) -> np.ndarray:
    """tr[A rho(point)] for a batch of cube points, via the density matrices.

    This route never touches the coefficient expansion, so it serves as the
    independent side of reduction checks.
    """
    arr = np.asarray(points)
    width = K * K - 1
    if arr.ndim != 2 or arr.shape[1] != n * width:
        raise ShapeError("points must be (B, n*(K^2-1))")
    a = np.asarray(mat, dtype=np.complex128)
    batch = arr.shape[0]
    out = np.empty(batch, dtype=np.complex128)
    chunk = max(1, (1 << 22) // (K ** (2 * n)))
    for start in range(0, batch, chunk):
        block = arr[start : start + chunk]
        rho = site_states(K, block[:, :width])
        for s in range(1, n):
            right = site_states(K, block[:, s * width : (s + 1) * width])
            dim = rho.shape[1]
            rho = np.einsum("bij,bkl->bikjl", rho, right).reshape(
                block.shape[0], dim * K, dim * K
            )
        out[start : start + chunk] = np.einsum("ij,bji->b", a, rho, optimize=True)
    return out


# ---------------------------------------------------------------------------
# classical reduction function


def reduction_scale(K: int) -> float:
    """Per-degree coefficient transfer factor sqrt(K/2) / (3 C(K,2))."""
    return math.sqrt(K / 2.0) / (3.0 * math.comb(K, 2))


def reduction_value(coeffs: GmCoeffs, point) -> complex:
    """f_A at one cube point: the multilinear form sum_a c^{|a|} A_hat(a) chi_S(a)."""
    return complex(reduction_values(coeffs, np.asarray(point)[None, :])[0])


def reduction_values(coeffs: GmCoeffs, points) -> np.ndarray:
    """Vectorized f_A over a (B, n(K^2-1)) array of +/-1 cube points."""
    K, n = coeffs.K, coeffs.n
    arr = np.asarray(points, dtype=np.float64)
    width = K * K - 1
    if arr.ndim != 2 or arr.shape[1] != n * width:
        raise ShapeError("points must be (B, n*(K^2-1))")
    scale = reduction_scale(K)
    out = np.zeros(arr.shape[0], dtype=np.complex128)
    for multi, value in coeffs.items():
        coords = cube_coordinates(K, multi)
        term = np.full(arr.shape[0], value * scale ** len(coords), dtype=np.complex128)
        for coord in coords:
            term *= arr[:, coord]
        out += term
    return out


def expected_cube_coefficients(coeffs: GmCoeffs, tol: float = COEFF_TOL) -> dict[int, complex]:
    """Exact cube Fourier coefficients of f_A: mask(S(alpha)) -> c^{|a|} A_hat."""
    K = coeffs.K
    scale = reduction_scale(K)
    out: dict[int, complex] = {}
    for multi, value in coeffs.items(tol):
        coords = cube_coordinates(K, multi)
        out[cube_mask(K, multi)] = value * scale ** len(coords)
    return out


# ---------------------------------------------------------------------------
# random observables


def random_observable(
    K: int,
    n: int,
    degree: int,
    rng,
    *,
    indices=None,
    hermitian: bool = True,
    unit_norm: bool = True,
) -> GmCoeffs:
    """Random observable with i.i.d. complex Gaussian coefficients.

    Support defaults to every multi-index of degree <= `degree`; pass explicit
    `indices` (slot tuples) to restrict it.  Hermitization keeps the real part
    of each coefficient (GM matrices are Hermitian); the result is rescaled to
    unit operator norm unless `unit_norm` is false.
    """
    out = GmCoeffs.zeros(K, n)
    chosen = indices if indices is not None else low_degree_indices(K, n, degree)
    values = rng.complex_normal(len(chosen))
    for multi, value in zip(chosen, values):
        out.tensor[tuple(label_index(K, s) for s in multi)] = value
    if hermitian:
        out.tensor = out.tensor.real.astype(np.complex128)
    if unit_norm:
        norm = tensor.op_norm(gm_reconstruct(out))
        if norm <= 0.0:
            raise InputError("degenerate random draw (zero operator)")
        out.tensor /= norm
    return out
