"""Heisenberg-Weyl frame.

Clock/shift pair (Z, X) on C^K, the unitary basis {X^l Z^m}, coprime
generator sets whose cyclic subgroups cover Z_K x Z_K, closed-form
eigensystems for every coprime label, and the eigenprojector ensembles that
turn operator expectations into polynomials on phase grids.

Conventions: omega = exp(2 pi i / K); omega^{1/2} means exp(pi i / K), so all
phase arithmetic runs over exponents mod 2K.  gcd is taken with 0 read as K
(gcd*(0, 2) = gcd(6, 2) = 2 at K = 6), never reduced further mod K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from quditbh import tensor
from quditbh.errors import CapacityError, InputError, PreconditionError, ShapeError

COEFF_TOL = 1e-12
GRID_CAP = 1 << 24


def _check_dim(K: int) -> None:
    if not 2 <= K <= 64:
        raise InputError(f"local dimension K={K} out of range")


@lru_cache(maxsize=None)
def roots(K: int) -> np.ndarray:
    """K-th roots of unity, roots(K)[r] = omega^r."""
    table = np.exp(2j * np.pi * np.arange(K) / K)
    table[0] = 1.0
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def half_roots(K: int) -> np.ndarray:
    """2K-th roots of unity: half_roots(K)[r] = omega^{r/2}."""
    table = np.exp(1j * np.pi * np.arange(2 * K) / K)
    table[0] = 1.0
    table.setflags(write=False)
    return table


def clock_shift(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic shift X (X e_j = e_{j+1 mod K}) and clock Z = diag(omega^j)."""
    _check_dim(K)
    shift = np.roll(np.eye(K, dtype=np.complex128), 1, axis=0)
    clock = np.diag(roots(K))
    return shift, clock


def hw_matrix(K: int, ell: int, m: int) -> np.ndarray:
    """X^ell Z^m with exponents reduced mod K (exact unit-modulus entries)."""
    _check_dim(K)
    ell, m = ell % K, m % K
    cols = np.arange(K)
    out = np.zeros((K, K), dtype=np.complex128)
    out[(cols + ell) % K, cols] = roots(K)[(m * cols) % K]
    return out


@lru_cache(maxsize=None)
def hw_basis(K: int) -> np.ndarray:
    """(K^2, K, K) stack of X^ell Z^m with slot = ell*K + m."""
    stack = np.stack([hw_matrix(K, e // K, e % K) for e in range(K * K)])
    stack.setflags(write=False)
    return stack


def power_phase_exponent(K: int, ell: int, m: int, k: int) -> int:
    """(X^l Z^m)^k = omega^{(1/2) k(k-1) l m} X^{kl} Z^{km}; returns the
    phase as an exponent of omega^{1/2} (i.e. mod 2K)."""
    return (k * (k - 1) * ell * m) % (2 * K)


def commutation_exponent(K: int, l1: int, m1: int, l2: int, m2: int) -> int:
    """X^{l1}Z^{m1} X^{l2}Z^{m2} = omega^e X^{l2}Z^{m2} X^{l1}Z^{m1}."""
    return (l2 * m1 - l1 * m2) % K


# ---------------------------------------------------------------------------
# coefficients


@lru_cache(maxsize=None)
def slot_degrees(K: int) -> np.ndarray:
    """Per-slot degree ell + m for slot = ell*K + m."""
    slots = np.arange(K * K)
    table = slots // K + slots % K
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def degree_table(K: int, n: int) -> np.ndarray:
    site = slot_degrees(K)
    table = np.zeros((K * K,) * n, dtype=np.int64)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = K * K
        table = table + site.reshape(shape)
    table.setflags(write=False)
    return table


@dataclass
class HwCoeffs:
    """Fourier coefficients in the Heisenberg-Weyl frame.

    Multi-indices are tuples of (ell, m) pairs; internally each site packs to
    slot = ell*K + m in a dense (K^2,)*n tensor.
    """

    K: int
    n: int
    tensor: np.ndarray

    def __post_init__(self):
        shape = (self.K * self.K,) * self.n
        if self.tensor.shape != shape:
            raise ShapeError(f"coefficient tensor must have shape {shape}")

    @classmethod
    def zeros(cls, K: int, n: int) -> "HwCoeffs":
        return cls(K, n, np.zeros((K * K,) * n, dtype=np.complex128))

    @classmethod
    def from_entries(cls, K: int, n: int, entries) -> "HwCoeffs":
        out = cls.zeros(K, n)
        pairs = entries.items() if hasattr(entries, "items") else entries
        for multi, value in pairs:
            out.tensor[out._pack(multi)] += value
        return out

    def _pack(self, multi) -> tuple:
        if len(multi) != self.n:
            raise ShapeError(f"multi-index must have {self.n} sites")
        idx = []
        for ell, m in multi:
            if not (0 <= ell < self.K and 0 <= m < self.K):
                raise InputError(f"label ({ell},{m}) out of Z_{self.K} range")
            idx.append(ell * self.K + m)
        return tuple(idx)

    def _unpack(self, pos: int) -> tuple:
        width = self.K * self.K
        out = []
        for _ in range(self.n):
            out.append(pos % width)
            pos //= width
        return tuple((s // self.K, s % self.K) for s in reversed(out))

    def copy(self) -> "HwCoeffs":
        return HwCoeffs(self.K, self.n, self.tensor.copy())

    def coeff(self, multi) -> complex:
        return complex(self.tensor[self._pack(multi)])

    def items(self, tol: float = COEFF_TOL):
        flat = self.tensor.reshape(-1)
        for pos in np.flatnonzero(np.abs(flat) > tol):
            yield self._unpack(int(pos)), complex(flat[pos])

    def degree(self, tol: float = COEFF_TOL) -> int:
        mask = np.abs(self.tensor) > tol
        if not mask.any():
            return 0
        return int(degree_table(self.K, self.n)[mask].max())

    def l2_sq(self) -> float:
        return float(np.sum(np.abs(self.tensor) ** 2))

    def to_entries(self, tol: float = COEFF_TOL) -> list[dict]:
        out = []
        for multi, value in self.items(tol):
            out.append(
                {
                    "labels": [[int(ell), int(m)] for ell, m in multi],
                    "re": float(value.real),
                    "im": float(value.imag),
                }
            )
        return out

    def to_json_dict(self, tol: float = COEFF_TOL) -> dict:
        return {"K": self.K, "n": self.n, "entries": self.to_entries(tol)}


def _sub(count: int) -> str:
    return "abcdefghijklmnopqrstuvwx"[:count]


def hw_expand(mat, K: int, n: int) -> HwCoeffs:
    """A_hat(l, m) = K^{-n} tr[(X^l Z^m (x) ...)^dagger A]."""
    arr = np.asarray(mat, dtype=np.complex128)
    dim = K**n
    if arr.shape != (dim, dim):
        raise ShapeError(f"operator must be {dim}x{dim} for K={K}, n={n}")
    basis = np.conj(hw_basis(K))
    reshaped = arr.reshape((K,) * (2 * n))
    rows = _sub(n)
    cols = _sub(2 * n)[n:]
    outs = "ABCDEFGH"[:n]
    operands = ",".join(f"{outs[i]}{rows[i]}{cols[i]}" for i in range(n))
    subscripts = f"{operands},{rows}{cols}->{outs}"
    coeffs = np.einsum(subscripts, *([basis] * n), reshaped, optimize=True) / (K**n)
    return HwCoeffs(K, n, coeffs)


def hw_reconstruct(coeffs: HwCoeffs) -> np.ndarray:
    K, n = coeffs.K, coeffs.n
    basis = hw_basis(K)
    rows = _sub(n)
    cols = _sub(2 * n)[n:]
    outs = "ABCDEFGH"[:n]
    operands = ",".join(f"{outs[i]}{rows[i]}{cols[i]}" for i in range(n))
    subscripts = f"{outs},{operands}->{rows}{cols}"
    mat = np.einsum(subscripts, coeffs.tensor, *([basis] * n), optimize=True)
    return mat.reshape(K**n, K**n)


def hw_degree(coeffs: HwCoeffs, tol: float = COEFF_TOL) -> int:
    """max over surviving coefficients of sum_j (ell_j + m_j)."""
    return coeffs.degree(tol)


# ---------------------------------------------------------------------------
# generator sets


def gcd_star(K: int, ell: int, m: int) -> int:
    """gcd with the 0 -> K convention (exponents are not reduced mod K here)."""
    return math.gcd(ell if ell else K, m if m else K)


def is_prime(K: int) -> bool:
    if K < 2:
        return False
    return all(K % p for p in range(2, int(math.isqrt(K)) + 1))


def subgroup(K: int, ell: int, m: int) -> set[tuple[int, int]]:
    """Cyclic subgroup <(ell, m)> of Z_K x Z_K."""
    return {((k * ell) % K, (k * m) % K) for k in range(K)}


def label_is_plus(K: int, ell: int, m: int) -> bool:
    """True when the spectrum of X^ell Z^m lies in Omega_K (K1-parity rule)."""
    d = math.gcd(ell, K)
    k1 = K // d
    return (k1 % 2 == 1) or ((ell * m) % 2 == 0)


@dataclass(frozen=True)
class GeneratorSet:
    """Coprime labels whose subgroups cover Z_K x Z_K, with spectrum class."""

    K: int
    members: tuple[tuple[int, int], ...]
    plus: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.members)

    def classification(self, label) -> str:
        idx = self.members.index(tuple(label))
        return "plus" if self.plus[idx] else "minus"

    def covers_group(self) -> bool:
        union: set[tuple[int, int]] = set()
        for ell, m in self.members:
            union |= subgroup(self.K, ell, m)
        return len(union) == self.K * self.K

    def to_json_dict(self) -> dict:
        return {
            "K": self.K,
            "size": len(self.members),
            "members": [
                {"ell": ell, "m": m, "class": "plus" if p else "minus"}
                for (ell, m), p in zip(self.members, self.plus)
            ],
        }


@lru_cache(maxsize=None)
def generator_set(K: int) -> GeneratorSet:
    """Sigma_K: the K+1 standard generators for prime K, otherwise every
    gcd*-coprime pair."""
    _check_dim(K)
    if is_prime(K):
        members = tuple([(1, j) for j in range(K)] + [(0, 1)])
    else:
        members = tuple(
            (ell, m)
            for ell, m in product(range(K), range(K))
            if gcd_star(K, ell, m) == 1
        )
    plus = tuple(label_is_plus(K, ell, m) for ell, m in members)
    return GeneratorSet(K, members, plus)


# ---------------------------------------------------------------------------
# eigensystems


@dataclass
class HwEigensystem:
    """All K eigenpairs of X^ell Z^m for a coprime label.

    Column p of `vectors` is the unit eigenvector whose eigenvalue is
    omega^p for a Plus label and omega^{1/2} omega^p for a Minus label.
    """

    K: int
    ell: int
    m: int
    plus: bool
    eigenvalues: np.ndarray
    vectors: np.ndarray
    max_residual: float

    def to_json_dict(self) -> dict:
        return {
            "K": self.K,
            "ell": self.ell,
            "m": self.m,
            "class": "plus" if self.plus else "minus",
            "eigenvalues": [
                {"re": float(v.real), "im": float(v.imag)} for v in self.eigenvalues
            ],
            "max_residual": float(self.max_residual),
        }


@lru_cache(maxsize=None)
def hw_eigensystem(K: int, ell: int, m: int) -> HwEigensystem:
    """Closed-form eigensystem of X^ell Z^m when gcd*(ell, m) = 1.

    With d = gcd(K, ell) and K1 = K/d, basis positions split as s + j*ell
    (s in Z_d, j in Z_{K1}); the odd-K1 family has phases
    omega^{j(j-1) l m / 2 - j d t} and eigenvalue omega^{d t + m s}, the
    even-K1 family has phases omega^{j(j-2) l m / 2 - j d t} and eigenvalue
    omega^{l m / 2 + d t + m s}.  Labels with gcd*(ell, m) != 1 are refused:
    no closed form is provided for them.
    """
    _check_dim(K)
    ell, m = ell % K, m % K
    if gcd_star(K, ell, m) != 1:
        raise PreconditionError(
            f"label ({ell},{m}) has gcd*={gcd_star(K, ell, m)}; eigenvectors "
            "are only constructed for coprime labels"
        )
    d = math.gcd(ell, K)
    k1 = K // d
    plus = label_is_plus(K, ell, m)
    table2 = half_roots(K)
    vectors = np.zeros((K, K), dtype=np.complex128)
    filled = np.zeros(K, dtype=bool)
    js = np.arange(k1, dtype=np.int64)
    norm = 1.0 / math.sqrt(k1)
    for s in range(d):
        positions = (s + js * ell) % K
        for t in range(k1):
            if k1 % 2 == 1:
                phase_exp = (js * (js - 1) * ell * m - 2 * js * d * t) % (2 * K)
                col = (d * t + m * s) % K
            else:
                phase_exp = (js * (js - 2) * ell * m - 2 * js * d * t) % (2 * K)
                lam2 = (ell * m + 2 * d * t + 2 * m * s) % (2 * K)
                col = lam2 // 2 if plus else (lam2 - 1) // 2
            vec = np.zeros(K, dtype=np.complex128)
            vec[positions] = table2[phase_exp] * norm
            if filled[col]:
                raise PreconditionError("internal: duplicate eigenvalue slot")
            vectors[:, col] = vec
            filled[col] = True
    if not filled.all():
        raise PreconditionError("internal: eigenvalue slots not exhausted")
    offset = 0 if plus else 1
    eigenvalues = table2[(2 * np.arange(K) + offset) % (2 * K)].copy()
    op = hw_matrix(K, ell, m)
    residual = float(np.max(np.linalg.norm(op @ vectors - vectors * eigenvalues, axis=0)))
    if residual > 1e-10:
        raise PreconditionError(f"eigenpair residual {residual:.2e} exceeds 1e-10")
    # instances are shared through the cache
    vectors.setflags(write=False)
    eigenvalues.setflags(write=False)
    return HwEigensystem(K, ell, m, plus, eigenvalues, vectors, residual)


# ---------------------------------------------------------------------------
# phase ensembles


def phase_exponent(K: int, value: complex) -> int:
    """Exponent p with value = omega^p; raises InputError otherwise."""
    z = complex(value)
    if abs(abs(z) - 1.0) > 1e-9:
        raise InputError(f"phase {z!r} is not unimodular")
    p = int(round((np.angle(z) * K) / (2.0 * np.pi))) % K
    if abs(z - roots(K)[p]) > 1e-9:
        raise InputError(f"phase {z!r} is not a K-th root of unity for K={K}")
    return p


@lru_cache(maxsize=None)
def _ensemble_columns(K: int) -> np.ndarray:
    """(G, K, K) stack: [g, :, p] is the eigenvector used for phase omega^p."""
    gens = generator_set(K)
    stack = np.stack([hw_eigensystem(K, ell, m).vectors for ell, m in gens.members])
    stack.setflags(write=False)
    return stack


def ensemble_state_from_exponents(K: int, exponents) -> np.ndarray:
    """Site density matrix: average over generators g of the projector onto
    the eigenvector with eigenvalue omega^{p_g} (Plus) or
    omega^{1/2} omega^{p_g} (Minus)."""
    gens = generator_set(K)
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.shape != (len(gens),):
        raise ShapeError(f"need one phase per generator ({len(gens)})")
    if np.any((exps < 0) | (exps >= K)):
        raise InputError("phase exponents must lie in 0..K-1")
    cols = _ensemble_columns(K)[np.arange(len(gens)), :, exps]
    return np.einsum("gi,gj->ij", cols, np.conj(cols)) / len(gens)


def ensemble_state(K: int, phases) -> np.ndarray:
    """Same as `ensemble_state_from_exponents`, with Omega_K values as input."""
    return ensemble_state_from_exponents(
        K, [phase_exponent(K, z) for z in phases]
    )


def ensemble_states(K: int, exponents) -> np.ndarray:
    """(B, K, K) batch of site states for a (B, G) exponent array."""
    gens = generator_set(K)
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.ndim != 2 or exps.shape[1] != len(gens):
        raise ShapeError(f"expected (B, {len(gens)}) exponents")
    cols = _ensemble_columns(K)[np.arange(len(gens))[None, :], :, exps]
    return np.einsum("bgi,bgj->bij", cols, np.conj(cols)) / len(gens)


# ---------------------------------------------------------------------------
# classical reduction


@lru_cache(maxsize=None)
def site_trace_terms(K: int) -> dict:
    """For each nonzero (ell, m): the monomials of tr[X^ell Z^m rho_site].

    Maps (ell, m) -> tuple of (generator index, power k, phase) with

        tr[X^ell Z^m rho(p)] = (1/G) * sum_terms phase * omega^{p_g * k},

    phase = omega^{-k(k-1) l_g m_g / 2} times omega^{k/2} for Minus
    generators (their projectors carry the omega^{1/2}-shifted eigenvalue).
    """
    gens = generator_set(K)
    table: dict[tuple[int, int], list] = {}
    for gidx, ((gl, gm), gplus) in enumerate(zip(gens.members, gens.plus)):
        for k in range(1, K):
            target = ((k * gl) % K, (k * gm) % K)
            if target == (0, 0):
                continue
            exp2 = (-k * (k - 1) * gl * gm + (0 if gplus else k)) % (2 * K)
            table.setdefault(target, []).append(
                (gidx, k, complex(half_roots(K)[exp2]))
            )
    return {key: tuple(val) for key, val in table.items()}


def reduction_value(coeffs: HwCoeffs, exponents) -> complex:
    """f_A at one phase assignment: exponents is an (n, G) integer array."""
    K, n = coeffs.K, coeffs.n
    gens = generator_set(K)
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.shape != (n, len(gens)):
        raise ShapeError(f"expected (n={n}, G={len(gens)}) exponents")
    terms = site_trace_terms(K)
    root = roots(K)
    total = 0.0 + 0.0j
    for multi, value in coeffs.items():
        factor = value
        for site, (ell, m) in enumerate(multi):
            if (ell, m) == (0, 0):
                continue
            site_sum = 0.0 + 0.0j
            for gidx, k, phase in terms[(ell, m)]:
                site_sum += phase * root[(exps[site, gidx] * k) % K]
            factor *= site_sum / len(gens)
        total += factor
    return complex(total)


def reduction_values(coeffs: HwCoeffs, exponents) -> np.ndarray:
    """Vectorized f_A over a (B, n, G) exponent array."""
    K, n = coeffs.K, coeffs.n
    gens = generator_set(K)
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.ndim != 3 or exps.shape[1:] != (n, len(gens)):
        raise ShapeError(f"expected (B, n={n}, G={len(gens)}) exponents")
    terms = site_trace_terms(K)
    root = roots(K)
    out = np.zeros(exps.shape[0], dtype=np.complex128)
    for multi, value in coeffs.items():
        factor = np.full(exps.shape[0], value, dtype=np.complex128)
        for site, (ell, m) in enumerate(multi):
            if (ell, m) == (0, 0):
                continue
            site_sum = np.zeros(exps.shape[0], dtype=np.complex128)
            for gidx, k, phase in terms[(ell, m)]:
                site_sum += phase * root[(exps[:, site, gidx] * k) % K]
            factor *= site_sum / len(gens)
        out += factor
    return out


def grid_shape(K: int, n: int) -> tuple[int, ...]:
    gens = generator_set(K)
    return (K,) * (len(gens) * n)


def reduction_grid_from_matrix(mat, K: int, n: int) -> np.ndarray:
    """Exhaustive f_A table over Omega_K^{G n} computed from the operator
    matrix and the eigenprojector states (never from the coefficients).

    Axis order is site-major: axis site*G + g carries the phase exponent of
    generator g at that site.  Capacity: K^{G n} <= 2^24.
    """
    gens = generator_set(K)
    G = len(gens)
    size = K ** (G * n)
    if size > GRID_CAP:
        raise CapacityError(f"grid of {size} points exceeds cap {GRID_CAP}")
    arr = np.asarray(mat, dtype=np.complex128)
    dim = K**n
    if arr.shape != (dim, dim):
        raise ShapeError(f"operator must be {dim}x{dim}")
    cols = _ensemble_columns(K)
    if n == 1:
        # q[g, p] = <e^g_p | A e^g_p>; f = (1/G) sum_g q[g, p_g]
        q = np.einsum("gpi,ij,gpj->gp", np.conj(cols.transpose(0, 2, 1)), arr,
                      cols.transpose(0, 2, 1), optimize=True)
        out = np.zeros((K,) * G, dtype=np.complex128)
        for g in range(G):
            shape = [1] * G
            shape[g] = K
            out += q[g].reshape(shape)
        return out / G
    # General n: contract the operator against all K^G site states per site.
    combos = K**G
    if combos > 4096:
        raise CapacityError("site phase alphabet too large for the matrix route")
    exps = np.indices((K,) * G).reshape(G, combos).T
    states = ensemble_states(K, exps)  # (combos, K, K)
    reshaped = arr.reshape((K,) * (2 * n))
    rows = _sub(n)
    cols_sub = _sub(2 * n)[n:]
    outs = "ABCDEFGH"[:n]
    operands = ",".join(f"{outs[i]}{cols_sub[i]}{rows[i]}" for i in range(n))
    subscripts = f"{rows}{cols_sub},{operands}->{outs}"
    table = np.einsum(subscripts, reshaped, *([states] * n), optimize=True)
    return table.reshape((K,) * (G * n))


def expected_classical_coefficients(coeffs: HwCoeffs, tol: float = COEFF_TOL) -> dict:
    """Exact phase-grid Fourier coefficients of f_A.

    Keys are exponent tuples over the G*n variables (site-major); each
    operator coefficient spreads over the per-site generator decompositions
    with coefficient A_hat * prod(phase) / G^kappa.
    """
    K, n = coeffs.K, coeffs.n
    gens = generator_set(K)
    G = len(gens)
    terms = site_trace_terms(K)
    out: dict[tuple, complex] = {}
    for multi, value in coeffs.items(tol):
        active = [(site, lab) for site, lab in enumerate(multi) if lab != (0, 0)]
        choice_lists = [terms[lab] for _, lab in active]
        for picks in product(*choice_lists):
            exponent = [0] * (G * n)
            weight = value
            for (site, _), (gidx, k, phase) in zip(active, picks):
                exponent[site * G + gidx] = k
                weight *= phase / G
            key = tuple(exponent)
            out[key] = out.get(key, 0.0 + 0.0j) + weight
    return out


def random_observable(
    K: int,
    n: int,
    degree: int,
    rng,
    *,
    indices=None,
    unit_norm: bool = True,
) -> HwCoeffs:
    """Random operator with complex Gaussian coefficients on a degree-<=d
    support (HW degree sum(ell_j + m_j)), rescaled to unit operator norm.

    Not Hermitized: the adjoint maps (ell, m) to (-ell, -m) and would inflate
    the degree class.
    """
    out = HwCoeffs.zeros(K, n)
    if indices is None:
        table = degree_table(K, n)
        flat = np.flatnonzero(table.reshape(-1) <= degree)
        indices = [out._unpack(int(p)) for p in flat]
    values = rng.complex_normal(len(indices))
    for multi, value in zip(indices, values):
        out.tensor[out._pack(multi)] = value
    if unit_norm:
        norm = tensor.op_norm(hw_reconstruct(out))
        if norm <= 0.0:
            raise InputError("degenerate random draw (zero operator)")
        out.tensor /= norm
    return out
