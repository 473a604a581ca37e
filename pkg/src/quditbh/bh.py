"""Coefficient-norm ratio harness.

Exact classical Fourier oracles on sign cubes and root-of-unity grids,
l_p coefficient norms, Bohnenblust-Hille-type ratio campaigns, and the
reduction-correspondence verifier that ties operator coefficients to the
classical expansions of their trace functions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from quditbh import gm, hw, kernels, tensor
from quditbh.errors import CapacityError, InputError, ShapeError
from quditbh.gm import GmCoeffs
from quditbh.hw import HwCoeffs
from quditbh.rng import CounterRng

CUBE_ARITY_CAP = 24
GRID_CAP = 1 << 24


# ---------------------------------------------------------------------------
# norms and constants


def lp_coeff_norm(values, p: float) -> float:
    """(sum |c|^p)^(1/p) over a coefficient array or Coeffs object."""
    if p <= 0:
        raise InputError("p must be positive")
    if isinstance(values, (GmCoeffs, HwCoeffs)):
        values = values.tensor
    mags = np.abs(np.asarray(values, dtype=np.complex128)).reshape(-1)
    if mags.size == 0:
        return 0.0
    top = mags.max()
    if top == 0.0:
        return 0.0
    # factor out the peak to keep small-p powers in range
    return float(top * np.sum((mags / top) ** p) ** (1.0 / p))


def bh_exponent(d: int) -> float:
    """2d/(d+1), the critical coefficient-norm exponent at degree d."""
    if d < 1:
        raise InputError("degree must be >= 1")
    return 2.0 * d / (d + 1.0)


def cube_bh_constant(d: int, base: float = 2.0) -> float:
    """Configurable sign-cube constant, default base^sqrt(d ln d)."""
    if d < 1:
        raise InputError("degree must be >= 1")
    return 1.0 if d == 1 else float(base ** math.sqrt(d * math.log(d)))


def cyclic_bh_constant(d: int, K: int, factor: float = 10.0) -> float:
    """Configurable root-of-unity constant, default (factor * ln K)^d."""
    if d < 1:
        raise InputError("degree must be >= 1")
    return float((factor * math.log(K)) ** d)


def gm_reduction_constant(d: int, K: int) -> float:
    """(3/2 (K^2 - K))^d: coefficient attenuation of the cube reduction."""
    return float((1.5 * (K * K - K)) ** d)


def gm_ratio_bound(d: int, K: int, base: float = 2.0) -> float:
    return gm_reduction_constant(d, K) * cube_bh_constant(d, base)


def hw_ratio_bound(d: int, K: int, factor: float = 10.0) -> float:
    """(K+1)^d * cyclic constant for prime K; |Sigma_K|^d * cyclic constant
    at inflated degree (K-1)d otherwise."""
    if hw.is_prime(K):
        return float((K + 1) ** d) * cyclic_bh_constant(d, K, factor)
    gens = hw.generator_set(K)
    return float(len(gens) ** d) * cyclic_bh_constant((K - 1) * d, K, factor)


# ---------------------------------------------------------------------------
# classical Fourier oracles


@dataclass
class ClassicalFn:
    """Value table of a function on {-1,+1}^arity or Omega_K^arity.

    For the sign cube, position index bit i set means coordinate i equals -1.
    For the cyclic grid, the table has shape (K,)*arity of exponent indices.
    """

    arity: int
    alphabet: str  # "pm1" or "omega"
    K: int
    values: np.ndarray

    @classmethod
    def from_cube_values(cls, values) -> "ClassicalFn":
        table = np.asarray(values, dtype=np.complex128).reshape(-1)
        m = int(table.shape[0]).bit_length() - 1
        if table.shape[0] != 1 << m:
            raise ShapeError("cube table length must be a power of two")
        return cls(m, "pm1", 2, table)

    @classmethod
    def from_cyclic_values(cls, K: int, values) -> "ClassicalFn":
        table = np.asarray(values, dtype=np.complex128)
        m = int(round(math.log(table.size, K)))
        if K**m != table.size:
            raise ShapeError("cyclic table size must be a power of K")
        return cls(m, "omega", K, table.reshape((K,) * m))

    @classmethod
    def from_cube_callable(cls, arity: int, fn) -> "ClassicalFn":
        """Tabulate a callable on +/-1 rows (lazy functions are evaluated
        once, over the whole cube)."""
        points = cube_points(arity)
        return cls.from_cube_values(np.asarray([fn(row) for row in points]))

    @classmethod
    def from_cyclic_callable(cls, K: int, arity: int, fn) -> "ClassicalFn":
        """Tabulate a callable on Omega_K^arity value rows."""
        if K**arity > GRID_CAP:
            raise CapacityError(f"cyclic table of {K ** arity} points exceeds cap")
        exps = np.indices((K,) * arity).reshape(arity, -1).T
        root = np.exp(2j * np.pi * np.arange(K) / K)
        table = np.asarray([fn(root[row]) for row in exps])
        return cls.from_cyclic_values(K, table)

    def fourier(self) -> np.ndarray:
        return cube_fourier(self.values) if self.alphabet == "pm1" else cyclic_fourier(self.values, self.K)


def cube_points(m: int) -> np.ndarray:
    """(2^m, m) array of +/-1 points; bit i of the row index gives slot i."""
    if m > CUBE_ARITY_CAP:
        raise CapacityError(f"cube arity {m} exceeds cap {CUBE_ARITY_CAP}")
    idx = np.arange(1 << m, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(m, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def cube_fourier(values) -> np.ndarray:
    """Exact Walsh coefficients: out[mask] = 2^{-m} sum_x f(x) chi_mask(x)."""
    if isinstance(values, ClassicalFn):
        values = values.values
    table = np.asarray(values, dtype=np.complex128).reshape(-1)
    size = table.shape[0]
    m = size.bit_length() - 1
    if size != 1 << m:
        raise ShapeError("cube table length must be a power of two")
    if m > CUBE_ARITY_CAP:
        raise CapacityError(f"cube arity {m} exceeds cap {CUBE_ARITY_CAP}")
    return kernels.fwht(table) / size


def cube_character(mask: int, m: int) -> np.ndarray:
    """chi_mask over the standard point enumeration (test helper)."""
    idx = np.arange(1 << m, dtype=np.int64)
    overlap = idx & np.int64(mask)
    pop = np.zeros(1 << m, dtype=np.int64)
    for bit in range(m):
        pop += (overlap >> bit) & 1
    return np.where(pop % 2 == 0, 1.0, -1.0)


def cyclic_fourier(values, K: int) -> np.ndarray:
    """Exact Fourier table on Omega_K^m: out[alpha] = K^{-m} sum f(z) z^{-alpha}.

    Input shape (K,)*m (or flat of size K^m); output has the same shape.
    """
    if isinstance(values, ClassicalFn):
        values = values.values
    table = np.asarray(values, dtype=np.complex128)
    size = table.size
    if size > GRID_CAP:
        raise CapacityError(f"cyclic table of {size} points exceeds cap {GRID_CAP}")
    m = int(round(math.log(size, K))) if size > 1 else 0
    if K**m != size:
        raise ShapeError("cyclic table size must be a power of K")
    table = table.reshape((K,) * m)
    a = np.arange(K)
    dft = np.exp(-2j * np.pi * np.outer(a, a) / K) / K
    out = table
    for _ in range(m):
        out = np.tensordot(out, dft, axes=([0], [1]))
    return out


# ---------------------------------------------------------------------------
# ratios


def infer_degree(coeffs) -> int:
    d = coeffs.degree()
    return max(d, 1)


def ratio_exponent(coeffs) -> float:
    """Basis- and degree-appropriate coefficient-norm exponent."""
    d = infer_degree(coeffs)
    if isinstance(coeffs, GmCoeffs):
        return bh_exponent(d)
    if isinstance(coeffs, HwCoeffs):
        if hw.is_prime(coeffs.K):
            return bh_exponent(d)
        return bh_exponent((coeffs.K - 1) * d)
    raise InputError("expected GmCoeffs or HwCoeffs")


def bh_ratio(coeffs) -> float:
    """Coefficient norm at the critical exponent over the operator norm."""
    if isinstance(coeffs, GmCoeffs):
        mat = gm.gm_reconstruct(coeffs)
    elif isinstance(coeffs, HwCoeffs):
        mat = hw.hw_reconstruct(coeffs)
    else:
        raise InputError("expected GmCoeffs or HwCoeffs")
    if not np.any(np.abs(coeffs.tensor) > 0):
        raise InputError("zero operator has no ratio")
    return lp_coeff_norm(coeffs, ratio_exponent(coeffs)) / tensor.op_norm(mat)


@dataclass
class BhTrial:
    seed: int
    d: int
    ratio: float
    coeff_norm: float
    op_norm: float
    bound: float


@dataclass
class BhReport:
    basis: str
    K: int
    n: int
    d: int
    trials: int
    max_ratio: float
    bound_used: float
    flagged: list = field(default_factory=list)
    records: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "basis": self.basis,
            "K": self.K,
            "n": self.n,
            "d": self.d,
            "trials": self.trials,
            "max_ratio": self.max_ratio,
            "bound_used": self.bound_used,
            "flagged": list(self.flagged),
            "records": [
                {
                    "seed": r.seed,
                    "d": r.d,
                    "ratio": r.ratio,
                    "coeff_norm": r.coeff_norm,
                    "op_norm": r.op_norm,
                    "bound": r.bound,
                }
                for r in self.records
            ],
        }


def _campaign_trial(basis: str, K: int, n: int, degree: int, rng) -> tuple:
    if basis == "gm":
        coeffs = gm.random_observable(K, n, degree, rng)
        mat = gm.gm_reconstruct(coeffs)
    else:
        coeffs = hw.random_observable(K, n, degree, rng)
        mat = hw.hw_reconstruct(coeffs)
    d = infer_degree(coeffs)
    norm = lp_coeff_norm(coeffs, ratio_exponent(coeffs))
    opn = tensor.op_norm(mat)
    return d, norm, opn


def bh_campaign(
    basis: str,
    K: int,
    n: int,
    degree: int,
    trials: int,
    seed: int,
    *,
    threads: int = 1,
) -> BhReport:
    """Seeded random-observable ratio campaign.

    Each trial draws an independent stream from (seed, trial index), so the
    report does not depend on execution order or thread count.  Trials whose
    ratio exceeds the configured bound are flagged, never dropped.
    """
    basis = basis.lower()
    if basis not in ("gm", "hw"):
        raise InputError("basis must be 'gm' or 'hw'")
    if trials < 1:
        raise InputError("trials must be >= 1")
    root = CounterRng(seed)

    def run(idx: int):
        return _campaign_trial(basis, K, n, degree, root.spawn(idx))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, range(trials)))
    else:
        outcomes = [run(idx) for idx in range(trials)]

    bound_fn = gm_ratio_bound if basis == "gm" else hw_ratio_bound
    records = []
    flagged = []
    for idx, (d, norm, opn) in enumerate(outcomes):
        bound = bound_fn(d, K)
        ratio = norm / opn
        records.append(BhTrial(idx, d, ratio, norm, opn, bound))
        if ratio > bound:
            flagged.append(idx)
    max_ratio = max(r.ratio for r in records)
    return BhReport(
        basis=basis,
        K=K,
        n=n,
        d=degree,
        trials=trials,
        max_ratio=max_ratio,
        bound_used=bound_fn(degree, K),
        flagged=flagged,
        records=records,
    )


# ---------------------------------------------------------------------------
# reduction correspondence


@dataclass
class ReductionReport:
    basis: str
    K: int
    n: int
    d: int
    points: int
    max_coeff_error: float
    max_unmapped: float
    sup_abs: float
    op_norm: float
    coeff_norm: float
    classical_norm: float
    reduction_constant: float
    classical_degree: int
    correspondence_ok: bool
    norm_inequality_ok: bool
    sup_ok: bool

    @property
    def passed(self) -> bool:
        return self.correspondence_ok and self.norm_inequality_ok and self.sup_ok

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "basis": self.basis,
            "K": self.K,
            "n": self.n,
            "d": self.d,
            "points": self.points,
            "max_coeff_error": self.max_coeff_error,
            "max_unmapped": self.max_unmapped,
            "sup_abs": self.sup_abs,
            "op_norm": self.op_norm,
            "coeff_norm": self.coeff_norm,
            "classical_norm": self.classical_norm,
            "reduction_constant": self.reduction_constant,
            "classical_degree": self.classical_degree,
            "correspondence_ok": bool(self.correspondence_ok),
            "norm_inequality_ok": bool(self.norm_inequality_ok),
            "sup_ok": bool(self.sup_ok),
            "passed": bool(self.passed),
        }


def verify_reduction(coeffs, *, coeff_tol: float = 1e-10) -> ReductionReport:
    """Exhaustively check the classical-side expansion of tr[A rho(.)].

    The classical values are produced from density matrices and the operator
    matrix (never from the coefficient polynomial), transformed exactly, and
    compared against the predicted coefficient images.
    """
    if isinstance(coeffs, GmCoeffs):
        return _verify_gm(coeffs, coeff_tol)
    if isinstance(coeffs, HwCoeffs):
        return _verify_hw(coeffs, coeff_tol)
    raise InputError("expected GmCoeffs or HwCoeffs")


def _verify_gm(coeffs: GmCoeffs, coeff_tol: float) -> ReductionReport:
    K, n = coeffs.K, coeffs.n
    width = gm.cube_width(K, n)
    if width > 20:
        raise CapacityError(f"cube arity {width} exceeds the exhaustive cap 20")
    mat = gm.gm_reconstruct(coeffs)
    opn = tensor.op_norm(mat)
    points = cube_points(width)
    values = gm.state_trace_values(mat, K, n, points)
    fhat = cube_fourier(values)
    expected = gm.expected_cube_coefficients(coeffs)
    err = 0.0
    residual = fhat.copy()
    for mask, val in expected.items():
        err = max(err, abs(residual[mask] - val))
        residual[mask] = 0.0
    unmapped = float(np.max(np.abs(residual))) if residual.size else 0.0
    sup = float(np.max(np.abs(values)))
    d = infer_degree(coeffs)
    p = bh_exponent(d)
    coeff_norm = lp_coeff_norm(coeffs, p)
    classical_norm = lp_coeff_norm(fhat, p)
    constant = gm_reduction_constant(d, K)
    masks = np.flatnonzero(np.abs(fhat) > coeff_tol)
    classical_degree = max((int(bin(int(b)).count("1")) for b in masks), default=0)
    return ReductionReport(
        basis="gm",
        K=K,
        n=n,
        d=d,
        points=points.shape[0],
        max_coeff_error=float(err),
        max_unmapped=unmapped,
        sup_abs=sup,
        op_norm=opn,
        coeff_norm=coeff_norm,
        classical_norm=classical_norm,
        reduction_constant=constant,
        classical_degree=classical_degree,
        correspondence_ok=bool(err <= coeff_tol and unmapped <= coeff_tol),
        norm_inequality_ok=bool(coeff_norm <= constant * classical_norm * (1 + 1e-9) + 1e-12),
        sup_ok=bool(sup <= opn + 1e-9),
    )


def _verify_hw(coeffs: HwCoeffs, coeff_tol: float) -> ReductionReport:
    K, n = coeffs.K, coeffs.n
    gens = hw.generator_set(K)
    arity = len(gens) * n
    if K**arity > GRID_CAP:
        raise CapacityError(f"grid of {K ** arity} points exceeds cap {GRID_CAP}")
    mat = hw.hw_reconstruct(coeffs)
    opn = tensor.op_norm(mat)
    grid = hw.reduction_grid_from_matrix(mat, K, n)
    fhat = cyclic_fourier(grid, K)
    expected = hw.expected_classical_coefficients(coeffs)
    err = 0.0
    residual = fhat.copy()
    for key, val in expected.items():
        err = max(err, abs(residual[key] - val))
        residual[key] = 0.0
    unmapped = float(np.max(np.abs(residual))) if residual.size else 0.0
    sup = float(np.max(np.abs(grid)))
    d = infer_degree(coeffs)
    prime = hw.is_prime(K)
    p = bh_exponent(d) if prime else bh_exponent((K - 1) * d)
    coeff_norm = lp_coeff_norm(coeffs, p)
    classical_norm = lp_coeff_norm(fhat, p)
    constant = float((K + 1) ** d) if prime else float(len(gens) ** d)
    flat = np.abs(fhat.reshape(-1))
    big = np.flatnonzero(flat > coeff_tol)
    classical_degree = 0
    for pos in big:
        exps = np.unravel_index(int(pos), fhat.shape)
        classical_degree = max(classical_degree, int(sum(exps)))
    return ReductionReport(
        basis="hw",
        K=K,
        n=n,
        d=d,
        points=grid.size,
        max_coeff_error=float(err),
        max_unmapped=unmapped,
        sup_abs=sup,
        op_norm=opn,
        coeff_norm=coeff_norm,
        classical_norm=classical_norm,
        reduction_constant=constant,
        classical_degree=classical_degree,
        correspondence_ok=bool(err <= coeff_tol and unmapped <= coeff_tol),
        norm_inequality_ok=bool(classical_norm >= coeff_norm / constant - 1e-12),
        sup_ok=bool(sup <= opn + 1e-9),
    )
