"""Low-degree observable learning and second-moment (noise stability) tools.

The estimator samples uniform sign-cube points, reads off empirical frame
coefficients from the trace function, thresholds them to convert the sup-norm
guarantee into an L2 one, and reconstructs an approximating observable.  The
second half of the module carries the exact Haar second-moment channel, the
degree-weighted stability bound, Monte-Carlo product-state ensembles, and the
truncation-based learner for targets of arbitrary degree.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from quditbh import gm, hw, tensor
from quditbh.errors import ContractError, InputError, PreconditionError, ShapeError
from quditbh.gm import GmCoeffs
from quditbh.hw import HwCoeffs
from quditbh.rng import CounterRng

DEFAULT_SAMPLE_CAP = 1_000_000


# ---------------------------------------------------------------------------
# coefficient thresholding


@dataclass(frozen=True)
class EiParams:
    """Threshold parameters: degree d, sup-norm accuracy eta, norm budget B."""

    d: int
    eta: float
    B: float

    def __post_init__(self):
        if self.d < 1:
            raise InputError("degree must be >= 1")
        if self.eta <= 0 or self.B <= 0:
            raise InputError("eta and B must be positive")

    @property
    def threshold(self) -> float:
        return self.eta * (1.0 + math.sqrt(self.d + 1.0))


def ei_threshold(w, params: EiParams) -> np.ndarray:
    """Zero every entry with |w_j| below eta (1 + sqrt(d+1))."""
    arr = np.asarray(w, dtype=np.complex128)
    return np.where(np.abs(arr) >= params.threshold, arr, 0.0)


def ei_error_bound(params: EiParams) -> float:
    """L2^2 guarantee (e^5 eta^2 d B^{2d})^{1/(d+1)} for admissible (v, w)."""
    d = params.d
    return float(
        (math.exp(5.0) * params.eta**2 * d * params.B ** (2 * d)) ** (1.0 / (d + 1.0))
    )


# ---------------------------------------------------------------------------
# learning configuration


@dataclass
class LearningConfig:
    K: int
    n: int
    d: int
    epsilon: float
    delta: float
    op_norm_bound: float = 1.0
    bh_constant: float | None = None
    sample_cap: int | None = DEFAULT_SAMPLE_CAP
    seed: int = 0
    chunk: int = 65_536

    def __post_init__(self):
        if self.d < 1:
            raise InputError("degree must be >= 1")
        if not (0.0 < self.epsilon < 1.0) or not (0.0 < self.delta < 1.0):
            raise InputError("epsilon and delta must lie in (0, 1)")
        if self.op_norm_bound <= 0:
            raise InputError("operator norm bound must be positive")

    def frame_constant(self) -> float:
        """Coefficient-norm budget constant for the GM frame at degree d."""
        if self.bh_constant is not None:
            return float(self.bh_constant)
        from quditbh.bh import gm_ratio_bound

        return gm_ratio_bound(self.d, self.K)


def sample_count(cfg: LearningConfig) -> int:
    """ceil(e^6 d^2 (18 K^3 C ||A||)^{2d} ln(2 e n / delta) eps^{-(d+1)})."""
    c = cfg.frame_constant() * cfg.op_norm_bound
    value = (
        math.exp(6.0)
        * cfg.d**2
        * (18.0 * cfg.K**3 * c) ** (2 * cfg.d)
        * math.log(2.0 * math.e * cfg.n / cfg.delta)
        * cfg.epsilon ** (-(cfg.d + 1))
    )
    return int(math.ceil(value))


def formula_eta(cfg: LearningConfig) -> float:
    """eta^2 = eps^{d+1} e^{-5} d^{-1} (C ||A||)^{-2d}."""
    c = cfg.frame_constant() * cfg.op_norm_bound
    return math.sqrt(
        cfg.epsilon ** (cfg.d + 1) * math.exp(-5.0) / cfg.d * c ** (-2 * cfg.d)
    )


def coefficient_count(K: int, n: int, d: int) -> int:
    """Number of multi-indices with degree <= d (identity included)."""
    return sum(math.comb(n, k) * (K * K - 1) ** k for k in range(min(d, n) + 1))


# ---------------------------------------------------------------------------
# the low-degree learner


@dataclass
class LearningReport:
    config: LearningConfig
    s_formula: int
    s: int
    capped: bool
    eta_formula: float
    eta: float
    threshold: float
    recompute: str
    l2_sq_error: float
    coeff_errors: list = field(default_factory=list)
    ensemble_checks: list = field(default_factory=list)
    wall_time_s: float = 0.0
    estimate: GmCoeffs | None = None

    def to_json_dict(self) -> dict:
        # wall time is intentionally absent: reports must be byte-stable.
        return {
            "schema": 1,
            "config": {
                "K": self.config.K,
                "n": self.config.n,
                "d": self.config.d,
                "epsilon": self.config.epsilon,
                "delta": self.config.delta,
                "op_norm_bound": self.config.op_norm_bound,
                "bh_constant": self.config.frame_constant(),
                "sample_cap": self.config.sample_cap,
                "seed": self.config.seed,
            },
            "s_formula": self.s_formula,
            "s": self.s,
            "capped": bool(self.capped),
            "eta_formula": self.eta_formula,
            "eta": self.eta,
            "t": self.threshold,
            "recompute": self.recompute,
            "l2_sq_error": self.l2_sq_error,
            "coeff_errors": [
                {"index": idx, "err": err} for idx, err in self.coeff_errors
            ],
            "ensemble_checks": list(self.ensemble_checks),
        }


def _monomial_columns(signs: np.ndarray, coord_sets: list[tuple[int, ...]]) -> np.ndarray:
    cols = np.empty((signs.shape[0], len(coord_sets)))
    for j, coords in enumerate(coord_sets):
        if not coords:
            cols[:, j] = 1.0
            continue
        acc = signs[:, coords[0]].astype(np.float64)
        for coord in coords[1:]:
            acc = acc * signs[:, coord]
        cols[:, j] = acc
    return cols


def _sample_accumulate(rng, s: int, chunk: int, K: int, n: int, d: int, coeff_vec, coords, width: int):
    """Stream s cube samples; return (sums of f*chi per index, sum of |f|^2).

    coeff_vec holds c^{|alpha|} A_hat(alpha) in `gm.low_degree_indices` order,
    so f is evaluated and the monomial averages are accumulated with blocked
    GEMMs (one slab per site, one w x w block per site pair for d = 2).
    """
    total = len(coeff_vec)
    sums = np.zeros(total, dtype=np.complex128)
    sum_sq = 0.0
    done = 0
    if d > 2:
        while done < s:
            block = min(chunk, s - done)
            signs = rng.sign_matrix(block, width)
            cols = _monomial_columns(signs, coords)
            fvals = cols @ coeff_vec.real + 1j * (cols @ coeff_vec.imag)
            sums += cols.T @ fvals.real + 1j * (cols.T @ fvals.imag)
            sum_sq += float(np.sum(fvals.real**2 + fvals.imag**2))
            done += block
        return sums, sum_sq

    from itertools import combinations

    w = K * K - 1
    pairs = list(combinations(range(n), 2)) if d >= 2 else []
    c1 = coeff_vec[1 : 1 + n * w]
    pair_blocks = {}
    offset = 1 + n * w
    for pair in pairs:
        pair_blocks[pair] = coeff_vec[offset : offset + w * w].reshape(w, w)
        offset += w * w
    while done < s:
        block = min(chunk, s - done)
        floats = rng.sign_matrix(block, width).astype(np.float64)
        slabs = [floats[:, a * w : (a + 1) * w] for a in range(n)]
        f = np.full(block, coeff_vec[0], dtype=np.complex128)
        f += floats @ c1.real + 1j * (floats @ c1.imag)
        for pair in pairs:
            cmat = pair_blocks[pair]
            if not np.any(cmat):
                continue
            left, right = slabs[pair[0]], slabs[pair[1]]
            f += ((left @ cmat.real) * right).sum(axis=1)
            f += 1j * ((left @ cmat.imag) * right).sum(axis=1)
        f_re = np.ascontiguousarray(f.real)
        f_im = np.ascontiguousarray(f.imag)
        sums[0] += complex(f_re.sum(), f_im.sum())
        sums[1 : 1 + n * w] += floats.T @ f_re + 1j * (floats.T @ f_im)
        offset = 1 + n * w
        for pair in pairs:
            left, right = slabs[pair[0]], slabs[pair[1]]
            acc = (left * f_re[:, None]).T @ right + 1j * ((left * f_im[:, None]).T @ right)
            sums[offset : offset + w * w] += acc.reshape(-1)
            offset += w * w
        sum_sq += float(f_re @ f_re + f_im @ f_im)
        done += block
    return sums, sum_sq


def learn_low_degree(target: GmCoeffs, cfg: LearningConfig) -> LearningReport:
    """Sample-based estimate of a degree-<=d observable.

    Draws s uniform cube points, evaluates the trace function through the
    verified multilinear form, averages sign monomials into empirical
    coefficients, thresholds, and reports the Parseval L2^2 error against the
    target.  When the sample formula exceeds the cap, s is clamped and eta is
    recomputed as the empirical-Bernstein sup-norm radius at confidence
    1 - delta (the formula eta would be meaningless at the capped s).
    """
    started = time.perf_counter()
    K, n, d = cfg.K, cfg.n, cfg.d
    if (target.K, target.n) != (K, n):
        raise ShapeError("target and config disagree on (K, n)")
    if target.degree() > d:
        raise PreconditionError(f"target degree {target.degree()} exceeds d={d}")
    target_norm = tensor.op_norm(gm.gm_reconstruct(target))
    if target_norm > cfg.op_norm_bound + 1e-9:
        raise PreconditionError(
            f"target operator norm {target_norm:.6g} exceeds bound {cfg.op_norm_bound}"
        )

    s_formula = sample_count(cfg)
    cap = cfg.sample_cap
    capped = cap is not None and s_formula > cap
    s = int(cap) if capped else s_formula

    indices = gm.low_degree_indices(K, n, d)
    coords = [gm.cube_coordinates(K, multi) for multi in indices]
    scale = gm.reduction_scale(K)
    weights = np.array([scale ** len(c) for c in coords])
    coeff_vec = np.array([target.coeff(multi) for multi in indices]) * weights

    width = gm.cube_width(K, n)
    rng = CounterRng(cfg.seed)
    sums, sum_sq = _sample_accumulate(rng, s, cfg.chunk, K, n, d, coeff_vec, coords, width)

    raw_means = sums / s
    mean_sq = sum_sq / s
    inv_weights = 1.0 / weights
    empirical = raw_means * inv_weights  # W(alpha) = c^{-|alpha|} mean(f chi)

    eta_form = formula_eta(cfg)
    if capped:
        # Empirical-Bernstein sup-norm radius, union over all coefficients
        # and the two real components of each.
        total = coefficient_count(K, n, d)
        level = math.log(4.0 * total / cfg.delta)
        variances = np.maximum(mean_sq * inv_weights**2 - np.abs(empirical) ** 2, 0.0)
        ranges = inv_weights * cfg.op_norm_bound
        radii = np.sqrt(2.0 * level * variances / s) + 7.0 * ranges * level / (
            3.0 * max(s - 1, 1)
        )
        eta = float(math.sqrt(2.0) * np.max(radii))
        recompute = "empirical-bernstein"
    else:
        eta = eta_form
        recompute = "formula"

    params = EiParams(d=d, eta=eta, B=cfg.frame_constant() * cfg.op_norm_bound)
    kept = ei_threshold(empirical, params)

    estimate = GmCoeffs.zeros(K, n)
    for multi, value in zip(indices, kept):
        if value != 0.0:
            estimate.tensor[tuple(gm.label_index(K, lab) for lab in multi)] = value

    truth = np.array([target.coeff(multi) for multi in indices])
    per_coeff = np.abs(kept - truth)
    l2_sq = float(np.sum(per_coeff**2))
    diff = estimate.copy()
    diff.tensor = estimate.tensor - target.tensor
    ensemble_checks = [
        {
            "ensemble": "haar_product_pure",
            "mse_closed_form": haar_product_second_moment(diff),
            "stability_bound": noise_stability_bound(diff),
        }
    ]
    report = LearningReport(
        config=cfg,
        s_formula=s_formula,
        s=s,
        capped=capped,
        eta_formula=eta_form,
        eta=eta,
        threshold=params.threshold,
        recompute=recompute,
        l2_sq_error=l2_sq,
        coeff_errors=[
            (tuple(int(gm.label_index(K, lab)) for lab in multi), float(err))
            for multi, err in zip(indices, per_coeff)
        ],
        ensemble_checks=ensemble_checks,
        wall_time_s=time.perf_counter() - started,
        estimate=estimate,
    )
    return report


def random_sparse_target(
    K: int,
    n: int,
    d: int,
    rng: CounterRng,
    *,
    terms: int = 4,
    magnitude_floor: float = 0.5,
) -> GmCoeffs:
    """Unit-norm mixture of a few degree-<=d frame monomials.

    Coefficient magnitudes start in [floor, 1] before normalization, which
    keeps the surviving coefficients well above the capped-sample threshold;
    this is the regime in which the thresholding estimator is informative.
    """
    pool = gm.low_degree_indices(K, n, d)[1:]
    count = min(terms, len(pool))
    picks = []
    for _ in range(count):
        j = int(rng.integers(1, len(pool))[0])
        picks.append(pool.pop(j))
    magnitudes = magnitude_floor + (1.0 - magnitude_floor) * rng.uniform(count)
    signs = rng.signs(count).astype(np.float64)
    out = GmCoeffs.zeros(K, n)
    for multi, mag, sign in zip(picks, magnitudes, signs):
        out.tensor[tuple(gm.label_index(K, lab) for lab in multi)] = mag * sign
    out.tensor /= tensor.op_norm(gm.gm_reconstruct(out))
    return out


# ---------------------------------------------------------------------------
# truncation


def truncate(coeffs, d: int):
    """Keep coefficients of degree <= d (basis-appropriate degree)."""
    if d < 0:
        raise InputError("truncation degree must be >= 0")
    if isinstance(coeffs, GmCoeffs):
        table = gm.degree_table(coeffs.K, coeffs.n)
        out = coeffs.copy()
        out.tensor = np.where(table <= d, out.tensor, 0.0)
        return out
    if isinstance(coeffs, HwCoeffs):
        table = hw.degree_table(coeffs.K, coeffs.n)
        out = coeffs.copy()
        out.tensor = np.where(table <= d, out.tensor, 0.0)
        return out
    raise InputError("expected GmCoeffs or HwCoeffs")


# ---------------------------------------------------------------------------
# Haar second-moment channel


def swap_operator(K: int) -> np.ndarray:
    """F = sum_{j,k} |j k><k j| on C^K (x) C^K."""
    out = np.zeros((K * K, K * K), dtype=np.complex128)
    for j in range(K):
        for k in range(K):
            out[j * K + k, k * K + j] = 1.0
    return out


@dataclass
class MomentChannelResult:
    K: int
    left: np.ndarray
    right: np.ndarray
    output: np.ndarray


def haar_moment_channel(K: int, left, right, *, tol: float = 1e-9) -> MomentChannelResult:
    """Exact E_U [(U^t left U) (x) (U^t right U)] under Haar measure.

    Identity pair -> I (x) I; traceless pair -> tr[F left (x) right]
    / (K^2 - 1) * (F - I/K).  Anything else violates the contract.
    """
    a = np.asarray(left, dtype=np.complex128)
    b = np.asarray(right, dtype=np.complex128)
    if a.shape != (K, K) or b.shape != (K, K):
        raise ShapeError(f"factors must be {K}x{K}")
    eye = np.eye(K)
    a_id = float(np.max(np.abs(a - eye))) <= tol
    b_id = float(np.max(np.abs(b - eye))) <= tol
    if a_id and b_id:
        return MomentChannelResult(K, a, b, np.eye(K * K, dtype=np.complex128))
    a_tr0 = abs(np.trace(a)) <= tol
    b_tr0 = abs(np.trace(b)) <= tol
    if not (a_tr0 and b_tr0):
        raise ContractError(
            "moment channel needs either an identity pair or two traceless factors"
        )
    swap = swap_operator(K)
    weight = complex(np.trace(swap @ np.kron(a, b)))
    output = weight / (K * K - 1.0) * (swap - np.eye(K * K) / K)
    return MomentChannelResult(K, a, b, output)


def haar_unitaries(K: int, count: int, rng: CounterRng) -> np.ndarray:
    """Haar-distributed unitaries via QR of Ginibre draws with the standard
    phase fix (used only as the Monte-Carlo oracle)."""
    g = rng.complex_normal(count * K * K).reshape(count, K, K)
    q, r = np.linalg.qr(g)
    diag = np.einsum("bii->bi", r)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_moment_mc(K: int, left, right, samples: int, rng: CounterRng):
    """Monte-Carlo estimate of the moment channel: (mean, per-entry stderr)."""
    a = np.asarray(left, dtype=np.complex128)
    b = np.asarray(right, dtype=np.complex128)
    mean = np.zeros((K * K, K * K), dtype=np.complex128)
    second = np.zeros((K * K, K * K))
    done = 0
    chunk = max(1, min(samples, 1 << 14))
    while done < samples:
        block = min(chunk, samples - done)
        us = haar_unitaries(K, block, rng)
        ud = np.conj(np.transpose(us, (0, 2, 1)))
        ta = np.einsum("bij,jk,bkl->bil", ud, a, us)
        tb = np.einsum("bij,jk,bkl->bil", ud, b, us)
        prod = np.einsum("bij,bkl->bikjl", ta, tb).reshape(block, K * K, K * K)
        mean += prod.sum(axis=0)
        second += (np.abs(prod) ** 2).sum(axis=0)
        done += block
    mean /= samples
    second /= samples
    variance = np.maximum(second - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(variance / samples)
    return mean, stderr


# ---------------------------------------------------------------------------
# noise stability and product-state ensembles


def noise_stability_bound(coeffs: GmCoeffs) -> float:
    """sum_alpha (K/(K^2-1))^{|alpha|} |A_hat(alpha)|^2."""
    K = coeffs.K
    table = gm.degree_table(K, coeffs.n).astype(np.float64)
    factor = (K / (K * K - 1.0)) ** table
    return float(np.sum(factor * np.abs(coeffs.tensor) ** 2))


def haar_product_second_moment(coeffs: GmCoeffs) -> float:
    """Exact E |tr[A rho]|^2 for independent Haar-random pure sites:
    per-site factor 1/(K+1)."""
    K = coeffs.K
    table = gm.degree_table(K, coeffs.n).astype(np.float64)
    factor = (1.0 / (K + 1.0)) ** table
    return float(np.sum(factor * np.abs(coeffs.tensor) ** 2))


ENSEMBLES = ("haar_product_pure", "gm_cube", "hw_phase")


def _product_rows(parts: list[np.ndarray]) -> np.ndarray:
    out = parts[0]
    for nxt in parts[1:]:
        out = np.einsum("bi,bj->bij", out, nxt).reshape(out.shape[0], -1)
    return out


def _trace_against_states(mat: np.ndarray, sites: list[np.ndarray]) -> np.ndarray:
    rho = sites[0]
    for nxt in sites[1:]:
        batch, dim = rho.shape[0], rho.shape[1]
        k = nxt.shape[1]
        rho = np.einsum("bij,bkl->bikjl", rho, nxt).reshape(batch, dim * k, dim * k)
    return np.einsum("ij,bji->b", mat, rho, optimize=True)


def l2di_expectation(
    coeffs: GmCoeffs, ensemble: str, samples: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo E |tr[A rho]|^2 over a product-state ensemble.

    Returns (estimate, standard error).  Ensembles: independent Haar pure
    sites, uniform sign-cube states, uniform phase-grid eigenprojector
    averages.
    """
    if ensemble not in ENSEMBLES:
        raise InputError(f"unknown ensemble {ensemble!r}; pick one of {ENSEMBLES}")
    if samples < 2:
        raise InputError("need at least two samples")
    K, n = coeffs.K, coeffs.n
    mat = gm.gm_reconstruct(coeffs)
    rng = CounterRng(seed)
    values = np.empty(samples)
    done = 0
    chunk = max(1, min(samples, 1 << 13))
    while done < samples:
        block = min(chunk, samples - done)
        if ensemble == "haar_product_pure":
            parts = []
            for _ in range(n):
                vecs = rng.complex_normal(block * K).reshape(block, K)
                vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
                parts.append(vecs)
            rows = _product_rows(parts)
            traces = np.einsum("bi,ij,bj->b", np.conj(rows), mat, rows, optimize=True)
        elif ensemble == "gm_cube":
            width = gm.cube_width(K, n)
            signs = rng.sign_matrix(block, width)
            sites = [
                gm.site_states(K, signs[:, s * (K * K - 1) : (s + 1) * (K * K - 1)])
                for s in range(n)
            ]
            traces = _trace_against_states(mat, sites)
        else:
            gens = hw.generator_set(K)
            sites = []
            for _ in range(n):
                exps = rng.integers(block * len(gens), K).reshape(block, len(gens))
                sites.append(hw.ensemble_states(K, exps))
            traces = _trace_against_states(mat, sites)
        values[done : done + block] = np.abs(traces) ** 2
        done += block
    est = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples))
    return est, stderr


# ---------------------------------------------------------------------------
# arbitrary-degree learning


@dataclass
class ArbitraryReport:
    epsilon: float
    delta: float
    d: int
    truncation_l2_sq: float
    truncation_bound: float
    low_degree: LearningReport
    haar_product_mse: float
    estimate: GmCoeffs

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "d": self.d,
            "truncation_l2_sq": self.truncation_l2_sq,
            "truncation_bound": self.truncation_bound,
            "haar_product_mse": self.haar_product_mse,
            "low_degree": self.low_degree.to_json_dict(),
        }


def truncation_degree(K: int, epsilon: float) -> int:
    """ceil(log_{K^2-1}(4/epsilon)), natural-log ratio, ties rounded up."""
    if not 0.0 < epsilon < 1.0:
        raise InputError("epsilon must lie in (0, 1)")
    return max(1, int(math.ceil(math.log(4.0 / epsilon) / math.log(K * K - 1.0))))


def learn_arbitrary(
    target: GmCoeffs,
    epsilon: float,
    delta: float,
    seed: int,
    *,
    sample_cap: int | None = DEFAULT_SAMPLE_CAP,
    bh_constant: float | None = None,
) -> ArbitraryReport:
    """Learn a bounded observable of any degree via degree truncation.

    Requires operator norm <= 1.  Picks d = ceil(log_{K^2-1}(4/eps)), learns
    the truncation with budget eps/4, and reports both error components plus
    the exact Haar-product mean-squared error of the final estimate.
    """
    K, n = target.K, target.n
    norm = tensor.op_norm(gm.gm_reconstruct(target))
    if norm > 1.0 + 1e-9:
        raise PreconditionError(f"operator norm {norm:.6g} exceeds 1")
    d = min(truncation_degree(K, epsilon), n)
    truncated = truncate(target, d)
    tail = target.copy()
    tail.tensor = target.tensor - truncated.tensor
    trunc_l2 = tail.l2_sq()
    trunc_bound = (K / (K * K - 1.0)) ** d * target.l2_sq()
    trunc_norm = tensor.op_norm(gm.gm_reconstruct(truncated))
    cfg = LearningConfig(
        K=K,
        n=n,
        d=d,
        epsilon=epsilon / 4.0,
        delta=delta,
        op_norm_bound=max(1.0, trunc_norm * (1.0 + 1e-12)),
        bh_constant=bh_constant,
        sample_cap=sample_cap,
        seed=seed,
    )
    low = learn_low_degree(truncated, cfg)
    diff = target.copy()
    diff.tensor = low.estimate.tensor - target.tensor
    mse = haar_product_second_moment(diff)
    return ArbitraryReport(
        epsilon=epsilon,
        delta=delta,
        d=d,
        truncation_l2_sq=trunc_l2,
        truncation_bound=trunc_bound,
        low_degree=low,
        haar_product_mse=mse,
        estimate=low.estimate,
    )
