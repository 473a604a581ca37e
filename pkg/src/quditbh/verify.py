"""Identity suites: algebraic and state-construction checks for one K.

Each check returns its worst observed error and the tolerance it was held to;
the CLI `verify` and `eigen` subcommands serialize these results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from quditbh import gm, hw, tensor
from quditbh.rng import CounterRng


@dataclass
class Check:
    name: str
    max_error: float
    tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "max_error": float(self.max_error),
            "tol": float(self.tol),
            "passed": bool(self.passed),
        }


def _check(name: str, err: float, tol: float) -> Check:
    err = float(err)
    return Check(name, err, tol, err <= tol)


# ---------------------------------------------------------------------------
# GM suite


def gm_suite(K: int, seed: int = 0, samples: int = 10_000) -> list[Check]:
    checks: list[Check] = []
    basis = gm.gm_basis(K)
    count = K * K

    gram = np.einsum("aij,bji->ab", basis, basis) / K
    checks.append(_check("gm.orthonormality", np.max(np.abs(gram - np.eye(count))), 1e-12))

    unit = np.einsum("aij,aji->a", basis[1:], basis[1:]).real / K
    checks.append(_check("gm.unit_trace_norm", np.max(np.abs(unit - 1.0)), 1e-12))

    if K == 2:
        pauli = np.array(
            [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
            dtype=np.complex128,
        )
        exact = all(np.array_equal(basis[i + 1], pauli[i]) for i in range(3))
        checks.append(Check("gm.pauli_recovery_exact", 0.0 if exact else 1.0, 0.0, exact))

    npairs = K * (K - 1) // 2
    anti_err = 0.0
    for idx in range(npairs):
        sym = basis[1 + idx]
        asym = basis[1 + npairs + idx]
        anti_err = max(anti_err, tensor.max_abs(sym @ asym + asym @ sym))
    checks.append(_check("gm.anticommutation_exact", anti_err, 0.0))

    sym_parts, asym_parts, _, _ = gm._site_state_parts(K)
    diag_err = 0.0
    for stack in (sym_parts, asym_parts):
        for idx in range(npairs):
            diag_err = max(
                diag_err,
                tensor.max_abs(np.diagonal(stack[idx, 0]) - np.diagonal(stack[idx, 1])),
            )
    for bit in (0, 1):
        for stack in (sym_parts, asym_parts):
            total = stack[:, bit].sum(axis=0)
            diag_err = max(
                diag_err, tensor.max_abs(np.diagonal(total) - 0.5 * (K - 1))
            )
    checks.append(_check("gm.projector_diagonal_identity", diag_err, 1e-12))

    # state construction identities, exhaustive for K <= 3
    width = K * K - 1
    if K <= 3:
        from quditbh.bh import cube_points

        points = cube_points(width)
    else:
        points = CounterRng(seed).sign_matrix(samples, width)
    states = gm.site_states(K, points)
    trace_err = np.max(np.abs(np.einsum("bii->b", states) - 1.0))
    checks.append(_check("gm.state_trace_one", trace_err, 1e-12))

    scale = gm.reduction_scale(K)
    traces = np.einsum("aij,bji->ba", basis[1:], states)
    action_err = np.max(np.abs(traces - scale * points.astype(np.float64)))
    checks.append(_check("gm.state_action_identities", action_err, 1e-12))

    eigs, _ = tensor.hermitian_eigs_batch(states)
    checks.append(_check("gm.state_min_eigenvalue", max(0.0, -float(eigs[:, 0].min())), 1e-12))

    rng = CounterRng(seed + 1)
    n = 2 if K**2 <= 64 else 1
    mat = rng.complex_normal(K ** (2 * n)).reshape(K**n, K**n)
    round_trip = tensor.max_abs(gm.gm_reconstruct(gm.gm_expand(mat, K, n)) - mat)
    checks.append(_check("gm.expand_round_trip", round_trip, 1e-12))
    return checks


# ---------------------------------------------------------------------------
# HW suite


def hw_suite(K: int, seed: int = 0) -> list[Check]:
    checks: list[Check] = []
    basis = hw.hw_basis(K)
    count = K * K

    gram = np.einsum("aij,bij->ab", np.conj(basis), basis) / K
    checks.append(_check("hw.orthonormality", np.max(np.abs(gram - np.eye(count))), 1e-12))

    shift, clock = hw.clock_shift(K)
    omega = hw.roots(K)[1]
    checks.append(_check("hw.weyl_relation", tensor.max_abs(clock @ shift - omega * (shift @ clock)), 1e-14))

    power = np.linalg.matrix_power(shift.real.astype(np.int64), K)
    exact = np.array_equal(power, np.eye(K, dtype=np.int64))
    checks.append(Check("hw.shift_order_exact", 0.0 if exact else 1.0, 0.0, exact))

    power_err = 0.0
    for ell in range(K):
        for m in range(K):
            mat = basis[ell * K + m]
            acc = np.eye(K, dtype=np.complex128)
            for k in range(K):
                expected = (
                    hw.half_roots(K)[hw.power_phase_exponent(K, ell, m, k)]
                    * basis[((k * ell) % K) * K + (k * m) % K]
                )
                power_err = max(power_err, tensor.max_abs(acc - expected))
                acc = acc @ mat
    checks.append(_check("hw.power_law", power_err, 1e-12))

    comm_err = 0.0
    for l1 in range(K):
        for m1 in range(K):
            left = basis[l1 * K + m1]
            for l2 in range(K):
                for m2 in range(K):
                    right = basis[l2 * K + m2]
                    phase = hw.roots(K)[hw.commutation_exponent(K, l1, m1, l2, m2)]
                    comm_err = max(
                        comm_err, tensor.max_abs(left @ right - phase * (right @ left))
                    )
    checks.append(_check("hw.commutation_phase", comm_err, 1e-12))

    gens = hw.generator_set(K)
    checks.append(Check("hw.subgroup_coverage", 0.0 if gens.covers_group() else 1.0, 0.0, gens.covers_group()))

    if hw.is_prime(K):
        pair_ok = True
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                inter = hw.subgroup(K, *gens.members[i]) & hw.subgroup(K, *gens.members[j])
                pair_ok = pair_ok and inter == {(0, 0)}
        checks.append(Check("hw.prime_trivial_intersections", 0.0 if pair_ok else 1.0, 0.0, pair_ok))

    if K == 6:
        ok = hw.gcd_star(6, 0, 2) == 2
        checks.append(Check("hw.gcd_convention", 0.0 if ok else 1.0, 0.0, ok))

    coprime = [
        (ell, m)
        for ell in range(K)
        for m in range(K)
        if hw.gcd_star(K, ell, m) == 1
    ]
    resid = max(hw.hw_eigensystem(K, ell, m).max_residual for ell, m in coprime)
    checks.append(_check("hw.eigenpair_residuals", resid, 1e-10))

    ortho_err = 0.0
    for ell1, m1 in coprime:
        system = hw.hw_eigensystem(K, ell1, m1)
        members = hw.subgroup(K, ell1, m1)
        for ell in range(K):
            for m in range(K):
                if (ell, m) in members:
                    continue
                mat = basis[ell * K + m]
                vals = np.einsum("ip,ij,jp->p", np.conj(system.vectors), mat, system.vectors)
                ortho_err = max(ortho_err, float(np.max(np.abs(vals))))
    checks.append(_check("hw.eigenvector_orthogonality", ortho_err, 1e-10))

    rng = CounterRng(seed + 2)
    draws = 32
    exps = rng.integers(draws * len(gens), K).reshape(draws, len(gens))
    states = hw.ensemble_states(K, exps)
    trace_err = np.max(np.abs(np.einsum("bii->b", states) - 1.0))
    checks.append(_check("hw.ensemble_trace_one", trace_err, 1e-12))
    eigs, _ = tensor.hermitian_eigs_batch(states)
    checks.append(_check("hw.ensemble_min_eigenvalue", max(0.0, -float(eigs[:, 0].min())), 1e-12))

    terms = hw.site_trace_terms(K)
    display_err = 0.0
    root = hw.roots(K)
    for b in range(draws):
        for ell in range(K):
            for m in range(K):
                if (ell, m) == (0, 0):
                    continue
                lhs = complex(np.trace(basis[ell * K + m] @ states[b]))
                rhs = sum(
                    ph * root[(exps[b, g] * k) % K] for g, k, ph in terms[(ell, m)]
                ) / len(gens)
                display_err = max(display_err, abs(lhs - rhs))
    checks.append(_check("hw.ensemble_trace_display", display_err, 1e-12))

    n = 2 if K <= 6 else 1
    mat = rng.complex_normal(K ** (2 * n)).reshape(K**n, K**n)
    round_trip = tensor.max_abs(hw.hw_reconstruct(hw.hw_expand(mat, K, n)) - mat)
    checks.append(_check("hw.expand_round_trip", round_trip, 1e-12))
    return checks


# ---------------------------------------------------------------------------
# eigensystem suite (closed forms for every coprime label)


def eigen_suite(K: int) -> list[Check]:
    checks: list[Check] = []
    worst_resid = 0.0
    class_ok = True
    unitary_err = 0.0
    for ell in range(K):
        for m in range(K):
            if hw.gcd_star(K, ell, m) != 1:
                continue
            system = hw.hw_eigensystem(K, ell, m)
            worst_resid = max(worst_resid, system.max_residual)
            gram = np.conj(system.vectors.T) @ system.vectors
            unitary_err = max(unitary_err, tensor.max_abs(gram - np.eye(K)))
            spectrum = {round(x) for x in np.angle(system.eigenvalues) * K / np.pi % (2 * K)}
            expected = {(2 * p + (0 if system.plus else 1)) % (2 * K) for p in range(K)}
            class_ok = class_ok and spectrum == expected
    checks.append(_check("eigen.residuals", worst_resid, 1e-10))
    checks.append(_check("eigen.vector_orthonormality", unitary_err, 1e-12))
    checks.append(Check("eigen.spectrum_classification", 0.0 if class_ok else 1.0, 0.0, class_ok))
    return checks


def full_suite(K: int, seed: int = 0, samples: int = 10_000) -> list[Check]:
    return gm_suite(K, seed, samples) + hw_suite(K, seed) + eigen_suite(K)
