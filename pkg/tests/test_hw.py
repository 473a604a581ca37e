"""Heisenberg-Weyl frame: algebra, generator sets, eigensystems, ensembles."""

import math

import numpy as np
import pytest

from quditbh import bh, hw, tensor
from quditbh.errors import InputError, PreconditionError, ShapeError
from quditbh.rng import CounterRng


class TestClockShift:
    def test_k2_recovers_paulis(self):
        x, z = hw.clock_shift(2)
        assert np.array_equal(x.real, [[0, 1], [1, 0]])
        assert np.array_equal(z.real, [[1, 0], [0, -1]])

    def test_weyl_relation_k3(self):
        x, z = hw.clock_shift(3)
        omega = np.exp(2j * np.pi / 3)
        assert tensor.max_abs(z @ x - omega * (x @ z)) <= 1e-15

    @pytest.mark.parametrize("K", range(2, 9))
    def test_shift_power_is_identity_exactly(self, K):
        x, _ = hw.clock_shift(K)
        power = np.linalg.matrix_power(x.real.astype(np.int64), K)
        assert np.array_equal(power, np.eye(K, dtype=np.int64))

    @pytest.mark.parametrize("K", range(2, 9))
    def test_clock_power_exact_by_exponents(self, K):
        # Z^K at the label level: exponent arithmetic makes it exactly I.
        assert np.array_equal(hw.hw_matrix(K, 0, K % K), np.eye(K, dtype=complex))


class TestAlgebra:
    def test_power_law_example_k3(self):
        # (XZ)^2 = omega X^2 Z^2
        K = 3
        xz = hw.hw_matrix(K, 1, 1)
        omega = hw.roots(K)[1]
        np.testing.assert_allclose(xz @ xz, omega * hw.hw_matrix(K, 2, 2), atol=1e-14)

    @pytest.mark.parametrize("K", range(2, 7))
    def test_power_law_exhaustive(self, K):
        worst = 0.0
        for ell in range(K):
            for m in range(K):
                mat = hw.hw_matrix(K, ell, m)
                acc = np.eye(K, dtype=complex)
                for k in range(K):
                    phase = hw.half_roots(K)[hw.power_phase_exponent(K, ell, m, k)]
                    target = phase * hw.hw_matrix(K, (k * ell) % K, (k * m) % K)
                    worst = max(worst, tensor.max_abs(acc - target))
                    acc = acc @ mat
        assert worst <= 1e-12

    def test_commutation_exhaustive_k4(self):
        K = 4
        worst = 0.0
        for l1 in range(K):
            for m1 in range(K):
                a = hw.hw_matrix(K, l1, m1)
                for l2 in range(K):
                    for m2 in range(K):
                        b = hw.hw_matrix(K, l2, m2)
                        phase = hw.roots(K)[hw.commutation_exponent(K, l1, m1, l2, m2)]
                        worst = max(worst, tensor.max_abs(a @ b - phase * (b @ a)))
        assert worst <= 1e-12

    @pytest.mark.parametrize("K", range(2, 7))
    def test_orthonormal_basis(self, K):
        basis = hw.hw_basis(K)
        gram = np.einsum("aij,bij->ab", np.conj(basis), basis) / K
        np.testing.assert_allclose(gram, np.eye(K * K), atol=1e-12)


class TestExpansion:
    def test_single_basis_element(self):
        K = 3
        mat = np.kron(hw.hw_matrix(K, 1, 0), hw.hw_matrix(K, 0, 1))
        coeffs = hw.hw_expand(mat, K, 2)
        assert abs(coeffs.coeff(((1, 0), (0, 1))) - 1.0) <= 1e-13
        assert sum(1 for _ in coeffs.items()) == 1
        assert coeffs.degree() == 2

    def test_degree_counts_exponents(self):
        K = 3
        coeffs = hw.HwCoeffs.from_entries(K, 1, {((2, 2),): 1.0})
        assert coeffs.degree() == 4

    def test_round_trip(self):
        rng = CounterRng(19)
        mat = rng.complex_normal(81).reshape(9, 9)
        coeffs = hw.hw_expand(mat, 3, 2)
        np.testing.assert_allclose(hw.hw_reconstruct(coeffs), mat, atol=1e-12)

    def test_shape_guard(self):
        with pytest.raises(ShapeError):
            hw.hw_expand(np.eye(5), 3, 1)


class TestGeneratorSets:
    def test_prime_members(self):
        gens = hw.generator_set(3)
        assert gens.members == ((1, 0), (1, 1), (1, 2), (0, 1))
        assert all(gens.plus)

    def test_sigma4_cardinality(self):
        assert len(hw.generator_set(4)) == 11

    def test_k6_subgroup_intersection(self):
        inter = hw.subgroup(6, 1, 0) & hw.subgroup(6, 2, 3)
        assert inter == {(0, 0), (2, 0), (4, 0)}

    def test_gcd_convention(self):
        assert hw.gcd_star(6, 0, 2) == 2
        assert hw.gcd_star(6, 0, 1) == 1
        assert hw.gcd_star(4, 2, 2) == 2

    @pytest.mark.parametrize("K", range(2, 9))
    def test_coverage(self, K):
        assert hw.generator_set(K).covers_group()

    @pytest.mark.parametrize("K", [2, 3, 5, 7])
    def test_prime_pairwise_trivial_intersections(self, K):
        gens = hw.generator_set(K)
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                inter = hw.subgroup(K, *gens.members[i]) & hw.subgroup(K, *gens.members[j])
                assert inter == {(0, 0)}

    def test_k2_classification(self):
        gens = hw.generator_set(2)
        assert gens.classification((1, 1)) == "minus"
        assert gens.classification((1, 0)) == "plus"
        assert gens.classification((0, 1)) == "plus"


class TestEigensystems:
    def test_shift_eigenvectors_are_fourier_modes(self):
        K = 3
        system = hw.hw_eigensystem(K, 1, 0)
        omega = hw.roots(K)
        for p in range(K):
            expected = omega[(-np.arange(K) * p) % K] / math.sqrt(K)
            np.testing.assert_allclose(system.vectors[:, p], expected, atol=1e-14)
            assert abs(system.eigenvalues[p] - omega[p]) <= 1e-14

    def test_k4_xz_lives_off_the_k_torus(self):
        system = hw.hw_eigensystem(4, 1, 1)
        assert not system.plus
        eighth = np.exp(1j * np.pi / 4)
        expected = sorted(np.angle(eighth * hw.roots(4)))
        np.testing.assert_allclose(sorted(np.angle(system.eigenvalues)), expected, atol=1e-12)

    def test_k4_21_even_quotient(self):
        # d = gcd(4,2) = 2, K1 = 2 even, ell*m = 2 even -> spectrum Omega_4
        system = hw.hw_eigensystem(4, 2, 1)
        assert system.plus
        assert system.max_residual <= 1e-10
        # eigenvalue formula omega^{lm/2 + d t + m s}: spot-check one pair
        omega = hw.roots(4)
        vec = system.vectors[:, (1 + 2 * 1 + 1 * 0) % 4]  # s=0, t=1
        op = hw.hw_matrix(4, 2, 1)
        np.testing.assert_allclose(op @ vec, omega[3] * vec, atol=1e-12)

    @pytest.mark.parametrize("K", range(3, 9))
    def test_all_coprime_labels(self, K):
        for ell in range(K):
            for m in range(K):
                if hw.gcd_star(K, ell, m) != 1:
                    continue
                system = hw.hw_eigensystem(K, ell, m)
                assert system.max_residual <= 1e-10
                gram = np.conj(system.vectors.T) @ system.vectors
                assert tensor.max_abs(gram - np.eye(K)) <= 1e-12

    def test_refuses_non_coprime(self):
        with pytest.raises(PreconditionError):
            hw.hw_eigensystem(4, 2, 2)
        with pytest.raises(PreconditionError):
            hw.hw_eigensystem(6, 0, 2)

    def test_eigenvector_orthogonality_outside_subgroup(self):
        K = 5
        system = hw.hw_eigensystem(K, 1, 2)
        members = hw.subgroup(K, 1, 2)
        for ell in range(K):
            for m in range(K):
                if (ell, m) in members:
                    continue
                mat = hw.hw_matrix(K, ell, m)
                vals = np.einsum("ip,ij,jp->p", np.conj(system.vectors), mat, system.vectors)
                assert float(np.max(np.abs(vals))) <= 1e-10


class TestEnsembles:
    def test_phase_validation(self):
        with pytest.raises(InputError):
            hw.phase_exponent(3, 0.5)
        with pytest.raises(InputError):
            hw.phase_exponent(3, np.exp(1j * 0.4))
        assert hw.phase_exponent(3, np.exp(4j * np.pi / 3)) == 2

    def test_density_matrix_properties(self):
        for K in (2, 3, 4, 5):
            gens = hw.generator_set(K)
            exps = CounterRng(K).integers(len(gens), K)
            rho = hw.ensemble_state_from_exponents(K, exps)
            assert abs(np.trace(rho) - 1.0) <= 1e-12
            w, _ = tensor.hermitian_eigs(rho)
            assert w[0] >= -1e-12

    def test_prime_trace_display(self):
        K = 3
        gens = hw.generator_set(K)
        exps = CounterRng(7).integers(len(gens), K)
        rho = hw.ensemble_state_from_exponents(K, exps)
        for gidx, (ell, m) in enumerate(gens.members):
            for k in range(1, K):
                op = hw.hw_matrix(K, (k * ell) % K, (k * m) % K)
                lhs = np.trace(op @ rho)
                phase = hw.half_roots(K)[(-k * (k - 1) * ell * m) % (2 * K)]
                rhs = phase * hw.roots(K)[(exps[gidx] * k) % K] / (K + 1)
                assert abs(lhs - rhs) <= 1e-12

    def test_cross_terms_vanish(self):
        K = 3
        gens = hw.generator_set(K)
        for ell1, m1 in gens.members:
            system = hw.hw_eigensystem(K, ell1, m1)
            for ell, m in gens.members:
                if (ell, m) == (ell1, m1):
                    continue
                op = hw.hw_matrix(K, ell, m)
                vals = np.einsum("ip,ij,jp->p", np.conj(system.vectors), op, system.vectors)
                assert float(np.max(np.abs(vals))) <= 1e-12

    def test_nonprime_trace_display(self):
        K = 4
        gens = hw.generator_set(K)
        exps = CounterRng(9).integers(len(gens), K)
        rho = hw.ensemble_state_from_exponents(K, exps)
        terms = hw.site_trace_terms(K)
        for ell in range(K):
            for m in range(K):
                if (ell, m) == (0, 0):
                    continue
                lhs = np.trace(hw.hw_matrix(K, ell, m) @ rho)
                rhs = sum(
                    ph * hw.roots(K)[(exps[g] * k) % K] for g, k, ph in terms[(ell, m)]
                ) / len(gens)
                assert abs(lhs - rhs) <= 1e-12

    def test_ensemble_states_batch_matches_single(self):
        K = 4
        gens = hw.generator_set(K)
        exps = CounterRng(31).integers(3 * len(gens), K).reshape(3, len(gens))
        batch = hw.ensemble_states(K, exps)
        for b in range(3):
            single = hw.ensemble_state_from_exponents(K, exps[b])
            np.testing.assert_allclose(batch[b], single, atol=1e-14)


class TestReduction:
    def test_identity_constant_one(self):
        coeffs = hw.HwCoeffs.from_entries(3, 1, {((0, 0),): 1.0})
        grid = hw.reduction_grid_from_matrix(hw.hw_reconstruct(coeffs), 3, 1)
        np.testing.assert_allclose(grid, 1.0, atol=1e-13)

    def test_xz_single_monomial_modulus(self):
        # K=3, A = XZ: one cyclic monomial of degree 1 with modulus 1/4.
        K = 3
        coeffs = hw.HwCoeffs.from_entries(K, 1, {((1, 1),): 1.0})
        grid = hw.reduction_grid_from_matrix(hw.hw_reconstruct(coeffs), K, 1)
        fhat = bh.cyclic_fourier(grid, K)
        support = np.argwhere(np.abs(fhat) > 1e-12)
        assert len(support) == 1
        exponents = tuple(support[0])
        assert sum(exponents) == 1
        assert abs(abs(fhat[exponents]) - 0.25) <= 1e-12
        expected = hw.expected_classical_coefficients(coeffs)
        assert set(expected) == {exponents}
        assert abs(fhat[exponents] - expected[exponents]) <= 1e-12

    def test_sup_below_op_norm(self):
        rng = CounterRng(61)
        coeffs = hw.random_observable(3, 1, 2, rng)
        grid = hw.reduction_grid_from_matrix(hw.hw_reconstruct(coeffs), 3, 1)
        assert float(np.max(np.abs(grid))) <= tensor.op_norm(hw.hw_reconstruct(coeffs)) + 1e-9

    def test_reduction_value_matches_grid(self):
        rng = CounterRng(62)
        coeffs = hw.random_observable(3, 2, 2, rng)
        grid = hw.reduction_grid_from_matrix(hw.hw_reconstruct(coeffs), 3, 2)
        gens = hw.generator_set(3)
        picks = CounterRng(63).integers(5 * 2 * len(gens), 3).reshape(5, 2, len(gens))
        for exps in picks:
            flat = tuple(int(v) for v in exps.reshape(-1))
            assert abs(hw.reduction_value(coeffs, exps) - grid[flat]) <= 1e-12

    def test_disjoint_monomial_supports_k4(self):
        # distinct single-site labels never share classical monomials
        K = 4
        seen = {}
        for ell in range(K):
            for m in range(K):
                if (ell, m) == (0, 0):
                    continue
                coeffs = hw.HwCoeffs.from_entries(K, 1, {((ell, m),): 1.0})
                for key in hw.expected_classical_coefficients(coeffs):
                    assert key not in seen, f"monomial shared by {(ell, m)} and {seen[key]}"
                    seen[key] = (ell, m)


class TestRandomObservables:
    def test_unit_norm_and_degree(self):
        rng = CounterRng(70)
        coeffs = hw.random_observable(4, 1, 2, rng)
        assert abs(tensor.op_norm(hw.hw_reconstruct(coeffs)) - 1.0) <= 1e-9
        assert coeffs.degree() <= 2
