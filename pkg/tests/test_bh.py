"""Ratio harness: classical oracles, norms, campaigns, reduction reports."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditbh import bh, gm, hw
from quditbh.errors import CapacityError, InputError
from quditbh.rng import CounterRng


class TestLpNorm:
    def test_single_unit_coefficient(self):
        for p in (0.5, 1.0, 4.0 / 3.0, 2.0):
            assert abs(bh.lp_coeff_norm(np.array([1.0]), p) - 1.0) <= 1e-15

    def test_two_ones_at_four_thirds(self):
        assert abs(bh.lp_coeff_norm(np.array([1.0, 1.0]), 4.0 / 3.0) - 2**0.75) <= 1e-14

    def test_pythagorean(self):
        assert abs(bh.lp_coeff_norm(np.array([3.0, 4.0]), 2.0) - 5.0) <= 1e-14

    def test_rejects_nonpositive_p(self):
        with pytest.raises(InputError):
            bh.lp_coeff_norm(np.array([1.0]), 0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_monotone_nonincreasing_in_p(self, seed):
        values = CounterRng(seed).complex_normal(12)
        norms = [bh.lp_coeff_norm(values, p) for p in (0.7, 1.0, 1.4, 2.0, 3.0)]
        for lo, hi in zip(norms[1:], norms[:-1]):
            assert lo <= hi + 1e-12


class TestCubeFourier:
    def test_single_character(self):
        m, mask = 5, 0b01010
        fhat = bh.cube_fourier(bh.cube_character(mask, m))
        assert abs(fhat[mask] - 1.0) <= 1e-13
        rest = np.delete(fhat, mask)
        assert float(np.max(np.abs(rest))) <= 1e-13

    def test_constant_function(self):
        fhat = bh.cube_fourier(np.full(16, 2.5 - 1.0j))
        assert abs(fhat[0] - (2.5 - 1.0j)) <= 1e-14
        assert float(np.max(np.abs(fhat[1:]))) <= 1e-14

    def test_round_trip_random_multilinear(self):
        rng = CounterRng(8)
        m = 6
        coeffs = {}
        for mask in (0, 3, 5, 40, 33):
            coeffs[mask] = complex(rng.normal(1)[0], rng.normal(1)[0])
        table = np.zeros(1 << m, dtype=complex)
        for mask, c in coeffs.items():
            table += c * bh.cube_character(mask, m)
        fhat = bh.cube_fourier(table)
        for mask, c in coeffs.items():
            assert abs(fhat[mask] - c) <= 1e-12
        assert sum(1 for v in fhat if abs(v) > 1e-12) == len(coeffs)

    def test_parseval(self):
        table = CounterRng(9).complex_normal(256)
        fhat = bh.cube_fourier(table)
        assert abs(np.sum(np.abs(fhat) ** 2) - np.mean(np.abs(table) ** 2)) <= 1e-12

    def test_capacity(self):
        with pytest.raises(CapacityError):
            bh.cube_points(25)


class TestCyclicFourier:
    def test_monomial(self):
        K = 3
        grid = np.indices((K, K))
        table = np.exp(2j * np.pi * (grid[0] + 2 * grid[1]) / K)
        fhat = bh.cyclic_fourier(table, K)
        assert abs(fhat[1, 2] - 1.0) <= 1e-13
        fhat[1, 2] = 0.0
        assert float(np.max(np.abs(fhat))) <= 1e-13

    def test_constant(self):
        fhat = bh.cyclic_fourier(np.ones((4, 4, 4)), 4)
        assert abs(fhat[0, 0, 0] - 1.0) <= 1e-14
        fhat[0, 0, 0] = 0.0
        assert float(np.max(np.abs(fhat))) <= 1e-14

    def test_parseval(self):
        table = CounterRng(10).complex_normal(27).reshape(3, 3, 3)
        fhat = bh.cyclic_fourier(table, 3)
        assert abs(np.sum(np.abs(fhat) ** 2) - np.mean(np.abs(table) ** 2)) <= 1e-12

    def test_capacity(self):
        with pytest.raises(CapacityError):
            bh.cyclic_fourier(np.ones((4,) * 13), 4)


class TestRatio:
    def test_single_gm_basis_element(self):
        coeffs = gm.GmCoeffs.from_entries(3, 1, {(("sym", 1, 3),): 1.0})
        from quditbh import tensor

        expected = 1.0 / tensor.op_norm(gm.gm_matrix(3, ("sym", 1, 3)))
        assert abs(bh.bh_ratio(coeffs) - expected) <= 1e-12

    def test_pauli_pair_sum(self):
        coeffs = gm.GmCoeffs.from_entries(
            2,
            2,
            {
                (("sym", 1, 2), ("sym", 1, 2)): 1.0,
                (("asym", 1, 2), ("asym", 1, 2)): 1.0,
                (("diag", 1), ("diag", 1)): 1.0,
            },
        )
        assert abs(bh.bh_ratio(coeffs) - 3.0 ** (-0.25)) <= 1e-12

    def test_zero_operator_rejected(self):
        with pytest.raises(InputError):
            bh.bh_ratio(gm.GmCoeffs.zeros(2, 1))

    def test_ratio_at_least_l2_ratio(self):
        rng = CounterRng(12)
        for trial in range(10):
            coeffs = gm.random_observable(3, 2, 2, rng.spawn(trial))
            p_ratio = bh.bh_ratio(coeffs)
            l2_ratio = math.sqrt(coeffs.l2_sq())  # op norm is 1 after rescaling
            assert p_ratio >= l2_ratio - 1e-9

    def test_nonprime_exponent_selection(self):
        coeffs = hw.HwCoeffs.from_entries(4, 1, {((1, 1),): 1.0})
        assert abs(bh.ratio_exponent(coeffs) - bh.bh_exponent(3 * 2)) <= 1e-15
        coeffs3 = hw.HwCoeffs.from_entries(3, 1, {((1, 1),): 1.0})
        assert abs(bh.ratio_exponent(coeffs3) - bh.bh_exponent(2)) <= 1e-15


class TestCampaign:
    def test_gm_campaign_under_bound(self):
        report = bh.bh_campaign("gm", 2, 2, 2, 50, seed=3)
        assert report.trials == 50
        assert not report.flagged
        assert report.max_ratio <= report.bound_used
        assert len(report.records) == 50

    def test_threaded_campaign_is_deterministic(self):
        a = bh.bh_campaign("hw", 3, 1, 2, 24, seed=5, threads=1)
        b = bh.bh_campaign("hw", 3, 1, 2, 24, seed=5, threads=4)
        assert [r.ratio for r in a.records] == [r.ratio for r in b.records]

    def test_bad_basis(self):
        with pytest.raises(InputError):
            bh.bh_campaign("pauli", 2, 1, 1, 1, 0)


class TestVerifyReduction:
    def test_gm_single_diag_k2(self):
        coeffs = gm.GmCoeffs.from_entries(2, 1, {(("diag", 1),): 1.0})
        rep = bh.verify_reduction(coeffs)
        assert rep.passed
        # the mapped cube coefficient equals A_hat / 3 at the diagonal slot
        mask = gm.cube_mask(2, (("diag", 1),))
        assert mask == 1 << 2
        assert abs(gm.expected_cube_coefficients(coeffs)[mask] - 1.0 / 3.0) <= 1e-15

    def test_hw_prime_x_modulus(self):
        coeffs = hw.HwCoeffs.from_entries(3, 1, {((1, 0),): 1.0})
        rep = bh.verify_reduction(coeffs)
        assert rep.passed
        expected = hw.expected_classical_coefficients(coeffs)
        (key, value), = expected.items()
        assert abs(abs(value) - 0.25) <= 1e-15

    def test_hw_nonprime_power_label(self):
        coeffs = hw.HwCoeffs.from_entries(4, 1, {((2, 2),): 1.0})
        rep = bh.verify_reduction(coeffs)
        assert rep.passed
        assert rep.classical_degree <= 3 * 4
        for value in hw.expected_classical_coefficients(coeffs).values():
            assert abs(abs(value) - 1.0 / 11.0) <= 1e-15

    def test_random_gm_instance(self):
        coeffs = gm.random_observable(3, 1, 1, CounterRng(77))
        rep = bh.verify_reduction(coeffs)
        assert rep.passed
        assert rep.max_coeff_error <= 1e-10
        assert rep.max_unmapped <= 1e-10
        assert rep.sup_abs <= rep.op_norm + 1e-9

    def test_hw_k2_with_minus_generator(self):
        # Sigma_2 contains (1,1), whose spectrum sits off Omega_2; the
        # half-shifted projector bookkeeping must still verify.
        coeffs = hw.random_observable(2, 2, 2, CounterRng(88))
        rep = bh.verify_reduction(coeffs)
        assert rep.passed
        assert rep.max_coeff_error <= 1e-10

    def test_gm_capacity_guard(self):
        with pytest.raises(CapacityError):
            bh.verify_reduction(gm.GmCoeffs.zeros(5, 1))


class TestClassicalFn:
    def test_cube_callable_round_trip(self):
        fn = bh.ClassicalFn.from_cube_callable(4, lambda x: 0.5 + x[0] * x[2])
        fhat = fn.fourier()
        assert abs(fhat[0] - 0.5) <= 1e-13
        assert abs(fhat[0b0101] - 1.0) <= 1e-13
        assert sum(1 for v in fhat if abs(v) > 1e-12) == 2

    def test_cyclic_callable_round_trip(self):
        fn = bh.ClassicalFn.from_cyclic_callable(3, 2, lambda z: z[0] * z[1] ** 2)
        fhat = fn.fourier()
        assert abs(fhat[1, 2] - 1.0) <= 1e-12
        assert fn.arity == 2 and fn.alphabet == "omega"

    def test_value_table_constructors(self):
        cube = bh.ClassicalFn.from_cube_values(np.ones(8))
        assert cube.arity == 3
        cyc = bh.ClassicalFn.from_cyclic_values(4, np.ones(16))
        assert cyc.arity == 2
        np.testing.assert_allclose(bh.cube_fourier(cube)[0], 1.0, atol=1e-14)


class TestConstants:
    def test_cube_constant_degree_one_is_one(self):
        assert bh.cube_bh_constant(1) == 1.0

    def test_bounds_move_with_degree(self):
        assert bh.gm_ratio_bound(2, 2) > bh.gm_ratio_bound(1, 2)
        assert bh.hw_ratio_bound(2, 3) > bh.hw_ratio_bound(1, 3)

    def test_gm_bound_value(self):
        # (3/2 * (K^2-K))^d at K=2, d=2 is 9; times the cube constant.
        assert abs(bh.gm_ratio_bound(2, 2) - 9.0 * bh.cube_bh_constant(2)) <= 1e-12
