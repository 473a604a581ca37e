"""Identity suites across the whole supported K range."""

import pytest

from quditbh import verify


@pytest.mark.parametrize("K", range(2, 9))
def test_full_suite_passes(K):
    checks = verify.full_suite(K, seed=1, samples=2000)
    failures = [c.name for c in checks if not c.passed]
    assert not failures, f"K={K}: failing checks {failures}"


def test_gcd_convention_check_present_at_k6():
    names = {c.name: c for c in verify.hw_suite(6)}
    assert "hw.gcd_convention" in names
    assert names["hw.gcd_convention"].passed


def test_pauli_check_present_at_k2():
    names = {c.name: c for c in verify.gm_suite(2)}
    assert "gm.pauli_recovery_exact" in names
    assert names["gm.pauli_recovery_exact"].passed


def test_exact_checks_have_zero_tolerance():
    checks = verify.full_suite(3, seed=0, samples=500)
    exact = [c for c in checks if c.tol == 0.0]
    assert exact, "suites should contain bit-exact checks"
    assert all(c.max_error == 0.0 for c in exact)
