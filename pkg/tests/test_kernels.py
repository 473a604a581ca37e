"""Kernel lanes: compiled core vs numpy fallback, and both vs oracles."""

import numpy as np
import pytest

from quditbh import _kernels_py, kernels
from quditbh.rng import CounterRng


def rand_hermitian(seed, dim):
    g = CounterRng(seed).complex_normal(dim * dim).reshape(dim, dim)
    return 0.5 * (g + g.conj().T)


def naive_walsh(values):
    n = len(values)
    out = np.zeros(n, dtype=np.complex128)
    for mask in range(n):
        acc = 0.0 + 0.0j
        for x in range(n):
            acc += values[x] * (-1) ** bin(mask & x).count("1")
        out[mask] = acc
    return out


@pytest.mark.parametrize("dim", [1, 2, 3, 5, 9, 16, 27])
def test_jacobi_matches_lapack(dim):
    h = rand_hermitian(dim, dim)
    w, v = kernels.jacobi_eigh(h)
    ref = np.linalg.eigvalsh(h)
    np.testing.assert_allclose(w, ref, atol=1e-12)
    np.testing.assert_allclose(h @ v, v * w, atol=1e-12)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-12)


def test_lanes_agree_on_eigensystems():
    for seed, dim in [(1, 4), (2, 9), (3, 16)]:
        h = rand_hermitian(seed, dim)
        w_active, _ = kernels.jacobi_eigh(h)
        w_py, v_py = _kernels_py.jacobi_eigh(h)
        np.testing.assert_allclose(w_active, w_py, atol=1e-12)
        np.testing.assert_allclose(h @ v_py, v_py * w_py, atol=1e-12)


def test_batch_matches_single():
    mats = np.stack([rand_hermitian(seed, 6) for seed in range(8)])
    w_b, v_b = kernels.jacobi_eigh_batch(mats)
    for i in range(8):
        w_s, _ = kernels.jacobi_eigh(mats[i])
        np.testing.assert_allclose(w_b[i], w_s, atol=1e-12)
        np.testing.assert_allclose(mats[i] @ v_b[i], v_b[i] * w_b[i], atol=1e-11)


def test_batch_lane_agreement():
    mats = np.stack([rand_hermitian(seed + 50, 5) for seed in range(6)])
    w_active, _ = kernels.jacobi_eigh_batch(mats)
    w_py, _ = _kernels_py.jacobi_eigh_batch(mats)
    np.testing.assert_allclose(w_active, w_py, atol=1e-12)


def test_jacobi_on_diagonal_input():
    w, v = kernels.jacobi_eigh(np.diag([3.0, -1.0, 2.0]).astype(complex))
    np.testing.assert_allclose(w, [-1.0, 2.0, 3.0], atol=0)
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]], atol=0)


@pytest.mark.parametrize("m", [0, 1, 4, 8])
def test_fwht_matches_naive(m):
    vals = CounterRng(m + 10).complex_normal(1 << m)
    np.testing.assert_allclose(kernels.fwht(vals), naive_walsh(vals), atol=1e-10)


def test_fwht_lane_agreement():
    vals = CounterRng(77).complex_normal(1 << 10)
    np.testing.assert_allclose(kernels.fwht(vals), _kernels_py.fwht(vals), atol=1e-10)


def test_fwht_self_inverse_up_to_size():
    vals = CounterRng(5).complex_normal(256)
    twice = kernels.fwht(kernels.fwht(vals)) / 256
    np.testing.assert_allclose(twice, vals, atol=1e-12)


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        kernels.fwht(np.ones(3, dtype=complex))


def test_compiled_lane_present():
    # The build in this repository compiles the extension; fall back only by
    # explicit request (QBH_PURE=1).
    assert kernels.BACKEND in ("compiled", "python")
