import numpy as np
import pytest

from ffsim.errors import NotHermitianError, NotPSDError, NotUnitaryError
from ffsim.numkit import (
    evolve_exact,
    hermitian_eigendecompose,
    psd_sqrt,
    reconstruct_two_level,
    two_level_decompose,
)


def random_hermitian(dim, rng):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def random_unitary(dim, rng):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def test_eigendecompose_pauli_z():
    w, v = hermitian_eigendecompose(PAULI_Z)
    assert np.allclose(w, [-1.0, 1.0])
    # columns are |1>, |0> up to phase
    assert abs(abs(v[1, 0]) - 1.0) < 1e-12
    assert abs(abs(v[0, 1]) - 1.0) < 1e-12


def test_eigendecompose_zero_matrix():
    w, v = hermitian_eigendecompose(np.zeros((4, 4)))
    assert np.allclose(w, 0.0)
    assert np.linalg.norm(v.conj().T @ v - np.eye(4)) < 1e-12


@pytest.mark.parametrize("dim", [8, 32, 256])
def test_eigendecompose_reconstruction(dim):
    rng = np.random.default_rng(11 + dim)
    a = random_hermitian(dim, rng)
    w, v = hermitian_eigendecompose(a)
    assert np.all(np.diff(w) >= 0)
    resid = np.linalg.norm(a @ v - v @ np.diag(w))
    assert resid <= 1e-10 * max(1.0, np.linalg.norm(a))
    assert np.linalg.norm((v * w) @ v.conj().T - a) <= 1e-10 * max(1.0, np.linalg.norm(a))


def test_eigendecompose_rejects_nonhermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_evolve_exact_identity_at_t0():
    rng = np.random.default_rng(3)
    h = random_hermitian(5, rng)
    assert np.allclose(evolve_exact(h, 0.0), np.eye(5), atol=1e-12)


def test_evolve_exact_pauli_z():
    u = evolve_exact(PAULI_Z, np.pi / 2)
    assert np.allclose(u, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-12)


def test_evolve_exact_group_law():
    rng = np.random.default_rng(7)
    h = random_hermitian(4, rng)
    t1, t2 = 7.3, -2.1
    u = evolve_exact(h, t1) @ evolve_exact(h, t2)
    assert np.linalg.norm(u - evolve_exact(h, t1 + t2)) <= 1e-9


def test_evolve_exact_adjoint_is_time_reversal():
    rng = np.random.default_rng(8)
    h = random_hermitian(6, rng)
    assert np.linalg.norm(evolve_exact(h, 1.7).conj().T - evolve_exact(h, -1.7)) <= 1e-10


def test_psd_sqrt_diagonal():
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_projector_fixed_point():
    rng = np.random.default_rng(21)
    v = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    q, _ = np.linalg.qr(v)
    p = q @ q.conj().T
    assert np.linalg.norm(psd_sqrt(p) - p) <= 1e-9


def test_psd_sqrt_random_and_commutes():
    rng = np.random.default_rng(22)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    a = m @ m.conj().T
    r = psd_sqrt(a)
    assert np.linalg.norm(r @ r - a) <= 1e-9 * max(1.0, np.linalg.norm(a))
    assert np.linalg.norm(r @ a - a @ r) <= 1e-9 * max(1.0, np.linalg.norm(a))


def test_psd_sqrt_rejects_negative():
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_two_level_identity_empty():
    for d in (2, 3, 5):
        assert two_level_decompose(np.eye(d)) == []


def test_two_level_2x2_single_factor():
    rng = np.random.default_rng(31)
    u = random_unitary(2, rng)
    fs = two_level_decompose(u)
    assert len(fs) == 1
    assert np.allclose(fs[0].block, u)


def test_two_level_3x3_reconstruction():
    rng = np.random.default_rng(32)
    u = random_unitary(3, rng)
    fs = two_level_decompose(u)
    # 3 Givens rotations plus at most 3 phases
    assert sum(1 for f in fs) <= 6
    assert np.linalg.norm(reconstruct_two_level(fs, 3) - u) <= 1e-10


@pytest.mark.parametrize("dim", [4, 7, 16])
def test_two_level_count_and_reconstruction(dim):
    rng = np.random.default_rng(100 + dim)
    u = random_unitary(dim, rng)
    fs = two_level_decompose(u)
    assert len(fs) <= dim * (dim - 1) // 2 + dim
    assert np.linalg.norm(reconstruct_two_level(fs, dim) - u) <= 1e-9


def test_two_level_rejects_nonunitary():
    with pytest.raises(NotUnitaryError):
        two_level_decompose(np.ones((3, 3)))
