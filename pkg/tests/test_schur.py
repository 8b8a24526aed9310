import numpy as np
import pytest

from ffsim import circuits as C
from ffsim import schur
from ffsim.errors import (
    InvalidQuantumNumbersError,
    NotPermutationInvariantError,
    OutOfRangeError,
)


def test_cg_angle_trivial_points():
    assert schur.cg_angle(0, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert schur.cg_angle(0.5, 0.0) == pytest.approx(np.pi / 4, abs=1e-12)
    assert schur.cg_angle(0.5, -1.0) == pytest.approx(np.pi / 2, abs=1e-12)


def test_cg_angle_pythagorean_identity():
    for twoj in range(0, 9):
        j = twoj / 2
        for twoq in range(-(twoj + 1), twoj + 2, 2):
            theta = schur.cg_angle(j, twoq / 2)
            assert abs(np.cos(theta) ** 2 + np.sin(theta) ** 2 - 1.0) < 1e-15


def test_cg_angle_rejects_invalid():
    with pytest.raises(InvalidQuantumNumbersError):
        schur.cg_angle(0.5, 0.5)  # wrong parity
    with pytest.raises(InvalidQuantumNumbersError):
        schur.cg_angle(0.5, 2.0)  # out of range


def test_unary_increment_width2():
    gates = schur.unary_increment_gates(0, 2)
    assert len(gates) == 1
    c = C.Circuit((2,), tuple(gates))
    out = C.apply(c, np.array([1.0, 0.0], dtype=complex))
    assert np.allclose(out, [0.0, 1.0])


def test_unary_increment_width5_swap_chain():
    gates = schur.unary_increment_gates(0, 5)
    assert len(gates) == 4  # width - 1 adjacent swaps
    c = C.Circuit((5,), tuple(gates))
    s = np.zeros(5, dtype=complex)
    s[0] = 1.0
    assert np.allclose(C.apply(c, s), np.eye(5)[1])


def test_unary_increment_inverse_roundtrip():
    up = schur.unary_increment_gates(0, 6)
    down = schur.unary_increment_gates(0, 6, steps=-1)
    c = C.Circuit((6,), tuple(up + down))
    assert np.allclose(C.to_unitary(c), np.eye(6))


def test_collective_ops_commutators():
    for n in (1, 2, 3):
        jx, jy, jz = schur.collective_ops(n)
        assert np.linalg.norm(jx @ jy - jy @ jx - 1j * jz) < 1e-10
        assert np.linalg.norm(jy @ jz - jz @ jy - 1j * jx) < 1e-10
        assert np.linalg.norm(jz @ jx - jx @ jz - 1j * jy) < 1e-10


def test_collective_jz_single_qubit():
    _, _, jz = schur.collective_ops(1)
    assert np.allclose(jz, np.diag([0.5, -0.5]))


def test_j_squared_spectrum_n2():
    jx, jy, jz = schur.collective_ops(2)
    w = np.linalg.eigvalsh(jx @ jx + jy @ jy + jz @ jz)
    assert np.allclose(sorted(w), [0.0, 2.0, 2.0, 2.0], atol=1e-10)


def test_j_squared_spectrum_n3():
    # J(J+1): 3/4 with multiplicity 4 (two spin-1/2 copies), 15/4 with 4
    jx, jy, jz = schur.collective_ops(3)
    w = np.sort(np.linalg.eigvalsh(jx @ jx + jy @ jy + jz @ jz))
    assert np.allclose(w[:4], 0.75, atol=1e-10)
    assert np.allclose(w[4:], 3.75, atol=1e-10)


def test_multiplicity_formula_matches_bruteforce():
    for n in range(1, 7):
        jx, jy, jz = schur.collective_ops(n)
        w = np.linalg.eigvalsh(jx @ jx + jy @ jy + jz @ jz)
        for twoj in range(n % 2, n + 1, 2):
            j = twoj / 2
            eig = j * (j + 1)
            count = int(np.sum(np.abs(w - eig) < 1e-8))
            assert count == schur.multiplicity(n, j) * (twoj + 1)


def test_schur_n1_maps_to_spin_half_sector():
    iso = schur.schur_isometry(1)
    dims = schur.register_dims(1)
    for x, q in ((0, -0.5), (1, 0.5)):
        col = iso[:, x]
        expect = np.ravel_multi_index((schur.j_slot(0.5), schur.q_slot(1, q), 1), dims)
        assert abs(abs(col[expect]) - 1.0) < 1e-12


def test_schur_singlet_lands_in_j0():
    iso = schur.schur_isometry(2)
    dims = schur.register_dims(2)
    singlet = np.zeros(4, dtype=complex)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    out = iso @ singlet
    arr = out.reshape(dims)
    weight_j0 = np.linalg.norm(arr[schur.j_slot(0.0)])
    assert abs(weight_j0 - 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_schur_unitarity_small(n):
    c = schur.build_schur_transform(n)
    u = C.to_unitary(c)
    assert np.linalg.norm(u.conj().T @ u - np.eye(c.dim)) <= 1e-9


def test_cg_step_is_unitary_and_invertible():
    c = schur.build_cg_unitary(3, 2)
    u = C.to_unitary(c)
    assert np.linalg.norm(u @ u.conj().T - np.eye(c.dim)) < 1e-10
    roundtrip = C.to_unitary(c.then(c.inverse()))
    assert np.linalg.norm(roundtrip - np.eye(c.dim)) < 1e-10


def test_cg_rotation_count_n3_step3():
    # reachable old-J values are {0, 1}; dropping the exactly-zero angles at
    # q' = J + 1/2 leaves 4 rotations (the paper's figure shows an
    # illustrative truncation, see notes)
    rots = schur.cg_rotations(3, 3)
    assert len(rots) == 4
    pairs = {(j, qp) for j, qp, _ in rots}
    assert pairs == {(0.0, -0.5), (1.0, -1.5), (1.0, -0.5), (1.0, 0.5)}


def test_first_step_path_is_deterministic():
    # after coupling one qubit the path bit is always 1
    iso = schur.schur_isometry(1)
    dims = schur.register_dims(1)
    arr = np.abs(iso) ** 2
    for x in range(2):
        probs = arr[:, x].reshape(dims)
        assert probs[:, :, 0].sum() < 1e-20


def test_doubly_controlled_rotation_block_structure():
    # dense check on the n=3 register: the gate acts as Ry on the selected
    # (J, q) sector and as identity elsewhere
    n = 3
    dims = schur.register_dims(n)
    theta = schur.cg_angle(0.5, 0.0)
    g = C.Gate("cg_ry", (2,), unitary=schur.ry(theta), angle=theta,
               controls=((schur.J_AXIS, schur.j_slot(0.5)), (schur.Q_AXIS, schur.q_slot(n, 0.0))))
    c = C.Circuit(dims, (g,))
    u = C.to_unitary(c)
    d = c.dim
    # identity outside the controlled sector
    mask = np.zeros(dims, dtype=bool)
    mask[schur.j_slot(0.5), schur.q_slot(n, 0.0)] = True
    flat = mask.reshape(-1)
    outside = ~flat
    assert np.allclose(u[np.ix_(outside, outside)], np.eye(outside.sum()), atol=1e-12)
    sector = u[np.ix_(flat, flat)]
    expect = np.kron(schur.ry(theta), np.eye(4))
    assert np.allclose(sector, expect, atol=1e-12)


def test_lmg_limits_and_symmetry():
    h = schur.build_lmg(4, 0.0, 0.0)
    assert np.allclose(np.sort(np.linalg.eigvalsh(h)),
                       np.repeat([-2, -1, 0, 1, 2], [1, 4, 6, 4, 1]), atol=1e-10)
    h2 = schur.build_lmg(2, 1.0, 0.0)
    sw = schur.swap_matrix(2, 0, 1)
    assert np.linalg.norm(h2 @ sw - sw @ h2) <= 1e-12


def test_lmg_block_diagonal_with_identical_copies():
    h = schur.build_lmg(3, 0.5, 0.3)
    blocks, off = schur.extract_blocks(h, 3)
    assert off <= 1e-10
    js = {b.j: b for b in blocks}
    assert js[0.5].multiplicity == 2
    assert js[1.5].multiplicity == 1


def test_extract_blocks_jz_n3():
    # register q counts x_i - 1/2, so the Jz = (1/2) sum Z_i eigenvalue runs
    # opposite to the slot order: blocks come out diag(3/2, ..., -3/2)
    _, _, jz = schur.collective_ops(3)
    blocks, _ = schur.extract_blocks(jz, 3)
    js = {b.j: b for b in blocks}
    assert np.allclose(js[1.5].block, np.diag([1.5, 0.5, -0.5, -1.5]), atol=1e-10)
    assert np.allclose(js[0.5].block, np.diag([0.5, -0.5]), atol=1e-10)
    assert js[0.5].multiplicity == 2


def test_extract_blocks_zero_hamiltonian():
    blocks, off = schur.extract_blocks(np.zeros((8, 8)), 3)
    assert off == 0.0
    assert all(np.allclose(b.block, 0.0) for b in blocks)


def test_extract_blocks_requires_permutation_invariance():
    h = np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex)  # |01><01| breaks exchange
    with pytest.raises(NotPermutationInvariantError):
        schur.extract_blocks(h, 2)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_perm_invariant_blocks(n):
    rng = np.random.default_rng(500 + n)
    for _ in range(3):
        h = schur.random_permutation_invariant(n, rng)
        assert np.linalg.eigvalsh(h).max() <= 1.0 + 1e-9
        blocks, off = schur.extract_blocks(h, n)
        assert off <= 1e-10
        assert sum(b.multiplicity * (round(2 * b.j) + 1) for b in blocks) == 2**n


def test_sum_rule_dimensions():
    for n in range(1, 8):
        total = sum(schur.multiplicity(n, twoj / 2) * (twoj + 1)
                    for twoj in range(n % 2, n + 1, 2))
        assert total == 2**n


def test_build_schur_transform_range_check():
    with pytest.raises(OutOfRangeError):
        schur.build_schur_transform(0)
    with pytest.raises(OutOfRangeError):
        schur.build_schur_transform(9)
