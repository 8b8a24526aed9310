import numpy as np
import pytest

from ffsim import blockff, schur
from ffsim import circuits as C
from ffsim.errors import (
    NotPermutationInvariantError,
    ToleranceUnachievableError,
    UnknownLabelError,
)
from ffsim.numkit import evolve_exact


def test_single_zero_block_is_trivial():
    spec = blockff.BlockEvolutionSpec([("0", np.zeros((1, 1)))], t=3.7)
    c = blockff.build_block_unitary(spec)
    assert len(c.gates) == 0


def test_scalar_blocks_at_period():
    # J=0: [0], J=1: 2*I3 at t = pi: phases e^{-2 pi i} = 1, nothing to do
    spec = blockff.BlockEvolutionSpec(
        [("J=0", np.zeros((1, 1))), ("J=1", 2.0 * np.eye(3))], t=np.pi)
    c = blockff.build_block_unitary(spec)
    assert np.allclose(C.to_unitary(c), np.eye(c.dim), atol=1e-12)


def test_build_block_unitary_matches_direct_sum():
    rng = np.random.default_rng(3)
    bs = []
    for k, d in enumerate((2, 3, 1)):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        bs.append((f"b{k}", 0.5 * (m + m.conj().T)))
    t = 1.3
    spec = blockff.BlockEvolutionSpec(bs, t=t)
    c = blockff.build_block_unitary(spec)
    u = C.to_unitary(c)
    width = 3
    for k, (_, h) in enumerate(bs):
        d = h.shape[0]
        expect = np.eye(width, dtype=complex)
        expect[:d, :d] = evolve_exact(h, t)
        # rows/cols of label sector k in the (data, label) register
        sel = [i * len(bs) + k for i in range(width)]
        assert np.allclose(u[np.ix_(sel, sel)], expect, atol=1e-9)


def test_build_block_unitary_binary_encoding():
    rng = np.random.default_rng(4)
    bs = []
    for k in range(3):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        bs.append((f"b{k}", 0.5 * (m + m.conj().T)))
    t = 0.9
    una = blockff.build_block_unitary(blockff.BlockEvolutionSpec(bs, t, "unary"))
    bina = blockff.build_block_unitary(blockff.BlockEvolutionSpec(bs, t, "binary"))
    # same physics, different label register: compare per-sector action
    uu, ub = C.to_unitary(una), C.to_unitary(bina)
    for k in range(3):
        sel_u = [i * 3 + k for i in range(2)]
        sel_b = [i * 4 + k for i in range(2)]
        assert np.allclose(uu[np.ix_(sel_u, sel_u)], ub[np.ix_(sel_b, sel_b)], atol=1e-9)
    # binary labels control on every bit
    assert all(len(g.controls) == 2 for g in bina.gates)
    assert all(len(g.controls) == 1 for g in una.gates)


def test_classical_block_program_deterministic():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    spec = blockff.BlockEvolutionSpec([("j1", 0.5 * (m + m.conj().T))], t=1.0)
    p1 = blockff.classical_block_program(spec, "j1")
    p2 = blockff.classical_block_program(spec, "j1")
    assert p1 == p2
    assert len(p1) > 0
    with pytest.raises(UnknownLabelError):
        blockff.classical_block_program(spec, "nope")


def test_classical_block_program_scalar_phase():
    spec = blockff.BlockEvolutionSpec([("e", np.array([[0.7]]))], t=2.0)
    prog = blockff.classical_block_program(spec, "e")
    assert '"phase": -1.4' in prog  # single descriptor with angle -t*e


def test_ff_jz_small():
    _, _, jz = schur.collective_ops(2)
    circuit, report = blockff.fast_forward_permutation_invariant(jz, 2, 1.0, 1e-8)
    assert report.max_error_measured <= 1e-9


def test_ff_identity_at_t0():
    h = schur.random_permutation_invariant(3, np.random.default_rng(6))
    circuit, report = blockff.fast_forward_permutation_invariant(h, 3, 0.0, 1e-9)
    assert report.max_error_measured <= 1e-9


def test_ff_lmg_long_time_and_t_independence():
    h = schur.build_lmg(3, 0.5, 0.3)
    counts = []
    for t in (1.0, 10.0, 64.0):
        _, report = blockff.fast_forward_permutation_invariant(h, 3, t, 1e-8)
        assert report.max_error_measured <= 1e-8
        counts.append((report.gate_count_raw, report.gate_count_elementary))
    assert counts[0][0] == counts[1][0] == counts[2][0]
    assert counts[0][1] == counts[1][1] == counts[2][1]


def test_ff_error_composition_bound():
    # end-to-end error stays below the sum of stage tolerances
    h = schur.random_permutation_invariant(3, np.random.default_rng(7))
    _, report = blockff.fast_forward_permutation_invariant(h, 3, 17.0, 3e-9)
    assert report.max_error_measured <= 3 * blockff.BLOCK_EPSILON


def test_ff_semigroup_property():
    h = schur.build_lmg(2, 0.5, 0.3)
    eps = 1e-8
    c1, _ = blockff.fast_forward_permutation_invariant(h, 2, 2.0, eps)
    c2, _ = blockff.fast_forward_permutation_invariant(h, 2, 5.0, eps)
    c12, _ = blockff.fast_forward_permutation_invariant(h, 2, 7.0, eps)
    dims = schur.register_dims(2)
    base = np.ravel_multi_index((0, 2, 0, 0), dims)
    rng = np.random.default_rng(8)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    full = np.zeros(c1.dim, dtype=complex)
    full[base:base + 4] = psi
    seq = C.apply(c1, C.apply(c2, full))
    direct = C.apply(c12, full)
    assert np.linalg.norm(seq - direct) <= 2 * eps


def test_ff_rejects_non_invariant():
    h = np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex)
    with pytest.raises(NotPermutationInvariantError):
        blockff.fast_forward_permutation_invariant(h, 2, 1.0, 1e-8)


def test_ff_unachievable_tolerance():
    _, _, jz = schur.collective_ops(2)
    with pytest.raises(ToleranceUnachievableError):
        blockff.fast_forward_permutation_invariant(jz, 2, 1.0, 1e-18)
