import numpy as np
import pytest

from ffsim import circuits as C
from ffsim.errors import (
    DimensionMismatchError,
    InvalidGateError,
    MixedModelError,
    OverlappingControlError,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def random_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_qubit_circuit(n, depth, rng):
    gates = []
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0:
            q = int(rng.integers(n))
            theta = float(rng.uniform(-np.pi, np.pi))
            gen = np.array([[1, 0], [0, -1]], dtype=complex)
            gates.append(C.Gate("rz", (q,), generator=gen, angle=theta))
        elif kind == 1:
            q = int(rng.integers(n))
            gates.append(C.Gate("h", (q,), unitary=H))
        else:
            q1, q2 = rng.choice(n, size=2, replace=False)
            gates.append(C.controlled(C.Gate("x", (int(q1),), unitary=X), (int(q2), 1)))
    return C.Circuit((2,) * n, tuple(gates))


def test_empty_circuit_is_identity():
    c = C.Circuit((2, 2))
    assert np.allclose(C.to_unitary(c), np.eye(4))


def test_single_x_on_first_qubit():
    c = C.Circuit((2, 2), (C.Gate("x", (0,), unitary=X),))
    assert np.allclose(C.to_unitary(c), np.kron(X, np.eye(2)))


def test_cnot_from_controlled():
    g = C.controlled(C.Gate("x", (1,), unitary=X), (0, 1))
    c = C.Circuit((2, 2), (g,))
    cnot = np.eye(4)[[0, 1, 3, 2]]
    assert np.allclose(C.to_unitary(c), cnot)


def test_apply_matches_to_unitary():
    rng = np.random.default_rng(5)
    c = random_qubit_circuit(6, 30, rng)
    s = random_state(64, rng)
    assert np.linalg.norm(C.apply(c, s) - C.to_unitary(c) @ s) <= 1e-9


def test_inverse_roundtrip():
    rng = np.random.default_rng(6)
    c = random_qubit_circuit(4, 20, rng)
    u = C.to_unitary(c)
    uinv = C.to_unitary(c.inverse())
    assert np.linalg.norm(uinv - u.conj().T) <= 1e-10
    assert np.linalg.norm(u @ uinv - np.eye(16)) <= 1e-10


def test_apply_is_linear():
    rng = np.random.default_rng(7)
    c = random_qubit_circuit(3, 12, rng)
    s1, s2 = random_state(8, rng), random_state(8, rng)
    a, b = 0.3 - 0.2j, 0.8 + 0.1j
    lhs = C.apply(c, a * s1 + b * s2)
    rhs = a * C.apply(c, s1) + b * C.apply(c, s2)
    assert np.linalg.norm(lhs - rhs) <= 1e-10


def test_identity_circuit_apply():
    rng = np.random.default_rng(8)
    s = random_state(12, rng)
    c = C.Circuit((3, 4))
    assert np.allclose(C.apply(c, s), s)


def test_x_flips_basis_state():
    c = C.Circuit((2,), (C.Gate("x", (0,), unitary=X),))
    out = C.apply(c, np.array([1.0, 0.0]))
    assert np.allclose(out, [0.0, 1.0])


def test_count_theta_splitting():
    gen = np.diag([1.0, -1.0]).astype(complex)
    c = C.Circuit((2,), (
        C.Gate("rz", (0,), generator=gen, angle=0.5),
        C.Gate("rz", (0,), generator=gen, angle=np.pi),
    ))
    gc = C.count(c)
    assert gc.raw_gates == 2
    # ceil(0.5) = 1, ceil(pi) = 4
    assert gc.elementary_count == 5
    assert gc.per_label["rz"] == 5


def test_count_controlled_two_level_is_one_unit():
    g = C.controlled(C.Gate("x", (1,), unitary=X), (0, 1))
    gc = C.count(C.Circuit((2, 2), (g,)))
    assert gc.elementary_count == 1


def test_count_additive_under_concatenation():
    rng = np.random.default_rng(9)
    c1 = random_qubit_circuit(3, 9, rng)
    c2 = random_qubit_circuit(3, 7, rng)
    total = C.count(c1.then(c2))
    summed = C.count(c1) + C.count(c2)
    assert total.raw_gates == summed.raw_gates
    assert total.elementary_count == summed.elementary_count
    assert total.per_label == summed.per_label


def test_mixed_model_rejected():
    g = C.Gate("x", (0,), unitary=X, meta={"model": "fermionic_weight2"})
    c = C.Circuit((2,), (g,), C.CostModel.QUBIT_TWO_LOCAL)
    with pytest.raises(MixedModelError):
        C.count(c)


def test_control_never_populated_acts_as_identity():
    g = C.controlled(C.Gate("x", (1,), unitary=X), (0, 1))
    c = C.Circuit((2, 2), (g,))
    s = np.zeros(4, dtype=complex)
    s[0] = 1.0  # control qubit is |0>, gate must not fire
    assert np.allclose(C.apply(c, s), s)


def test_overlapping_control_rejected():
    with pytest.raises(OverlappingControlError):
        C.controlled(C.Gate("x", (0,), unitary=X), (0, 1))


def test_qudit_control_values():
    # a value-2 control on a 3-level subsystem
    g = C.Gate("x", (1,), unitary=X, controls=((0, 2),))
    c = C.Circuit((3, 2), (g,))
    u = C.to_unitary(c)
    expect = np.eye(6, dtype=complex)
    expect[4:6, 4:6] = X
    assert np.allclose(u, expect)


def test_permutation_gate_cyclic_shift():
    g = C.permutation_gate("ushift", 0, (1, 2, 3, 0))
    c = C.Circuit((4,), (g,))
    s = np.array([1.0, 0, 0, 0], dtype=complex)
    assert np.allclose(C.apply(c, s), [0, 1, 0, 0])
    assert np.allclose(C.to_unitary(c.inverse()) @ C.to_unitary(c), np.eye(4))


def test_gate_payload_validation():
    with pytest.raises(InvalidGateError):
        C.Circuit((2,), (C.Gate("bad", (0,), unitary=np.ones((2, 2))),))
    with pytest.raises(InvalidGateError):
        C.Circuit((2,), (C.Gate("bad", (0, 1), unitary=X),))


def test_apply_dimension_mismatch():
    c = C.Circuit((2, 2))
    with pytest.raises(DimensionMismatchError):
        C.apply(c, np.zeros(5))


def test_serialization_bit_exact_roundtrip():
    rng = np.random.default_rng(10)
    c = random_qubit_circuit(3, 15, rng)
    text = C.circuit_to_json_lines(c)
    c2 = C.circuit_from_json_lines(text)
    assert C.circuit_to_json_lines(c2) == text
    for g1, g2 in zip(c.gates, c2.gates):
        if g1.unitary is not None:
            assert np.array_equal(g1.unitary, g2.unitary)
        if g1.generator is not None:
            assert np.array_equal(g1.generator, g2.generator)
        assert g1.angle == g2.angle
    u1, u2 = C.to_unitary(c), C.to_unitary(c2)
    assert np.array_equal(u1, u2)


def test_global_phase_tracked():
    c = C.Circuit((2,), global_phase=np.pi / 3)
    u = C.to_unitary(c)
    assert np.allclose(u, np.exp(1j * np.pi / 3) * np.eye(2))
    assert np.allclose(C.to_unitary(c.inverse()) @ u, np.eye(2))
