"""Angular-momentum (Schur) transform circuits for qubit systems.

The transform is a cascade of n coupling steps. Step i couples system qubit
i into the running total spin: the q register is shifted by x_i - 1/2, a
rotation conditioned on (J, q') writes the new path qubit p_i, and the J
register is shifted by p_i - 1/2. J and q live in unary registers; in the
IR they area single qudits whose levels are the unary slots, so a shift is
a chain of adjacent level swaps (one two-local gate each) and every
value-conditioned gate has single-subsystem controls.

Register layout is (J, q, system qubits). J has n+1 slots (slot = 2J); q
has 2n+1 slots at half-integer spacing (slot = n + 2q) because the coupling
shifts move q by half steps even though final q values sit on the integer
lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import Circuit, CostModel, Gate, apply_to_matrix, permutation_gate
from .errors import (
    InvalidQuantumNumbersError,
    NotPermutationInvariantError,
    OutOfRangeError,
)
from .numkit import hermitian_eigendecompose

J_AXIS = 0
Q_AXIS = 1
MAX_QUBITS = 8
PERM_INVARIANCE_TOL = 1e-8


def register_dims(n: int) -> tuple[int, ...]:
    return (n + 1, 2 * n + 1) + (2,) * n


def j_slot(j: float) -> int:
    s = round(2 * j)
    if abs(2 * j - s) > 1e-12 or s < 0:
        raise InvalidQuantumNumbersError(f"J={j} is not a nonnegative half-integer")
    return int(s)


def q_slot(n: int, q: float) -> int:
    s = round(n + 2 * q)
    if abs(n + 2 * q - s) > 1e-12 or not 0 <= s <= 2 * n:
        raise InvalidQuantumNumbersError(f"q={q} out of register range for n={n}")
    return int(s)


def cg_angle(j: float, q_prime: float) -> float:
    """Coupling angle with cos(theta) = sqrt(1/2 + q'/(2J+1))."""
    twoj = round(2 * j)
    twoq = round(2 * q_prime)
    if abs(2 * j - twoj) > 1e-12 or abs(2 * q_prime - twoq) > 1e-12:
        raise InvalidQuantumNumbersError(f"J={j}, q'={q_prime} not half-integers")
    if (twoj + twoq) % 2 == 0 or abs(twoq) > twoj + 1:
        raise InvalidQuantumNumbersError(
            f"q'={q_prime} invalid for J={j}: need |q'| <= J+1/2, q' = J+1/2 (mod 1)"
        )
    c = math.sqrt(0.5 + q_prime / (2 * j + 1))
    return math.acos(min(1.0, max(-1.0, c)))


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def unary_increment_gates(target: int, width: int, steps: int = 1, controls=()) -> list[Gate]:
    """Cyclic shift by ``steps`` slots as chains of adjacent level swaps.

    One shift is width-1 adjacent swaps; on one-hot states it moves the
    excitation one slot up (or down for negative steps).
    """
    if width < 2:
        raise OutOfRangeError("unary register needs width >= 2")
    gates: list[Gate] = []
    for _ in range(abs(steps)):
        pairs = range(width - 2, -1, -1) if steps > 0 else range(width - 1)
        for a in pairs:
            perm = list(range(width))
            perm[a], perm[a + 1] = perm[a + 1], perm[a]
            gates.append(permutation_gate("uswap", target, perm, controls))
    return gates


def reachable_j(i: int) -> list[float]:
    """Total-spin values possible after coupling i qubits."""
    top = i / 2
    vals = []
    j = top
    while j >= -1e-9:
        vals.append(j)
        j -= 1.0
    return [v for v in vals if v >= 0]


def cg_rotations(n: int, i: int) -> list[tuple[float, float, float]]:
    """(J, q', theta) triples for coupling step i, old-J reachable and
    nontrivial (the q' = J+1/2 angle is exactly zero and is skipped)."""
    rots = []
    for j in sorted(reachable_j(i - 1)):
        twoj = round(2 * j)
        for twoq in range(-(twoj + 1), twoj + 1, 2):
            qp = twoq / 2
            theta = cg_angle(j, qp)
            if abs(theta) < 1e-15:
                continue
            rots.append((j, qp, theta))
    return rots


def cg_step_gates(n: int, i: int) -> list[Gate]:
    """Gate sequence of coupling step i (1-based), per the standard layout:
    q down-shift, controlled q double-up-shift, conditioned rotations,
    J down-shift, controlled J double-up-shift."""
    if not 1 <= i <= n:
        raise OutOfRangeError(f"step {i} out of range for n={n}")
    x_axis = 2 + (i - 1)
    gates: list[Gate] = []
    gates += unary_increment_gates(Q_AXIS, 2 * n + 1, steps=-1)
    gates += unary_increment_gates(Q_AXIS, 2 * n + 1, steps=2, controls=((x_axis, 1),))
    for j, qp, theta in cg_rotations(n, i):
        gates.append(Gate(
            "cg_ry", (x_axis,), unitary=ry(theta), angle=theta,
            controls=((J_AXIS, j_slot(j)), (Q_AXIS, q_slot(n, qp))),
        ))
    gates += unary_increment_gates(J_AXIS, n + 1, steps=-1)
    gates += unary_increment_gates(J_AXIS, n + 1, steps=2, controls=((x_axis, 1),))
    return gates


def build_cg_unitary(n: int, i: int) -> Circuit:
    return Circuit(register_dims(n), tuple(cg_step_gates(n, i)), CostModel.QUBIT_TWO_LOCAL)


@lru_cache(maxsize=None)
def build_schur_transform(n: int) -> Circuit:
    """Full transform circuit: n coupling steps on the (J, q, system) register."""
    if not 1 <= n <= MAX_QUBITS:
        raise OutOfRangeError(f"n={n} outside desk range 1..{MAX_QUBITS}")
    gates: list[Gate] = []
    for i in range(1, n + 1):
        gates += cg_step_gates(n, i)
    return Circuit(register_dims(n), tuple(gates), CostModel.QUBIT_TWO_LOCAL)


def initial_ancilla_index(n: int) -> tuple[int, int]:
    """(J slot, q slot) of the |J=0, q=0> starting configuration."""
    return 0, n


@lru_cache(maxsize=None)
def schur_isometry(n: int) -> np.ndarray:
    """Columns are the transform applied to |J=0, q=0, x> for all x."""
    circuit = build_schur_transform(n)
    dims = register_dims(n)
    d = int(np.prod(dims))
    j0, q0 = initial_ancilla_index(n)
    cols = np.zeros((d, 2**n), dtype=complex)
    base = np.ravel_multi_index((j0, q0) + (0,) * n, dims)
    for x in range(2**n):
        cols[base + x, x] = 1.0
    return apply_to_matrix(circuit, cols)


# --- collective-spin fixtures -------------------------------------------------

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _embed_single(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for k in range(n):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def collective_ops(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Total-spin operators (Jx, Jy, Jz) = (1/2) sum over sites of the Paulis."""
    if n > 12:
        raise OutOfRangeError(f"n={n} too large for dense collective operators")
    dim = 2**n
    ops = []
    for key in ("x", "y", "z"):
        total = np.zeros((dim, dim), dtype=complex)
        for site in range(n):
            total += _embed_single(PAULI[key], site, n)
        ops.append(0.5 * total)
    return tuple(ops)


def build_lmg(n: int, v: float, w: float) -> np.ndarray:
    """Collective-spin model Jz + (V/n)(J+^2 + J-^2) + (W/n)(J+J- + J-J+),
    with J+- = (Jx +- i Jy)/sqrt(2)."""
    jx, jy, jz = collective_ops(n)
    jp = (jx + 1j * jy) / math.sqrt(2)
    jm = (jx - 1j * jy) / math.sqrt(2)
    h = jz + (v / n) * (jp @ jp + jm @ jm) + (w / n) * (jp @ jm + jm @ jp)
    return 0.5 * (h + h.conj().T)


def swap_matrix(n: int, a: int, b: int) -> np.ndarray:
    dim = 2**n
    perm = np.arange(dim)
    out = np.zeros(dim, dtype=int)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        bits[a], bits[b] = bits[b], bits[a]
        out[idx] = sum(bit << (n - 1 - k) for k, bit in enumerate(bits))
    m = np.zeros((dim, dim), dtype=complex)
    m[out, perm] = 1.0
    return m


def permutation_defect(h: np.ndarray, n: int) -> float:
    """Largest commutator norm with adjacent transpositions (generators of S_n)."""
    worst = 0.0
    for a in range(n - 1):
        p = swap_matrix(n, a, a + 1)
        worst = max(worst, float(np.linalg.norm(h @ p - p @ h)))
    return worst


def multiplicity(n: int, j: float) -> int:
    k = round(n / 2 - j)
    if abs(n / 2 - j - k) > 1e-12 or k < 0:
        return 0
    first = math.comb(n, k)
    second = math.comb(n, k - 1) if k >= 1 else 0
    return first - second


def valid_paths(n: int, j: float) -> list[tuple[int, ...]]:
    """Ballot-style p sequences: partial spins stay >= 0 and end at J."""
    results = []

    def walk(prefix, cur):
        if len(prefix) == n:
            if abs(cur - j) < 1e-9:
                results.append(tuple(prefix))
            return
        walk(prefix + [1], cur + 0.5)
        if cur - 0.5 >= -1e-9:
            walk(prefix + [0], cur - 0.5)

    walk([], 0.0)
    return results


@dataclass(eq=False)
class SchurBlock:
    j: float
    multiplicity: int
    block: np.ndarray  # Hermitian, dim 2J+1, basis ordered q = -J..J


def extract_blocks(h: np.ndarray, n: int, tol: float = PERM_INVARIANCE_TOL):
    """Read the per-J blocks of a permutation-invariant H from the transform.

    Conjugates H (embedded with the ancilla start state) by the transform
    isometry, groups rows by (J, path), checks that blocks agree across
    paths and that nothing leaks off-block, and returns one averaged block
    per J together with the leakage norm.

    Returns (blocks, offblock_frobenius).
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2**n, 2**n):
        raise OutOfRangeError(f"H must be {2**n}x{2**n} for n={n}")
    defect = permutation_defect(h, n)
    if defect > tol:
        raise NotPermutationInvariantError(
            f"commutator with transpositions is {defect:.2e} > {tol:g}"
        )
    iso = schur_isometry(n)
    dims = register_dims(n)

    # valid rows, grouped (J, path) -> flat row indices; together they span
    # exactly 2^n dimensions, everything else is leakage
    groups: list[tuple[float, tuple[int, ...], list[int]]] = []
    for twoj in range(n % 2, n + 1, 2):
        j = twoj / 2
        paths = valid_paths(n, j)
        assert len(paths) == multiplicity(n, j)
        qslots = [q_slot(n, q) for q in np.arange(-j, j + 1e-9, 1.0)]
        for p in paths:
            rows = [np.ravel_multi_index((twoj, qs) + p, dims) for qs in qslots]
            groups.append((j, p, rows))
    valid_rows = [r for _, _, rows in groups for r in rows]
    assert len(valid_rows) == 2**n

    r_valid = iso[valid_rows, :]
    conj_valid = r_valid @ h @ r_valid.conj().T

    # off-block norm, computed without cancellation: zero the diagonal blocks
    # of the valid-sector conjugation and add anything reaching invalid rows
    remainder = conj_valid.copy()
    per_group = []
    pos = 0
    for j, p, rows in groups:
        m = len(rows)
        blk = conj_valid[pos:pos + m, pos:pos + m].copy()
        per_group.append((j, p, blk))
        remainder[pos:pos + m, pos:pos + m] = 0.0
        pos += m
    mask = np.ones(iso.shape[0], dtype=bool)
    mask[valid_rows] = False
    a = iso[mask, :]
    cross = a @ h @ r_valid.conj().T
    inner = a @ h @ a.conj().T
    off_sq = float(np.linalg.norm(remainder) ** 2) \
        + 2 * float(np.linalg.norm(cross) ** 2) + float(np.linalg.norm(inner) ** 2)
    offblock = math.sqrt(off_sq)
    if offblock > tol:
        raise NotPermutationInvariantError(f"off-block leakage {offblock:.2e} > {tol:g}")

    blocks: list[SchurBlock] = []
    for twoj in range(n % 2, n + 1, 2):
        j = twoj / 2
        per_path = [blk for jj, _, blk in per_group if jj == j]
        for b in per_path[1:]:
            if np.linalg.norm(b - per_path[0]) > tol:
                raise NotPermutationInvariantError(f"blocks differ across paths at J={j}")
        avg = sum(per_path) / len(per_path)
        blocks.append(SchurBlock(j, len(per_path), 0.5 * (avg + avg.conj().T)))
    return blocks, offblock


def random_permutation_invariant(n: int, rng) -> np.ndarray:
    """Random Hermitian polynomial of degree <= 3 in (Jx, Jy, Jz), ||H|| <= 1."""
    jx, jy, jz = collective_ops(n)
    ops = [jx, jy, jz]
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for a in range(3):
        h += rng.normal() * ops[a]
        for b in range(3):
            h += rng.normal() * (ops[a] @ ops[b])
            for c in range(3):
                h += rng.normal() * 0.3 * (ops[a] @ ops[b] @ ops[c])
    h = 0.5 * (h + h.conj().T)
    w, _ = hermitian_eigendecompose(h)
    scale = max(abs(w[0]), abs(w[-1]))
    if scale > 0:
        h = h / (scale * (1 + 1e-12))
    return h


def block_json(blocks: list[SchurBlock]) -> list[dict]:
    return [
        {
            "J": b.j,
            "multiplicity": b.multiplicity,
            "matrix": [[[float(x.real), float(x.imag)] for x in row] for row in b.block],
        }
        for b in blocks
    ]
