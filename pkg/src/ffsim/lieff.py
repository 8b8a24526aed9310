"""Jacobi diagonalization in defining representations, with fast-forwarding
circuits for quadratic fermionic and number-conserving bosonic Hamiltonians.

The abstract root-space elimination is realized as classical Jacobi on the
defining-representation matrix: the Nambu matrix (2n x 2n, particle-hole
symmetric) for fermions, the mode matrix (n x n Hermitian) for bosons. Each
rotation is the exponential of a weight-2 operator, so it maps to a single
elementary gate in the corresponding model, and conjugating the matrix by
it is faithful to conjugating the Hamiltonian by the gate.

Conventions are pinned by oracle tests against a Jordan-Wigner dense
construction, not by documentation: the Nambu matrix is
M = [[alpha, -2 conj(beta)], [2 beta, -alpha^T]] over Psi = (c, c^dag),
giving H = (1/2) Psi^dag M Psi + tr(alpha)/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, CostModel, Gate, apply, count, wrap_angle
from .errors import (
    AlreadyDiagonalError,
    ConvergenceStallError,
    DimensionOverflowError,
    ToleranceUnachievableError,
)
from .numkit import evolve_exact, hermitian_eigendecompose

CONSTRUCTION_TOL = 1e-12
PIVOT_ZERO_TOL = 1e-14
PH_TOL = 1e-12
FOCK_MAX_MODES = 5
SECTOR_DIM_CAP = 2048


# --- domain types -------------------------------------------------------------


@dataclass(eq=False)
class QuadraticFermionH:
    """Quadratic fermionic Hamiltonian sum a_ij c^dag_i c_j + b_ij c_i c_j - conj(b)_ij c^dag_i c^dag_j."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        b = np.asarray(self.beta, dtype=complex)
        if np.linalg.norm(a - a.conj().T) > CONSTRUCTION_TOL * max(1, np.linalg.norm(a)):
            raise ValueError("alpha must be Hermitian")
        if np.abs(a).max(initial=0) > 1 + 1e-9 or np.abs(b).max(initial=0) > 1 + 1e-9:
            raise ValueError("entries must satisfy |a_ij|, |b_ij| <= 1")
        # the symmetric part of beta cancels against the anticommutator
        self.alpha = a
        self.beta = 0.5 * (b - b.T)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


@dataclass(eq=False)
class NambuMatrix:
    m: np.ndarray  # 2n x 2n

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(m)))
        if np.linalg.norm(m - m.conj().T) > PH_TOL * scale:
            raise ValueError("Nambu matrix must be Hermitian")
        if ph_defect(m) > PH_TOL * scale:
            raise ValueError("Nambu matrix must be particle-hole symmetric")
        self.m = m

    @property
    def n(self) -> int:
        return self.m.shape[0] // 2


@dataclass(eq=False)
class ModeMatrix:
    alpha: np.ndarray  # n x n Hermitian; |a_ij| <= 1 expected on Hamiltonian input

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        if np.linalg.norm(a - a.conj().T) > CONSTRUCTION_TOL * max(1, np.linalg.norm(a)):
            raise ValueError("mode matrix must be Hermitian")
        self.alpha = a

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


def ph_defect(m: np.ndarray) -> float:
    """Distance from M = -tau M^T tau, tau the block swap."""
    n = m.shape[0] // 2
    tau = np.zeros_like(m)
    tau[:n, n:] = np.eye(n)
    tau[n:, :n] = np.eye(n)
    return float(np.linalg.norm(m + tau @ m.T @ tau))


def nambu_matrix(h: QuadraticFermionH) -> NambuMatrix:
    n = h.n
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, :n] = h.alpha
    m[:n, n:] = -2.0 * h.beta.conj()
    m[n:, :n] = 2.0 * h.beta
    m[n:, n:] = -h.alpha.T
    return NambuMatrix(m)


# --- roots and distances ------------------------------------------------------


def positive_root_entries(mat) -> list[tuple[int, int]]:
    """Canonical matrix entry per positive root of the relevant algebra."""
    if isinstance(mat, NambuMatrix):
        n = mat.n
        hop = [(i, j) for i in range(n) for j in range(i + 1, n)]
        pair = [(i, n + j) for i in range(n) for j in range(i + 1, n)]
        return hop + pair
    if isinstance(mat, ModeMatrix):
        n = mat.n
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise TypeError(f"unsupported matrix type {type(mat)!r}")


def root_count(mat) -> int:
    return len(positive_root_entries(mat))


def _matrix(mat) -> np.ndarray:
    return mat.m if isinstance(mat, NambuMatrix) else mat.alpha


def offdiag_frobenius(mat) -> float:
    m = _matrix(mat)
    off = m - np.diag(np.diag(m))
    return float(np.linalg.norm(off))


def cartan_distance(mat) -> float:
    """Distance to the Cartan subalgebra, (8 sum_roots (a^2 + b^2))^(1/2).

    Every positive root owns one canonical entry of modulus sqrt(a^2+b^2)
    (the particle-hole copy duplicates it for the Nambu case), so the sum
    reduces to a uniform multiple of the off-diagonal Frobenius norm:
    sqrt(2) * ||off||_F for Nambu, 2 * ||off||_F for mode matrices.
    """
    m = _matrix(mat)
    total = sum(abs(m[i, j]) ** 2 for i, j in positive_root_entries(mat))
    return math.sqrt(8.0 * total)


def dh_per_offdiag(mat) -> float:
    return math.sqrt(2.0) if isinstance(mat, NambuMatrix) else 2.0


# --- rotations ----------------------------------------------------------------


@dataclass(frozen=True)
class RotationStep:
    kind: str  # "hop" | "pair"
    i: int
    j: int
    a: float  # coefficient of the X-type root operator
    b: float  # coefficient of the Y-type root operator


def _givens_params(p: float, q: float, m: complex) -> tuple[float, float]:
    """(theta, phi) of the rotation zeroing the off-diagonal of
    [[p, m], [conj(m), q]]; |theta| <= pi/4."""
    phi = float(np.angle(m))
    if abs(p - q) < 1e-300:
        theta = math.pi / 4
    else:
        theta = 0.5 * math.atan2(2.0 * abs(m), p - q)
        if theta > math.pi / 4:
            theta -= math.pi / 2
    return theta, phi


def _rotation_for_pivot(mat, i: int, j: int) -> RotationStep:
    m = _matrix(mat)
    theta, phi = _givens_params(float(m[i, i].real), float(m[j, j].real), m[i, j])
    if isinstance(mat, ModeMatrix) or j < mat.n:
        return RotationStep("hop", i, j, -theta * math.sin(phi), -theta * math.cos(phi))
    return RotationStep("pair", i, j - mat.n, theta * math.sin(phi), -theta * math.cos(phi))


def rotation_defining_matrix(step: RotationStep, mat) -> np.ndarray:
    """Defining-representation unitary exp(i (a X + b Y)) of a rotation."""
    if isinstance(mat, ModeMatrix):
        n = mat.n
        gen = np.zeros((n, n), dtype=complex)
        w = step.a - 1j * step.b
        gen[step.i, step.j] = w
        gen[step.j, step.i] = np.conj(w)
    else:
        n = mat.n
        if step.kind == "hop":
            alpha_gen = np.zeros((n, n), dtype=complex)
            w = step.a - 1j * step.b
            alpha_gen[step.i, step.j] = w
            alpha_gen[step.j, step.i] = np.conj(w)
            beta_gen = np.zeros((n, n), dtype=complex)
        else:
            alpha_gen = np.zeros((n, n), dtype=complex)
            beta_gen = np.zeros((n, n), dtype=complex)
            w = step.a - 1j * step.b
            beta_gen[step.i, step.j] = 0.5 * w
            beta_gen[step.j, step.i] = -0.5 * w
        gen = np.zeros((2 * n, 2 * n), dtype=complex)
        gen[:n, :n] = alpha_gen
        gen[:n, n:] = -2.0 * beta_gen.conj()
        gen[n:, :n] = 2.0 * beta_gen
        gen[n:, n:] = -alpha_gen.T
    w_eig, v_eig = np.linalg.eigh(gen)
    return (v_eig * np.exp(1j * w_eig)) @ v_eig.conj().T


def jacobi_step(mat):
    """One elimination: conjugate by the rotation zeroing the largest root
    coefficient (with its particle-hole image for Nambu matrices).

    Returns (RotationStep, new matrix). Ties break lexicographically on the
    canonical entry. Asserts the pivot is annihilated and, for Nambu input,
    that particle-hole symmetry survives to 1e-12.
    """
    m = _matrix(mat)
    entries = positive_root_entries(mat)
    mags = [abs(m[i, j]) for i, j in entries]
    best = int(np.argmax(mags))
    if mags[best] <= PIVOT_ZERO_TOL:
        raise AlreadyDiagonalError("matrix is already diagonal")
    i, j = entries[best]
    step = _rotation_for_pivot(mat, i, j)
    r = rotation_defining_matrix(step, mat)
    new = r.conj().T @ m @ r
    if abs(new[i, j]) > PIVOT_ZERO_TOL * max(1.0, float(np.linalg.norm(m))):
        raise ConvergenceStallError(
            f"pivot ({i},{j}) not eliminated: {abs(new[i, j]):.2e}"
        )
    new = 0.5 * (new + new.conj().T)
    if isinstance(mat, NambuMatrix):
        if ph_defect(new) > PH_TOL * max(1.0, float(np.linalg.norm(new))):
            raise ConvergenceStallError("particle-hole symmetry lost")
        return step, NambuMatrix(new)
    return step, ModeMatrix(new)


@dataclass(eq=False)
class JacobiTrace:
    l: int
    d_h_start: float
    steps: list[dict] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.steps)

    def to_csv(self) -> str:
        lines = ["step,kind,i,j,a,b,d_h,off2_ratio"]
        for k, rec in enumerate(self.steps, start=1):
            lines.append(
                f"{k},{rec['kind']},{rec['i']},{rec['j']},{rec['a']!r},{rec['b']!r},"
                f"{rec['d_h']!r},{rec['off2_ratio']!r}"
            )
        return "\n".join(lines) + "\n"


def iteration_budget(mat, target_offdiag: float) -> int:
    """Closed-form step bound from the geometric contraction ratio (l-1)/l."""
    l = root_count(mat)
    start = offdiag_frobenius(mat)
    if start <= target_offdiag or l <= 1:
        return max(1, l)
    ratio = math.log(l / (l - 1.0))
    return math.ceil(2.0 * math.log(start / target_offdiag) / ratio) + 1


def jacobi_diagonalize(mat, target_offdiag: float):
    """Eliminate until the off-diagonal Frobenius norm falls below target.

    Returns (rotations, diagonal matrix, trace). Each step must contract
    off^2 by at least the factor (l-1)/l; a violation aborts with
    ConvergenceStallError since it indicates a broken rotation, not a hard
    instance.
    """
    if target_offdiag <= 0:
        raise ValueError("target must be positive")
    l = root_count(mat)
    trace = JacobiTrace(l=l, d_h_start=cartan_distance(mat))
    rotations: list[RotationStep] = []
    budget = iteration_budget(mat, target_offdiag)
    cur = mat
    off2 = offdiag_frobenius(cur) ** 2
    while offdiag_frobenius(cur) > target_offdiag:
        if trace.r >= budget + 1:
            raise ConvergenceStallError(
                f"exceeded closed-form budget {budget} without converging"
            )
        try:
            step, nxt = jacobi_step(cur)
        except AlreadyDiagonalError:
            break  # pivots at the float floor; downstream verification decides
        new_off2 = offdiag_frobenius(nxt) ** 2
        bound = (l - 1.0) / l
        ratio = new_off2 / off2 if off2 > 0 else 0.0
        if ratio > bound + 1e-9:
            raise ConvergenceStallError(
                f"contraction ratio {ratio:.6f} above (l-1)/l = {bound:.6f}"
            )
        trace.steps.append({
            "kind": step.kind, "i": step.i, "j": step.j, "a": step.a, "b": step.b,
            "d_h": cartan_distance(nxt), "off2_ratio": ratio,
            "ph_defect": ph_defect(nxt.m) if isinstance(nxt, NambuMatrix) else 0.0,
        })
        rotations.append(step)
        cur, off2 = nxt, new_off2
    return rotations, cur, trace


# --- Fock-space and sector oracles --------------------------------------------


def _jw_lowering(n: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilation operators on n qubits (site 0 leftmost)."""
    z = np.diag([1.0, -1.0]).astype(complex)
    low = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
    ops = []
    for i in range(n):
        m = np.array([[1.0]], dtype=complex)
        for k in range(n):
            if k < i:
                m = np.kron(m, z)
            elif k == i:
                m = np.kron(m, low)
            else:
                m = np.kron(m, np.eye(2))
        ops.append(m)
    return ops


def fock_rep_fermionic(h: QuadraticFermionH) -> np.ndarray:
    """Dense Fock-space matrix of the Hamiltonian via Jordan-Wigner."""
    n = h.n
    if n > FOCK_MAX_MODES:
        raise DimensionOverflowError(f"n={n} modes exceeds Fock cap {FOCK_MAX_MODES}")
    c = _jw_lowering(n)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            if h.alpha[i, j] != 0:
                out += h.alpha[i, j] * (c[i].conj().T @ c[j])
            if h.beta[i, j] != 0:
                out += h.beta[i, j] * (c[i] @ c[j])
                out -= np.conj(h.beta[i, j]) * (c[i].conj().T @ c[j].conj().T)
    return out


def fermionic_root_operator(kind: str, i: int, j: int, a: float, b: float,
                            n: int) -> np.ndarray:
    """Fock matrix of a X + b Y for a hopping or pairing root."""
    c = _jw_lowering(n)
    if kind == "hop":
        base = c[i].conj().T @ c[j]
        x = base + base.conj().T
        y = -1j * (base - base.conj().T)
    elif kind == "pair":
        base = c[i] @ c[j]
        x = base + base.conj().T
        y = -1j * (base - base.conj().T)
    else:
        raise ValueError(f"unknown rotation kind {kind!r}")
    return a * x + b * y


def number_operator_fock(i: int, n: int) -> np.ndarray:
    c = _jw_lowering(n)
    return c[i].conj().T @ c[i]


def sector_basis(n: int, m: int) -> list[tuple[int, ...]]:
    """Occupation tuples with m total bosons in n modes, lexicographic."""
    if n == 1:
        return [(m,)]
    out = []
    for head in range(m, -1, -1):
        for rest in sector_basis(n - 1, m - head):
            out.append((head,) + rest)
    return out


def sector_rep_bosonic(alpha: np.ndarray, m: int) -> np.ndarray:
    """Number-conserving Hamiltonian sum a_ij c^dag_i c_j on the m-boson sector."""
    alpha = np.asarray(alpha, dtype=complex)
    n = alpha.shape[0]
    basis = sector_basis(n, m)
    dim = len(basis)
    if dim > SECTOR_DIM_CAP:
        raise DimensionOverflowError(f"sector dimension {dim} exceeds {SECTOR_DIM_CAP}")
    index = {occ: k for k, occ in enumerate(basis)}
    out = np.zeros((dim, dim), dtype=complex)
    for col, occ in enumerate(basis):
        for i in range(n):
            for j in range(n):
                if alpha[i, j] == 0:
                    continue
                if i == j:
                    out[col, col] += alpha[i, i] * occ[i]
                    continue
                if occ[j] == 0:
                    continue
                target = list(occ)
                target[j] -= 1
                target[i] += 1
                row = index[tuple(target)]
                out[row, col] += alpha[i, j] * math.sqrt(occ[j] * (occ[i] + 1))
    return out


def bosonic_root_sector(i: int, j: int, a: float, b: float, n: int, m: int) -> np.ndarray:
    w = a - 1j * b
    gen = np.zeros((n, n), dtype=complex)
    gen[i, j] = w
    gen[j, i] = np.conj(w)
    return sector_rep_bosonic(gen, m)


def algebra_basis_dims(n: int) -> tuple[int, int]:
    """(dim so(2n), dim su(n)) from explicitly constructed generator bases."""
    so2n = n  # Cartan: number operators
    so2n += 2 * (n * (n - 1) // 2)  # hopping X, Y
    so2n += 2 * (n * (n - 1) // 2)  # pairing X, Y
    sun = (n - 1) + 2 * (n * (n - 1) // 2)
    return so2n, sun


# --- fast-forwarding circuits ---------------------------------------------------


def _fermionic_gate(step: RotationStep, n: int, invert: bool = False) -> Gate:
    sign = -1.0 if invert else 1.0
    gen = fermionic_root_operator(step.kind, step.i, step.j,
                                  sign * step.a, sign * step.b, n)
    # Gate.block computes exp(-i*angle*gen); angle -1 gives exp(i (aX + bY))
    return Gate("frot", tuple(range(n)), generator=gen, angle=-1.0,
                meta={"kind": step.kind, "modes": [step.i, step.j],
                      "a": sign * step.a, "b": sign * step.b,
                      "rho": math.hypot(step.a, step.b),
                      "model": CostModel.FERMIONIC_WEIGHT2.value})


@dataclass(eq=False)
class LieFFReport:
    n: int
    t: float
    horizon: float
    epsilon: float
    r: int
    l: int
    target_offdiag: float
    fock_error: float
    raw_gates: int
    elementary_gates: int
    empirical_dh_ratio: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "n", "t", "horizon", "epsilon", "r", "l", "target_offdiag",
            "fock_error", "raw_gates", "elementary_gates", "empirical_dh_ratio")}


def fermionic_p(n: int) -> float:
    return 0.5 * math.sqrt(n / (n - 1.0)) if n > 1 else 0.5


def bosonic_p(n: int, m: int) -> float:
    return m / math.sqrt(2.0 * n)


def fermionic_ff_circuit(h: QuadraticFermionH, t: float, horizon: float,
                         epsilon: float, *, seed: int = 0,
                         n_test_states: int = 20):
    """Diagonalize-then-phase circuit for exp(-i t H), t <= horizon.

    Runs Jacobi on the Nambu matrix until the residual off-diagonal piece
    costs at most epsilon/2 over the full horizon (spectral norm bounded by
    p(n) times the Cartan distance), then emits rotations, per-mode number
    phases, and the inverse rotations. Verified against the Jordan-Wigner
    oracle on random states when the Fock space is materializable.
    """
    if abs(t) > horizon:
        raise ValueError(f"t={t} beyond horizon {horizon}")
    n = h.n
    nam = nambu_matrix(h)
    target_dh = epsilon / (2.0 * horizon * fermionic_p(n))
    target_off = target_dh / dh_per_offdiag(nam)
    rotations, diag, trace = jacobi_diagonalize(nam, target_off)

    # operator is V1..Vr e^{-itD} Vr^dag..V1^dag, so V1^dag is applied first
    gates: list[Gate] = []
    for step in rotations:
        gates.append(_fermionic_gate(step, n, invert=True))
    d_modes = np.diag(diag.m)[:n].real
    for j_mode in range(n):
        theta = wrap_angle(t * float(d_modes[j_mode]))
        if theta == 0.0:
            continue
        gates.append(Gate("fphase", tuple(range(n)),
                          generator=number_operator_fock(j_mode, n), angle=theta,
                          meta={"mode": j_mode,
                                "model": CostModel.FERMIONIC_WEIGHT2.value}))
    for step in reversed(rotations):
        gates.append(_fermionic_gate(step, n))
    gphase = wrap_angle(t * (0.5 * float(np.sum(d_modes))
                             - 0.5 * float(np.trace(h.alpha).real)))
    circuit = Circuit((2,) * n, tuple(gates), CostModel.FERMIONIC_WEIGHT2,
                      global_phase=gphase)

    h_fock = fock_rep_fermionic(h)
    u_exact = evolve_exact(h_fock, t)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_test_states):
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        worst = max(worst, float(np.linalg.norm(apply(circuit, psi) - u_exact @ psi)))
    if worst > epsilon:
        raise ToleranceUnachievableError(
            f"Fock error {worst:.3e} exceeds epsilon {epsilon:g}"
        )
    gc = count(circuit)
    off_spec = float(np.linalg.norm(nam.m - np.diag(np.diag(nam.m)), ord=2))
    report = LieFFReport(
        n=n, t=t, horizon=horizon, epsilon=epsilon, r=trace.r, l=trace.l,
        target_offdiag=target_off, fock_error=worst,
        raw_gates=gc.raw_gates, elementary_gates=gc.elementary_count,
        empirical_dh_ratio=(trace.d_h_start / off_spec if off_spec > 0 else 0.0),
    )
    return circuit, report, trace


def bosonic_ff_circuit(alpha, t: float, m: int, horizon: float, epsilon: float,
                       *, seed: int = 0, n_test_states: int = 20):
    """Sector-restricted analogue: rotations on the mode matrix, number
    phases on the traceless diagonal, the mean energy folded into a global
    sector phase."""
    if abs(t) > horizon:
        raise ValueError(f"t={t} beyond horizon {horizon}")
    mode = alpha if isinstance(alpha, ModeMatrix) else ModeMatrix(alpha)
    if np.abs(mode.alpha).max(initial=0) > 1 + 1e-9:
        raise ValueError("Hamiltonian entries must satisfy |a_ij| <= 1")
    n = mode.n
    mean = float(np.trace(mode.alpha).real) / n
    traceless = ModeMatrix(mode.alpha - mean * np.eye(n))
    target_dh = epsilon / (2.0 * horizon * bosonic_p(n, m))
    target_off = target_dh / dh_per_offdiag(traceless)
    rotations, diag, trace = jacobi_diagonalize(traceless, target_off)

    basis = sector_basis(n, m)
    dim = len(basis)
    occupations = np.array(basis)

    def sector_gate(step: RotationStep, invert: bool) -> Gate:
        sign = -1.0 if invert else 1.0
        gen = bosonic_root_sector(step.i, step.j, sign * step.a, sign * step.b, n, m)
        return Gate("brot", (0,), generator=gen, angle=-1.0,
                    meta={"modes": [step.i, step.j], "a": sign * step.a,
                          "b": sign * step.b, "rho": math.hypot(step.a, step.b),
                          "model": CostModel.BOSONIC_WEIGHT2.value})

    gates: list[Gate] = []
    for step in rotations:
        gates.append(sector_gate(step, invert=True))
    d_modes = np.diag(diag.alpha).real
    for j_mode in range(n):
        theta = wrap_angle(t * float(d_modes[j_mode]))
        if theta == 0.0:
            continue
        gen = np.diag(occupations[:, j_mode].astype(float)).astype(complex)
        gates.append(Gate("bphase", (0,), generator=gen, angle=theta,
                          meta={"mode": j_mode,
                                "model": CostModel.BOSONIC_WEIGHT2.value}))
    for step in reversed(rotations):
        gates.append(sector_gate(step, invert=False))
    circuit = Circuit((dim,), tuple(gates), CostModel.BOSONIC_WEIGHT2,
                      global_phase=wrap_angle(-t * mean * m))

    h_sector = sector_rep_bosonic(mode.alpha, m)
    u_exact = evolve_exact(h_sector, t)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_test_states):
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        worst = max(worst, float(np.linalg.norm(apply(circuit, psi) - u_exact @ psi)))
    if worst > epsilon:
        raise ToleranceUnachievableError(
            f"sector error {worst:.3e} exceeds epsilon {epsilon:g}"
        )
    gc = count(circuit)
    off_spec = float(np.linalg.norm(traceless.alpha - np.diag(np.diag(traceless.alpha)), ord=2))
    report = LieFFReport(
        n=n, t=t, horizon=horizon, epsilon=epsilon, r=trace.r, l=trace.l,
        target_offdiag=target_off, fock_error=worst,
        raw_gates=gc.raw_gates, elementary_gates=gc.elementary_count,
        empirical_dh_ratio=(trace.d_h_start / off_spec if off_spec > 0 else 0.0),
    )
    return circuit, report, trace


# --- instance serialization ---------------------------------------------------


def _cmat_json(m: np.ndarray):
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def fermion_instance_to_json(h: QuadraticFermionH) -> str:
    return json.dumps({"alpha": _cmat_json(h.alpha), "beta": _cmat_json(h.beta)},
                      sort_keys=True)


def boson_instance_to_json(mode: ModeMatrix) -> str:
    return json.dumps({"alpha": _cmat_json(mode.alpha)}, sort_keys=True)


def instance_from_json(text: str):
    data = json.loads(text)
    alpha = np.array([[complex(re, im) for re, im in row] for row in data["alpha"]])
    if "beta" in data and data["beta"] is not None:
        beta = np.array([[complex(re, im) for re, im in row] for row in data["beta"]])
        return QuadraticFermionH(alpha, beta)
    return ModeMatrix(alpha)


def random_fermionic(n: int, seed: int, pairing: bool = True) -> QuadraticFermionH:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = 0.5 * (a + a.conj().T)
    a /= max(1.0, np.abs(a).max())
    if pairing:
        b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = 0.5 * (b - b.T)
        b /= max(1.0, np.abs(b).max())
    else:
        b = np.zeros((n, n), dtype=complex)
    return QuadraticFermionH(a, b)


def random_bosonic(n: int, seed: int) -> ModeMatrix:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = 0.5 * (a + a.conj().T)
    a /= max(1.0, np.abs(a).max())
    return ModeMatrix(a)
