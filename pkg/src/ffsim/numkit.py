"""Dense complex linear-algebra kernel.

Everything downstream verifies synthesized circuits against exact dense
computations, so this module owns the oracle substrate: Hermitian
eigendecomposition, exact propagators, PSD square roots, and two-level
(Givens) factorization of unitaries.

Tolerance ladder: 1e-12 for constructions, 1e-10 for decomposition
residuals, 1e-9 for composed pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitianError, NotPSDError, NotUnitaryError

HERMITIAN_RTOL = 1e-10
UNITARY_ATOL = 1e-9
PSD_CLAMP = 1e-10
# entries below this are treated as structural zeros when factorizing
GIVENS_ZERO = 1e-14


def as_operator(a) -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def check_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    m = as_operator(a)
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - m.conj().T) > rtol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian within {rtol:g} (relative)"
        )
    return m


def check_unitary(a: np.ndarray, atol: float = UNITARY_ATOL) -> np.ndarray:
    m = as_operator(a)
    defect = np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]))
    if defect > atol:
        raise NotUnitaryError(f"unitarity defect {defect:.3e} exceeds {atol:g}")
    return m


def hermitian_eigendecompose(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns). The
    reconstruction residual ``A V - V diag(w)`` stays below 1e-10 times
    max(1, ||A||) for well-scaled inputs.
    """
    m = check_hermitian(a)
    w, v = np.linalg.eigh(m)
    return w, v


def evolve_exact(h: np.ndarray, t: float) -> np.ndarray:
    """Exact propagator exp(-i t H) of a Hermitian H via eigendecomposition."""
    w, v = hermitian_eigendecompose(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-1e-10, 1e-10] are clamped to zero; anything more
    negative raises NotPSDError. Projector arithmetic routinely produces the
    tiny negative dips the clamp absorbs, and zeroing the matching positive
    dust keeps sqrt from amplifying it to ~1e-8 while moving the square of
    the result by at most the clamp itself.
    """
    w, v = hermitian_eigendecompose(a)
    if w.min() < -PSD_CLAMP:
        raise NotPSDError(f"minimum eigenvalue {w.min():.3e} below -{PSD_CLAMP:g}")
    w = np.where(w <= PSD_CLAMP, 0.0, w)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


@dataclass(frozen=True, eq=False)
class TwoLevelFactor:
    """A unitary acting on basis levels (i, j) of a dim-dimensional space."""

    dim: int
    i: int
    j: int
    block: np.ndarray  # 2x2 unitary, rows/cols ordered (i, j)

    def __post_init__(self):
        if not (0 <= self.i < self.j < self.dim):
            raise ValueError(f"need 0 <= i < j < dim, got ({self.i}, {self.j}, {self.dim})")

    def embed(self) -> np.ndarray:
        full = np.eye(self.dim, dtype=complex)
        ij = np.ix_((self.i, self.j), (self.i, self.j))
        full[ij] = self.block
        return full


def reconstruct_two_level(factors: list[TwoLevelFactor], dim: int) -> np.ndarray:
    """Multiply factors in list order: factors[0] @ factors[1] @ ..."""
    out = np.eye(dim, dtype=complex)
    for f in factors:
        out = out @ f.embed()
    return out


def two_level_decompose(u: np.ndarray) -> list[TwoLevelFactor]:
    """Factor a unitary into two-level Givens rotations plus diagonal phases.

    QR-style reduction: for each column, rotations on row pairs zero out the
    subdiagonal, leaving a diagonal of unit phases which are emitted as
    two-level diagonal factors. The product of the returned factors (in list
    order) reconstructs U to 1e-9. At most dim*(dim-1)/2 rotations and dim
    phase fixups are produced; structurally-zero entries produce no factor,
    so the identity decomposes to an empty list.
    """
    u = check_unitary(u)
    d = u.shape[0]
    if d == 1:
        # a bare phase; no (i, j) pair exists to carry it
        if abs(u[0, 0] - 1.0) <= GIVENS_ZERO:
            return []
        raise ValueError("cannot decompose a 1x1 unitary with nontrivial phase")
    if d == 2:
        if np.linalg.norm(u - np.eye(2)) <= GIVENS_ZERO:
            return []
        return [TwoLevelFactor(2, 0, 1, u.copy())]

    work = u.astype(complex).copy()
    rotations: list[TwoLevelFactor] = []
    for col in range(d - 1):
        for row in range(col + 1, d):
            b = work[row, col]
            if abs(b) <= GIVENS_ZERO:
                continue
            a = work[col, col]
            r = np.hypot(abs(a), abs(b))
            g = np.array([[np.conj(a), np.conj(b)], [-b, a]], dtype=complex) / r
            work[(col, row), :] = g @ work[(col, row), :]
            work[row, col] = 0.0
            rotations.append(TwoLevelFactor(d, col, row, g.conj().T))

    phases = np.angle(np.diag(work))
    factors = rotations
    for k in range(d):
        if abs(np.exp(1j * phases[k]) - 1.0) <= GIVENS_ZERO:
            continue
        i, j = (k, k + 1) if k < d - 1 else (d - 2, d - 1)
        block = np.diag([np.exp(1j * phases[k]), 1.0]).astype(complex)
        if k == d - 1:
            block = np.diag([1.0, np.exp(1j * phases[k])]).astype(complex)
        factors.append(TwoLevelFactor(d, i, j, block))
    return factors
