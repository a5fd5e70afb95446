"""Dense complex matrix kernel: tensor products, Hermitian exponentials,
and global-phase-invariant comparison.

All matrices are square numpy arrays of complex128. Register matrices have
dimension 2**n. Tolerances used across the package live here as named
constants so every module agrees on what "equal" means.
"""

from __future__ import annotations

import numpy as np

# Algebraic identities (closed forms, single products).
TOL_ALGEBRAIC = 1e-12
# Long composed sequences and bystander cancellation checks.
TOL_COMPOSED = 1e-10
# Compiled artifacts: Euler-compiled circuits, schedule round-trips.
TOL_COMPILED = 1e-8
# Hermiticity / unitarity admission checks.
TOL_STRUCTURE = 1e-12


class DimensionMismatch(ValueError):
    """Operands have incompatible dimensions."""


class NotHermitian(ValueError):
    """Matrix fails the Hermiticity check."""


def max_abs(m: np.ndarray) -> float:
    """Largest absolute entry; the package's matrix norm of record."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with a's index major."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"left operand is not square: {a.shape}")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionMismatch(f"right operand is not square: {b.shape}")
    return np.kron(a, b)


def hermitian_expm(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-1j * scale * h) for Hermitian h, via eigendecomposition.

    Serves as the generic oracle against which closed-form unitaries are
    cross-checked. Raises NotHermitian if h deviates from h† by more than
    TOL_STRUCTURE in max-abs norm.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"not square: {h.shape}")
    if max_abs(h - h.conj().T) > TOL_STRUCTURE:
        raise NotHermitian(f"deviation {max_abs(h - h.conj().T):.3e}")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-invariant distance sqrt(max(0, 2 - 2|tr(u†v)|/dim)).

    Computed as the Frobenius distance to the phase-aligned partner,
    norm(u - phi*v)/sqrt(dim) with phi = conj(t)/|t|, t = tr(u†v). This is
    the same quantity but keeps full precision near zero, where the direct
    formula loses half the significant digits to cancellation.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2:
        raise DimensionMismatch(f"{u.shape} vs {v.shape}")
    t = np.trace(u.conj().T @ v)
    if abs(t) == 0.0:
        return float(np.sqrt(2.0))
    phi = np.conj(t) / abs(t)
    d = u.shape[0]
    return float(np.linalg.norm(u - phi * v) / np.sqrt(d))


def is_unitary(u: np.ndarray, tol: float = TOL_STRUCTURE) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def check_unitary(u: np.ndarray, tol: float = TOL_STRUCTURE) -> np.ndarray:
    """Return u unchanged, or raise if it is not unitary to tol."""
    if not is_unitary(u, tol):
        raise ValueError("matrix is not unitary to tolerance "
                         f"{tol:.1e} (deviation "
                         f"{max_abs(np.asarray(u).conj().T @ u - np.eye(np.asarray(u).shape[0])):.3e})")
    return np.asarray(u, dtype=complex)
