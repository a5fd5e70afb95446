"""Primitive unitaries on an N-spin register.

Spin-1/2 operators S^a = sigma^a / 2. Spin 0 occupies the highest-order
tensor factor, so on basis index b the state of spin k is bit (N-1-k).
Exchange evolution exp(-i xi S_i.S_j) and global field pulses
prod_k exp(-i theta_k S_k^a) are built from closed forms; the generic
eigendecomposition oracle in linalg exists to cross-check them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import kron

# Physical constants, pinned so reported device numbers are reproducible
# rather than CODATA-revision-sensitive.
MU_BOHR = 9.27e-24  # J/T
HBAR = 1.0546e-34  # J*s

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
AXES = ("x", "y", "z")


class IndexOutOfRange(IndexError):
    """Spin index outside the register."""


class EqualIndices(ValueError):
    """Two-spin operation addressed to a single spin."""


class LengthMismatch(ValueError):
    """Per-spin list does not match the register size."""


class NegativeDuration(ValueError):
    """A time or time integral is negative."""


class ZeemanConvention(enum.Enum):
    """Mapping from field-time product to rotation angle.

    HALF_GYRO: theta = g*mu_B/(2*hbar) * B * integral(f), the spin-1/2
    operator convention. FULL_GYRO drops the 1/2; it is the convention
    under which a pi rotation across a 1.8 mT increment takes 10 ns.
    Both are kept explicit because device estimates and the operator
    definition do not agree on the factor; callers choose.
    """

    HALF_GYRO = "half_gyromagnetic"
    FULL_GYRO = "full_gyromagnetic"


@dataclass(frozen=True)
class RegisterSpec:
    """N spin-1/2 sites, indices 0..N-1."""

    n_spins: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_spins <= 12:
            raise ValueError(f"register size {self.n_spins} outside 1..12")

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins


def _check_index(reg: RegisterSpec, k: int) -> None:
    if not 0 <= k < reg.n_spins:
        raise IndexOutOfRange(f"spin {k} outside register of {reg.n_spins}")


def spin_operator(reg: RegisterSpec, k: int, axis: str) -> np.ndarray:
    """S_k^axis embedded in the full register."""
    _check_index(reg, k)
    if axis not in PAULI:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    m = np.array([[1.0 + 0j]])
    for q in range(reg.n_spins):
        m = kron(m, PAULI[axis] / 2 if q == k else np.eye(2))
    return m


def rotation_2x2(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle sigma^axis / 2). z-axis result is exactly diagonal."""
    c = math.cos(angle / 2)
    s = math.sin(angle / 2)
    if axis == "z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]])
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def swap_matrix(reg: RegisterSpec, i: int, j: int) -> np.ndarray:
    """Permutation unitary exchanging the states of spins i and j."""
    _check_index(reg, i)
    _check_index(reg, j)
    if i == j:
        raise EqualIndices(f"spin indices coincide: {i}")
    n = reg.n_spins
    bi, bj = n - 1 - i, n - 1 - j
    idx = np.arange(reg.dim)
    vi = (idx >> bi) & 1
    vj = (idx >> bj) & 1
    perm = idx ^ ((vi ^ vj) << bi) ^ ((vi ^ vj) << bj)
    m = np.zeros((reg.dim, reg.dim), dtype=complex)
    m[perm, idx] = 1.0
    return m


def exchange_unitary(reg: RegisterSpec, i: int, j: int, xi: float) -> np.ndarray:
    """exp(-i xi S_i.S_j) via the swap decomposition.

    S_i.S_j = (SWAP - I/2)/2, so the evolution closes to
    e^{i xi/4} (cos(xi/2) I - i sin(xi/2) SWAP).
    """
    sw = swap_matrix(reg, i, j)
    phase = np.exp(1j * xi / 4)
    c = math.cos(xi / 2)
    s = math.sin(xi / 2)
    return phase * (c * np.eye(reg.dim) - 1j * s * sw)


def xy_exchange_unitary(reg: RegisterSpec, i: int, j: int, phi: float) -> np.ndarray:
    """exp(-i phi (S_i^x S_j^x + S_i^y S_j^y)).

    The generator vanishes outside the anti-aligned two-spin block and acts
    as half a Pauli-x inside it, so with the block projector P the closed
    form is I + (cos(phi/2)-1) P - i sin(phi/2) (2H).
    """
    _check_index(reg, i)
    _check_index(reg, j)
    if i == j:
        raise EqualIndices(f"spin indices coincide: {i}")
    h = (spin_operator(reg, i, "x") @ spin_operator(reg, j, "x")
         + spin_operator(reg, i, "y") @ spin_operator(reg, j, "y"))
    proj = 0.5 * np.eye(reg.dim) - 2.0 * (
        spin_operator(reg, i, "z") @ spin_operator(reg, j, "z"))
    return (np.eye(reg.dim) + (math.cos(phi / 2) - 1.0) * proj
            - 1j * math.sin(phi / 2) * (2.0 * h))


@dataclass(frozen=True)
class ZeemanPulseParams:
    """One global field pulse: per-spin rotation angles about one axis.

    Optional provenance records the physical origin (g-factors, fields in
    tesla, integrated profile in seconds); when present it must reproduce
    the angles under the HALF_GYRO convention to relative 1e-10.
    """

    axis: str
    angles: tuple
    g_factors: Optional[tuple] = None
    fields_tesla: Optional[tuple] = None
    profile_integral_s: Optional[float] = None

    def __post_init__(self) -> None:
        if self.axis not in PAULI:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if not all(math.isfinite(a) for a in self.angles):
            raise ValueError("non-finite angle")
        prov = (self.g_factors, self.fields_tesla, self.profile_integral_s)
        if any(p is not None for p in prov):
            if any(p is None for p in prov):
                raise ValueError("provenance requires g_factors, fields_tesla "
                                 "and profile_integral_s together")
            expected = zeeman_angles(self.g_factors, self.fields_tesla,
                                     self.profile_integral_s,
                                     ZeemanConvention.HALF_GYRO)
            for got, want in zip(self.angles, expected, strict=True):
                ref = max(abs(want), 1e-30)
                if abs(got - want) > 1e-10 * ref:
                    raise ValueError(
                        f"angle {got!r} inconsistent with provenance {want!r}")

    def is_inhomogeneous(self, i: int, j: int) -> bool:
        """True when the pair angles are neither equal nor opposite."""
        ti, tj = self.angles[i], self.angles[j]
        return abs(ti - tj) > 1e-12 and abs(ti + tj) > 1e-12


def global_field_unitary(reg: RegisterSpec, p: ZeemanPulseParams) -> np.ndarray:
    """prod_k exp(-i angles[k] S_k^axis), as a tensor product of 2x2 rotations."""
    if len(p.angles) != reg.n_spins:
        raise LengthMismatch(
            f"{len(p.angles)} angles for register of {reg.n_spins}")
    m = np.array([[1.0 + 0j]])
    for a in p.angles:
        m = kron(m, rotation_2x2(p.axis, a))
    return m


def zeeman_angles(g: Sequence[float], b_tesla: Sequence[float],
                  profile_integral_s: float,
                  convention: ZeemanConvention) -> tuple:
    """Rotation angles accumulated by each spin over one field pulse."""
    if len(g) != len(b_tesla):
        raise LengthMismatch(f"{len(g)} g-factors vs {len(b_tesla)} fields")
    if profile_integral_s < 0:
        raise NegativeDuration(f"profile integral {profile_integral_s}")
    divisor = 2.0 if convention is ZeemanConvention.HALF_GYRO else 1.0
    return tuple(gk * MU_BOHR / (divisor * HBAR) * bk * profile_integral_s
                 for gk, bk in zip(g, b_tesla))
