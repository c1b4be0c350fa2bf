"""Sine bases and structure constants for sl(N), the sin_hbar algebra of the
noncommutative torus, one-loop trig and two-loop rational algebras, and the
dispersionless Poisson algebra.

Conventions.  The cross product helper is cross(a, b) = a1*b2 - a2*b1.  Every
sine family evaluates its structure constant on the opposite combination
a2*b1 - a1*b2 = -cross(a, b); that sign is pinned once by the
matrix-representation identity [T^a, T^b] = C(a,b) T^{a+b} and is the same
for all families, so the ratio tests between families are exact.

The sl(N) basis is normalized as

    T^a = (N / 2 pi i) exp(i pi a1 a2 / N) Q^{a1} Lam^{a2},

the unique scaling for which the Pauli map sigma_1 = i pi T^{0,1},
sigma_2 = i pi T^{1,1}, sigma_3 = -i pi T^{1,0} holds exactly at N = 2.
With half-integer exponents, T is 2N-periodic in its indices:
T^{a + N k} = (-1)^(k1 a2 + k2 a1 + N k1 k2) T^a, which is the single phase
table that accompanies every mod-N index reduction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange

Index = tuple[int, int]

FAMILIES = ("slN", "sin_hbar", "loop_trig", "loop_rat", "poisson")


@dataclass(frozen=True)
class StructureFamily:
    """A structure-constant family and its parameters."""

    family: str
    N: int = 0
    hbar: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family in ("slN", "loop_trig", "loop_rat") and self.N < 2:
            raise ValueError(f"{self.family} needs N >= 2")
        if self.family == "sin_hbar" and not (0.0 < self.hbar < 1.0):
            raise ValueError("sin_hbar needs hbar in (0, 1)")


def cross(a: Index, b: Index) -> int:
    """a x b = a1*b2 - a2*b1 (the package-wide convention)."""
    return a[0] * b[1] - a[1] * b[0]


def reduce_mod(a: Index, N: int) -> Index:
    return (a[0] % N, a[1] % N)


def reduction_phase(a: Index, N: int) -> int:
    """(-1)^phi relating T^a to T^(a mod N); +-1."""
    g = reduce_mod(a, N)
    k1 = (a[0] - g[0]) // N
    k2 = (a[1] - g[1]) // N
    return -1 if (k1 * g[1] + k2 * g[0] + N * k1 * k2) % 2 else 1


def thooft_matrices(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Clock Q = diag(e_N(1), ..., e_N(N)=1) and cyclic shift Lam."""
    if N < 2:
        raise IndexOutOfRange("N must be >= 2")
    w = cmath.exp(2j * math.pi / N)
    Q = np.diag([w ** (j + 1) for j in range(N)]).astype(complex)
    Lam = np.zeros((N, N), dtype=complex)
    for j in range(N):
        Lam[j, (j + 1) % N] = 1.0
    return Q, Lam


def _mat_pow(m: np.ndarray, p: int) -> np.ndarray:
    if p >= 0:
        return np.linalg.matrix_power(m, p)
    return np.linalg.matrix_power(np.conj(m.T), -p)  # Q, Lam are unitary


def sine_basis(alpha: Index, N: int) -> np.ndarray:
    """T^alpha in the normalization fixed by the N=2 sigma map."""
    a1, a2 = alpha
    Q, Lam = thooft_matrices(N)
    pref = (N / (2j * math.pi)) * cmath.exp(1j * math.pi * a1 * a2 / N)
    return pref * _mat_pow(Q, a1) @ _mat_pow(Lam, a2)


def sigma_matrices() -> tuple[np.ndarray, ...]:
    """(sigma_0 .. sigma_3); sigma_1 = i pi T^{0,1}, sigma_2 = i pi T^{1,1},
    sigma_3 = -i pi T^{1,0} in the N=2 sine basis."""
    s0 = np.eye(2, dtype=complex)
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return s0, s1, s2, s3


def _sl_constant(a: Index, b: Index, N: int) -> complex:
    # [T^a, T^b] = C T^{a+b} exactly on unreduced indices
    return -(N / math.pi) * math.sin(math.pi * cross(a, b) / N)


def structure_constant(fam: StructureFamily, alpha: Index, beta: Index) -> complex:
    """C(alpha, beta) such that the family bracket closes on the stored
    (reduced) index representatives, including reduction phases."""
    a, b = tuple(alpha), tuple(beta)
    f = fam.family
    if f == "slN":
        N = fam.N
        _require(all(0 <= x < N for x in a + b) and a != (0, 0) and b != (0, 0),
                 f"slN indices must be nonzero elements of Z_{N} x Z_{N}")
        return _sl_constant(a, b, N) * reduction_phase((a[0] + b[0], a[1] + b[1]), N)
    if f == "sin_hbar":
        h = fam.hbar
        _require(a != (0, 0) and b != (0, 0), "sin_hbar indices must be nonzero")
        return -math.sin(math.pi * h * cross(a, b)) / (math.pi * h)
    if f == "loop_trig":
        N = fam.N
        _require(0 <= a[0] < N and 0 <= b[0] < N and a != (0, 0) and b != (0, 0),
                 "loop_trig first index must lie in [0, N)")
        # full-index sine formula; only the first component reduces mod N
        c = _sl_constant(a, b, N)
        if a[0] + b[0] >= N:
            c *= -1 if (a[1] + b[1]) % 2 else 1
        return c
    if f == "loop_rat":
        _require(a != (0, 0) and b != (0, 0), "loop_rat indices must be nonzero")
        return _sl_constant(a, b, fam.N)
    if f == "poisson":
        _require(a != (0, 0) and b != (0, 0), "poisson indices must be nonzero")
        return complex(-cross(a, b))
    raise IndexOutOfRange(f"no structure constants for family {f!r}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise IndexOutOfRange(msg)


def sl_index_set(N: int) -> list[Index]:
    """Z_N^(2): nonzero pairs mod N."""
    return [(i, j) for i in range(N) for j in range(N) if (i, j) != (0, 0)]


def conjugate_index(fam: StructureFamily, alpha: Index) -> Index:
    """The index pairing with alpha in the Casimir sum."""
    if fam.family == "slN":
        return reduce_mod((-alpha[0], -alpha[1]), fam.N)
    if fam.family == "loop_trig":
        return ((-alpha[0]) % fam.N, -alpha[1])
    return (-alpha[0], -alpha[1])
