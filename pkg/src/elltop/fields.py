"""The universal phase-space container (sparse spin fields over
block / lattice-index / Fourier-mode keys), Lie-Poisson brackets, Casimir
functions, and the gyrostat-field constraint projector.

Keys are (block, (a1, a2), n).  Single-block families use block 0; the
gyrostat family uses blocks 0..3 (bit vectors (0,0), (0,1), (1,1), (1,0)).
For torus / dispersionless families the mode index n is fixed to 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import algebra
from .algebra import Index, StructureFamily
from .errors import IndexOutOfRange

Key = tuple[int, Index, int]

# gyrostat blocks and vector labels as bit vectors; sigma_1 <-> (0,1),
# sigma_2 <-> (1,1), sigma_3 <-> (1,0); block b=0 is (0,0)
ZVG_BLOCK_BITS = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
ZVG_BITS_BLOCK = {v: k for k, v in ZVG_BLOCK_BITS.items()}
SIGMA_LABELS = {1: (0, 1), 2: (1, 1), 3: (1, 0)}
LABEL_OF_BITS = {v: k for k, v in SIGMA_LABELS.items()}


def epsilon_sigma(a: int, b: int, c: int) -> int:
    """Levi-Civita symbol on sigma labels 1..3."""
    return ((a - b) * (b - c) * (c - a)) // 2


def bits_cross(b: Index, a: Index) -> int:
    """b x a = b1*a2 - b2*a1 (the reflection weight of the constraint)."""
    return b[0] * a[1] - b[1] * a[0]


@dataclass(frozen=True)
class CocenterPair:
    """Cocentral charges: k, its dual kbar, the level lambda and kappa.

    kbar evolves exactly: kbar(tau) = kbar0 + (k/kappa)(tau - tau0); lambda
    is inert and only shifts Hamiltonians by k*lambda.
    """

    k: complex = 0.0
    kbar: complex = 0.0
    lam: complex = 0.0
    kappa: complex = 1.0

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")

    def advanced(self, dtau: complex) -> "CocenterPair":
        return CocenterPair(self.k, self.kbar + (self.k / self.kappa) * dtau,
                            self.lam, self.kappa)


class SpinField:
    """Finite-support complex map over (block, alpha, n); immutable."""

    __slots__ = ("family", "blocks", "window", "_data")

    def __init__(self, family: StructureFamily, entries: dict[Key, complex],
                 blocks: int = 1, window: int | None = None):
        data = {}
        for (b, a, n), v in entries.items():
            v = complex(v)
            if v == 0:
                continue
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"non-finite entry at {(b, a, n)}")
            if not 0 <= b < blocks:
                raise IndexOutOfRange(f"block {b} outside 0..{blocks - 1}")
            if tuple(a) == (0, 0):
                raise IndexOutOfRange("alpha = (0,0) is excluded from sl-type supports")
            data[(b, tuple(a), n)] = v
        self.family = family
        self.blocks = blocks
        self.window = window
        self._data = data

    # -- mapping access -------------------------------------------------
    def items(self):
        return sorted(self._data.items())

    def get(self, key: Key, default: complex = 0.0) -> complex:
        return self._data.get((key[0], tuple(key[1]), key[2]), default)

    def keys(self):
        return sorted(self._data.keys())

    def __len__(self):
        return len(self._data)

    def __eq__(self, other):
        return isinstance(other, SpinField) and self._data == other._data \
            and self.family == other.family and self.blocks == other.blocks

    # -- algebra ---------------------------------------------------------
    def scaled(self, c: complex) -> "SpinField":
        return SpinField(self.family, {k: c * v for k, v in self._data.items()},
                         self.blocks, self.window)

    def plus(self, other: "SpinField", c: complex = 1.0) -> "SpinField":
        out = dict(self._data)
        for k, v in other._data.items():
            out[k] = out.get(k, 0.0) + c * v
        return SpinField(self.family, out, self.blocks, self.window)

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._data.values()))

    def mode_width(self) -> int:
        return max((abs(k[2]) for k in self._data), default=0)

    def index_width(self) -> int:
        return max((max(abs(k[1][0]), abs(k[1][1])) for k in self._data), default=0)

    # -- serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        params: dict = {"N": self.family.N, "hbar": self.family.hbar}
        return {
            "family": self.family.family,
            "params": params,
            "blocks": self.blocks,
            "entries": [[b, a[0], a[1], n, v.real, v.imag]
                        for (b, a, n), v in self.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SpinField":
        fam = StructureFamily(obj["family"], N=obj["params"].get("N", 0),
                              hbar=obj["params"].get("hbar", 0.0))
        entries = {(b, (a1, a2), n): complex(re, im)
                   for b, a1, a2, n, re, im in obj["entries"]}
        return cls(fam, entries, blocks=obj.get("blocks", 1))


# sigma-basis pseudo-family for the gyrostat container (structure handled
# by the dedicated bracket below, not by algebra.structure_constant)
ZVG_FAMILY = StructureFamily("slN", N=2)


def zvg_field(entries: dict[Key, complex], window: int | None = None) -> SpinField:
    return SpinField(ZVG_FAMILY, entries, blocks=4, window=window)


def casimir(S: SpinField, pairing: str = "lattice") -> complex:
    """H2 = sum over stored support of S^alpha_{b,n} S^{conj(alpha)}_{b,-n}.

    pairing:
      lattice   - conj(alpha) = -alpha in the family's index set (default);
      sigma     - conj(alpha) = alpha (N=2 sigma labels, e.g. gyrostat blocks);
      chevalley - keys (1,0)=S3, (0,1)=S+, (1,1)=S-: S3 S3 + 2 S+ S- + 2 S- S+;
      plane     - conj(alpha) = (S1,S2) only (contracted sl2 scaling family).
    """
    total = 0.0 + 0.0j
    for (b, a, n), v in S.items():
        if pairing == "lattice":
            conj = algebra.conjugate_index(S.family, a)
        elif pairing == "sigma":
            conj = a
        elif pairing == "chevalley":
            conj = {(1, 0): (1, 0), (0, 1): (1, 1), (1, 1): (0, 1)}[a]
            weight = 1.0 if a == (1, 0) else 2.0
            total += weight * v * S.get((b, conj, -n))
            continue
        elif pairing == "plane":
            if a == (1, 0):   # S3 drops from the contracted Casimir
                continue
            conj = a
        else:
            raise ValueError(f"unknown pairing {pairing!r}")
        total += v * S.get((b, conj, -n))
    return total


def lie_poisson_bracket(fam: StructureFamily, a: Key, b: Key,
                        contracted: str | None = None,
                        N: int = 0, hbar: float = 0.0):
    """{S_a, S_b} as a sparse list [((block, gamma, l), coeff), ...].

    fam selects the plain structure-constant families; contracted selects
    one of the scaling-limit algebras ('sin' with hbar, 'sl' with N,
    'poisson') whose only nonzero brackets involve an alpha_2 = 0 index;
    fam='zvg' (passed as the string) selects the reflected gyrostat bracket.
    """
    (ba, aa, na), (bb, ab, nb) = (a[0], tuple(a[1]), a[2]), (b[0], tuple(b[1]), b[2])
    if fam == "zvg":
        if ba != bb:
            return []
        la, lb = LABEL_OF_BITS[aa], LABEL_OF_BITS[ab]
        bits = ZVG_BLOCK_BITS[ba]
        out = []
        for lg in (1, 2, 3):
            epsv = epsilon_sigma(la, lb, lg)
            if epsv == 0:
                continue
            g = SIGMA_LABELS[lg]
            out.append(((ba, g, na + nb), 1j * epsv))
            refl = (-1) ** (bits_cross(bits, aa) % 2)
            out.append(((ba, g, nb - na), 1j * epsv * refl))
        return out
    if contracted is not None:
        if aa[1] == 0 and ab[1] == 0:
            return []
        if aa[1] != 0 and ab[1] != 0:
            return []
        if aa[1] == 0:
            sgn, zero, other = 1.0, aa, ab
        else:
            sgn, zero, other = -1.0, ab, aa
        x = zero[0] * other[1]
        if contracted == "sin":
            c = math.sin(math.pi * hbar * x) / (math.pi * hbar)
        elif contracted == "sl":
            c = (N / math.pi) * math.sin(math.pi * x / N)
        elif contracted == "poisson":
            c = float(x)
        else:
            raise ValueError(f"unknown contracted algebra {contracted!r}")
        if c == 0.0:
            return []
        g = (aa[0] + ab[0], aa[1] + ab[1])
        return [((ba, g, na + nb), sgn * c)]
    if ba != bb:
        return []
    g = (aa[0] + ab[0], aa[1] + ab[1])
    if fam.family == "slN":
        g = algebra.reduce_mod(g, fam.N)
    elif fam.family == "loop_trig":
        g = (g[0] % fam.N, g[1])
    if g == (0, 0):
        return []
    c = algebra.structure_constant(fam, aa, ab)
    if c == 0.0:
        return []
    return [((ba, g, na + nb), c)]


def zvg_constraint_project(S: SpinField) -> SpinField:
    """Symmetrization S^al_{b,n} <- (S^al_{b,n} + (-1)^(b x al) S^al_{b,-n})/2."""
    out: dict[Key, complex] = {}
    for (b, a, n), v in S.items():
        bits = ZVG_BLOCK_BITS[b]
        sign = (-1) ** (bits_cross(bits, a) % 2)
        half = 0.5 * v
        out[(b, a, n)] = out.get((b, a, n), 0.0) + half
        out[(b, a, -n)] = out.get((b, a, -n), 0.0) + sign * half
    return SpinField(S.family, out, S.blocks, S.window)


def zvg_constraint_residual(S: SpinField) -> float:
    """Max |S^al_{b,n} - (-1)^(b x al) S^al_{b,-n}| over the support."""
    worst = 0.0
    for (b, a, n), v in S.items():
        bits = ZVG_BLOCK_BITS[b]
        sign = (-1) ** (bits_cross(bits, a) % 2)
        worst = max(worst, abs(v - sign * S.get((b, a, -n))))
    return worst
