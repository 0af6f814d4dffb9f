"""Exact boundary matrices, ranks and (reduced) homology over GF(2) and Q.

GF(2) vectors are bit-packed into Python ints; rational elimination is
fraction-free (Bareiss) on arbitrary-precision integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complex import ComplexSnapshot, Simplex, faces

GF2 = "gf2"
QQ = "q"
FIELDS = (GF2, QQ)


def _check_field(field: str) -> str:
    if field not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}, got {field!r}")
    return field


@dataclass(frozen=True, eq=False)
class BoundaryMatrix:
    """Signed boundary matrix of one degree.

    ``entries`` is an integer array (rows x cols). Over GF(2) it is reduced
    mod 2. With ``augmented`` and k == 0 the single row is the empty simplex.
    """

    rows: tuple[Simplex, ...]
    cols: tuple[Simplex, ...]
    entries: np.ndarray
    k: int
    field: str
    augmented: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def column_bits(self) -> list[int]:
        return columns_as_bits(self.entries)


def boundary_matrix(
    snap: ComplexSnapshot, k: int, field: str = GF2, augmented: bool = False
) -> BoundaryMatrix:
    """Matrix of the k-th boundary in lexicographic simplex order."""
    _check_field(field)
    cols = snap.simplices(k)
    if k == 0:
        rows: tuple[Simplex, ...] = ((),) if augmented else ()
        mat = np.ones((len(rows), len(cols)), dtype=np.int64)
    else:
        rows = snap.simplices(k - 1)
        pos = snap.positions[k - 1] if k - 1 <= snap.dim else {}
        mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, s in enumerate(cols):
            for i, face in enumerate(faces(s)):
                mat[pos[face], j] = -1 if i % 2 else 1
    if field == GF2:
        mat = mat % 2
    return BoundaryMatrix(rows, tuple(cols), mat, k, field, augmented)


def columns_as_bits(mat: np.ndarray) -> list[int]:
    out = []
    for col in np.asarray(mat).T:
        bits = 0
        for i in np.flatnonzero(col % 2):
            bits |= 1 << int(i)
        out.append(bits)
    return out


def rank_gf2_bits(columns: Sequence[int]) -> int:
    """Rank of bit-packed GF(2) vectors (xor basis keyed by leading bit)."""
    basis: dict[int, int] = {}
    for v in columns:
        while v:
            top = v.bit_length() - 1
            b = basis.get(top)
            if b is None:
                basis[top] = v
                break
            v ^= b
    return len(basis)


def rank_rational(mat) -> int:
    """Exact rank over Q by fraction-free Gaussian elimination."""
    rows = [[int(x) for x in row] for row in np.asarray(mat, dtype=object)]
    if not rows or not rows[0]:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for c in range(ncols):
        pivot = next((r for r in range(rank, nrows) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        pv = p[c]
        for r in range(rank + 1, nrows):
            row = rows[r]
            a = row[c]
            if a == 0:
                if pv != prev:
                    rows[r] = [(pv * x) // prev for x in row]
                continue
            rows[r] = [(pv * x - a * y) // prev for x, y in zip(row, p)]
        prev = pv
        rank += 1
        if rank == nrows:
            break
    return rank


def rank(mat, field: str = GF2) -> int:
    _check_field(field)
    if isinstance(mat, BoundaryMatrix):
        mat = mat.entries
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    if field == GF2:
        return rank_gf2_bits(columns_as_bits(mat))
    return rank_rational(mat)


# --- homology -----------------------------------------------------------------

@dataclass(frozen=True)
class HomologySummary:
    """``reduced_betti[k + 1]`` is dim H~_k for k = -1, 0, ..., dim."""

    reduced_betti: tuple[int, ...]
    field: str

    def __getitem__(self, k: int) -> int:
        if k + 1 < 0 or k + 1 >= len(self.reduced_betti):
            return 0
        return self.reduced_betti[k + 1]

    def unreduced(self, k: int) -> int:
        nonempty = self.reduced_betti[0] == 0
        return self[k] + (1 if k == 0 and nonempty else 0)


def _boundary_ranks(snap: ComplexSnapshot, field: str) -> list[int]:
    """ranks[k] = rank of augmented boundary d_k for k = 0..dim+1."""
    return [
        rank(boundary_matrix(snap, k, field, augmented=True), field)
        for k in range(snap.dim + 2)
    ]


def reduced_betti(snap: ComplexSnapshot, field: str = GF2) -> HomologySummary:
    ranks = _boundary_ranks(snap, field)
    out = [1 - (ranks[0] if ranks else 0)]  # H~_-1
    for k in range(snap.dim + 1):
        nullity = snap.count(k) - ranks[k]
        out.append(nullity - ranks[k + 1])
    return HomologySummary(tuple(out), field)


def betti_numbers(snap: ComplexSnapshot, field: str = GF2) -> list[int]:
    """Unreduced Betti numbers b_0..b_dim."""
    h = reduced_betti(snap, field)
    return [h.unreduced(k) for k in range(snap.dim + 1)]


def _rank_rows_removed(mat: BoundaryMatrix, keep: set, field: str) -> int:
    """Rank of ``mat`` restricted to rows NOT in ``keep``."""
    idx = [i for i, r in enumerate(mat.rows) if r not in keep]
    if not idx:
        return 0
    return rank(mat.entries[idx, :], field)


def induced_image_rank(
    snap_a: ComplexSnapshot,
    snap_b: ComplexSnapshot,
    k: int,
    field: str = GF2,
    reduced: bool = True,
) -> int:
    """dim of the image of H_k(A) -> H_k(B) for A a subcomplex of B.

    Uses im = Z_k(A) / (B_k(B) ∩ C_k(A)), where
    dim(B_k(B) ∩ C_k(A)) = rank d_{k+1}^B - rank of its rows outside A.
    """
    _check_field(field)
    if not snap_a.issubcomplex(snap_b):
        raise ValueError("first complex is not a subcomplex of the second")
    if k < -1:
        return 0
    if k == -1:
        if not reduced:
            return 0
        z = 1
    else:
        da = boundary_matrix(snap_a, k, field, augmented=reduced)
        z = snap_a.count(k) - rank(da, field)
    db = boundary_matrix(snap_b, k + 1, field, augmented=reduced)
    keep = set(snap_a.simplices(k)) if k >= 0 else {()}
    killed = rank(db, field) - _rank_rows_removed(db, keep, field)
    return z - killed


@dataclass(frozen=True)
class TorsionDiagnostic:
    """Reduced Betti numbers over GF(2) and Q, with the degrees that differ.

    A difference in degree k signals 2-torsion in H_{k-1}(;Z) (or in H_k
    via universal coefficients); it is reported, never raised.
    """

    gf2: HomologySummary
    rational: HomologySummary
    differing: tuple[int, ...]

    @property
    def agrees(self) -> bool:
        return not self.differing


def torsion_diagnostic(snap: ComplexSnapshot) -> TorsionDiagnostic:
    a, b = reduced_betti(snap, GF2), reduced_betti(snap, QQ)
    differing = tuple(k for k in range(-1, snap.dim + 1) if a[k] != b[k])
    return TorsionDiagnostic(a, b, differing)
