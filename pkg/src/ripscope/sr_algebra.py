"""Persistent Stanley-Reisner invariants.

Graded Betti numbers come from Hochster's formula: each beta_{i,i+j} is a
sum over vertex subsets W of size i+j of dim H~_{j-1} of the induced
subcomplex on W. Subsets are bitmasks over the ambient vertex set.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import exact_linalg as xl
from .complex import (
    ComplexSnapshot,
    Filtration,
    FVector,
    Simplex,
    binom,
    f_vector,
    faces,
    facets,
    h_vector,
    induced_subcomplex,
    round_scale,
    snapshot,
)
from .exact_linalg import GF2, QQ, rank_gf2_bits

DEFAULT_VERTEX_GUARD = 22
INF = math.inf


class GuardExceeded(RuntimeError):
    """Subset enumeration refused because the vertex count is too large."""


def _check_guard(n: int, guard: int) -> None:
    if n > guard:
        raise GuardExceeded(
            f"Hochster enumeration over {n} vertices (2^{n} induced subcomplexes) "
            f"exceeds the vertex guard of {guard}; full graded Betti tables are "
            "impractical to compute at this size. Raise the guard explicitly to override."
        )


def _mask(simplex: Iterable[int]) -> int:
    m = 0
    for v in simplex:
        m |= 1 << v
    return m


# --- Stanley-Reisner ideal ----------------------------------------------------

@dataclass(frozen=True)
class MonomialIdealGenerators:
    minimal_nonfaces: tuple[Simplex, ...]
    ambient_n: int
    scale: Optional[float] = None

    def contains_monomial(self, support: Iterable[int]) -> bool:
        """Is the squarefree monomial with this support in the ideal?"""
        s = set(support)
        return any(s.issuperset(g) for g in self.minimal_nonfaces)


def minimal_nonfaces(snap: ComplexSnapshot, max_size: int) -> MonomialIdealGenerators:
    """Inclusion-minimal nonfaces with at most ``max_size`` vertices."""
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    present = set(snap.vertices)
    out: list[Simplex] = [(v,) for v in range(snap.n) if v not in present]
    for r in range(2, max_size + 1):
        level = snap.simplices(r - 2)
        if not level:
            break
        for sigma in level:
            for v in range(sigma[-1] + 1, snap.n):
                cand = sigma + (v,)
                if cand in snap:
                    continue
                if all(face in snap for face in faces(cand)):
                    out.append(cand)
    out.sort(key=lambda s: (len(s), s))
    return MonomialIdealGenerators(tuple(out), snap.n, snap.scale)


# --- facet persistence -------------------------------------------------------

@dataclass(frozen=True, order=True)
class FacetBar:
    dim: int
    birth: float
    death: float
    simplex: Simplex = field(compare=True)


def facet_barcodes(
    filtration: Filtration, grid: Optional[Sequence[float]] = None
) -> list[FacetBar]:
    """Maximality interval of every simplex that is ever a facet.

    A simplex stops being maximal when its first coface would enter the
    untruncated Rips complex; that scale is read off the edge scales, so
    simplices of dimension max_dim still die. Cofaces beyond max_radius
    never enter. With ``grid`` only bars containing a grid scale are kept.
    """
    edges = filtration.edge_scales
    n = filtration.vertex_count
    bars = []
    for s, birth in filtration:
        idx = list(s)
        reach = edges[idx, :].max(axis=0)
        reach[idx] = INF
        death = max(birth, float(reach.min())) if n > len(s) else INF
        if death > birth:
            bars.append(FacetBar(len(s) - 1, birth, death, s))
    if grid is not None:
        bars = [b for b in bars if any(b.birth <= e < b.death for e in grid)]
    bars.sort()
    return bars


def facet_persistence_betti(
    bars: Sequence[FacetBar], i: int, eps1: float, eps2: float
) -> int:
    if eps1 > eps2:
        raise ValueError("eps1 must not exceed eps2")
    eps1, eps2 = round_scale(eps1), round_scale(eps2)
    return sum(1 for b in bars if b.dim == i and b.birth <= eps1 and b.death > eps2)


def facet_counts(snap: ComplexSnapshot) -> list[int]:
    """Maximal simplices of the snapshot itself, by dimension."""
    counts = [0] * (snap.dim + 1)
    for s in facets(snap):
        counts[len(s) - 1] += 1
    return counts


def facet_counts_from_bars(bars: Sequence[FacetBar], max_dim: int, scale: float) -> list[int]:
    """Facet counts at ``scale`` under the untruncated maximality rule.

    Differs from ``facet_counts`` only in dimension max_dim, where the
    truncated snapshot cannot see the cofaces that cover a simplex.
    """
    return [facet_persistence_betti(bars, i, scale, scale) for i in range(max_dim + 1)]


# --- Hochster machinery --------------------------------------------------------

class _BitComplex:
    """Per-dimension vertex masks and GF(2) boundary bits of one complex.

    Boundary bits index the (k-1)-simplices of ``frame`` (a complex
    containing this one), so two nested complexes can share coordinates.
    """

    def __init__(self, snap: ComplexSnapshot, frame: Optional[ComplexSnapshot] = None):
        frame = frame or snap
        self.snap = snap
        self.dim = snap.dim
        self.vmask: list[np.ndarray] = []
        self.bits: list[list[int]] = []
        for k in range(snap.dim + 1):
            level = snap.simplices(k)
            self.vmask.append(np.array([_mask(s) for s in level], dtype=np.int64))
            if k == 0:
                self.bits.append([1] * len(level))  # augmentation
            else:
                pos = frame.positions[k - 1]
                cols = []
                for s in level:
                    b = 0
                    for face in faces(s):
                        b |= 1 << pos[face]
                    cols.append(b)
                self.bits.append(cols)
        # (k-simplices of this complex) as a bitmask over frame indexing
        self.row_mask = []
        for k in range(snap.dim + 1):
            pos = frame.positions[k]
            m = 0
            for s in snap.simplices(k):
                m |= 1 << pos[s]
            self.row_mask.append(m)

    def select(self, k: int, w: int) -> list[int]:
        """Boundary columns of the k-simplices inside vertex set ``w``."""
        if k < 0 or k > self.dim:
            return []
        inside = np.flatnonzero((self.vmask[k] & ~w) == 0)
        cols = self.bits[k]
        return [cols[i] for i in inside]

    def reduced_betti(self, w: int, degrees: Iterable[int]) -> dict[int, int]:
        """dim H~_q of the induced subcomplex on ``w`` over GF(2)."""
        ranks: dict[int, int] = {}
        sizes: dict[int, int] = {}

        def rk(k):
            if k not in ranks:
                cols = self.select(k, w)
                sizes[k] = len(cols)
                ranks[k] = rank_gf2_bits(cols) if cols else 0
            return ranks[k]

        out = {}
        for q in degrees:
            if q == -1:
                out[q] = 1 - rk(0)
            else:
                rk(q)
                out[q] = sizes[q] - ranks[q] - rk(q + 1)
        return out


def _reduced_betti_generic(snap: ComplexSnapshot, w: int, degrees, field: str) -> dict[int, int]:
    verts = [v for v in range(snap.n) if w >> v & 1]
    h = xl.reduced_betti(induced_subcomplex(snap, verts), field)
    return {q: h[q] for q in degrees}


def _subsets_of_size(n: int, size: int) -> Iterator[int]:
    for combo in itertools.combinations(range(n), size):
        yield _mask(combo)


def component_counts(snap: ComplexSnapshot) -> np.ndarray:
    """Number of connected components of the induced subgraph for every subset."""
    from ._kernels import all_subset_components

    adj = np.zeros(snap.n, dtype=np.int64)
    for u, v in snap.simplices(1):
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    present = 0
    for (v,) in snap.simplices(0):
        present |= 1 << v
    return all_subset_components(adj, np.int64(present), snap.n)


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        pc += (np.arange(1 << n, dtype=np.int64) >> b) & 1
    return pc


# --- graded Betti tables -------------------------------------------------------

@dataclass(frozen=True)
class GradedBettiTable:
    """entries[(i, j)] = beta_{i,j} with j the internal degree."""

    entries: dict
    strands: tuple[int, ...]
    n: int
    field: str = GF2
    scale: Optional[float] = None
    max_degree: Optional[int] = None  # largest internal degree enumerated

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    def strand(self, j: int) -> dict[int, int]:
        """{i: beta_{i,i+j}}."""
        return {i: v for (i, jj), v in self.entries.items() if jj - i == j}

    def nonzero(self) -> dict:
        return {k: v for k, v in self.entries.items() if v}


@dataclass(frozen=True)
class PersistentGradedBettiTable(GradedBettiTable):
    scales: tuple[Optional[float], Optional[float]] = (None, None)


def _normalize_strands(strands) -> tuple[int, ...]:
    out = tuple(sorted(set(strands)))
    if any(j < 0 for j in out):
        raise ValueError("strands must be >= 0")
    return out


def graded_betti(
    snap: ComplexSnapshot,
    strands: Iterable[int] = (1, 2, 3),
    field: str = GF2,
    guard: int = DEFAULT_VERTEX_GUARD,
    max_degree: Optional[int] = None,
) -> GradedBettiTable:
    """Hochster-formula graded Betti numbers beta_{i,i+j} for the given strands.

    beta_{0,0} = 1 always; strand 0 (j = 0) is the Koszul part coming from
    ambient vertices missing from the complex.
    """
    strands = _normalize_strands(strands)
    n = snap.n
    _check_guard(n, guard)
    top = n if max_degree is None else min(n, max_degree)
    entries: dict[tuple[int, int], int] = {(0, 0): 1}
    positive = [j for j in strands if j >= 1]
    if field == GF2 and positive == [1] and 0 not in strands:
        _strand_one_fast(snap, top, entries)
        return GradedBettiTable(entries, strands, n, field, snap.scale, top)

    bc = _BitComplex(snap) if field == GF2 else None
    for size in range(1, top + 1):
        wanted = [j for j in strands if j <= size]
        if not wanted:
            continue
        degrees = [j - 1 for j in wanted]
        acc = dict.fromkeys(wanted, 0)
        for w in _subsets_of_size(n, size):
            if bc is not None:
                h = bc.reduced_betti(w, degrees)
            else:
                h = _reduced_betti_generic(snap, w, degrees, field)
            for j in wanted:
                acc[j] += h[j - 1]
        for j, v in acc.items():
            entries[(size - j, size)] = v
    return GradedBettiTable(entries, strands, n, field, snap.scale, top)


def _strand_one_fast(snap: ComplexSnapshot, top: int, entries: dict) -> None:
    comps = component_counts(snap)
    sizes = _popcounts(snap.n)
    reduced0 = np.where(comps > 0, comps - 1, 0)
    totals = np.bincount(sizes, weights=reduced0, minlength=snap.n + 1)
    for size in range(1, top + 1):
        entries[(size - 1, size)] = int(round(totals[size]))


def graded_summand(
    snap: ComplexSnapshot, w: Iterable[int], j: int, field: str = GF2
) -> int:
    """One Hochster summand dim H~_{j-1}(induced subcomplex on w)."""
    m = _mask(w)
    if field == GF2:
        return _BitComplex(snap).reduced_betti(m, [j - 1])[j - 1]
    return _reduced_betti_generic(snap, m, [j - 1], field)[j - 1]


# --- persistent graded Betti numbers --------------------------------------------

class _PairComplex:
    """Nested pair A ⊆ B sharing B's simplex indexing."""

    def __init__(self, a: ComplexSnapshot, b: ComplexSnapshot):
        if not a.issubcomplex(b):
            raise ValueError("earlier complex is not contained in the later one")
        self.a = _BitComplex(a, frame=b)
        self.b = _BitComplex(b)

    def image_rank(self, w: int, q: int) -> int:
        """dim im(H~_q(A_W) -> H~_q(B_W)) over GF(2)."""
        if q == -1:
            return 1 if not self.b.select(0, w) else 0
        cols_a = self.a.select(q, w)
        z = len(cols_a) - (rank_gf2_bits(cols_a) if cols_a else 0)
        if z == 0:
            return 0
        cols_b = self.b.select(q + 1, w)
        if not cols_b:
            return z
        keep = self.a.row_mask[q] if q <= self.a.dim else 0
        outside = [c & ~keep for c in cols_b]
        killed = rank_gf2_bits(cols_b) - rank_gf2_bits(outside)
        return z - killed


def persistent_graded_betti_from(
    snap_a: ComplexSnapshot,
    snap_b: ComplexSnapshot,
    strands: Iterable[int] = (1, 2, 3),
    field: str = GF2,
    guard: int = DEFAULT_VERTEX_GUARD,
    max_degree: Optional[int] = None,
) -> PersistentGradedBettiTable:
    strands = _normalize_strands(strands)
    n = snap_b.n
    _check_guard(n, guard)
    top = n if max_degree is None else min(n, max_degree)
    pair = _PairComplex(snap_a, snap_b) if field == GF2 else None
    entries: dict[tuple[int, int], int] = {(0, 0): 1}
    for size in range(1, top + 1):
        wanted = [j for j in strands if j <= size]
        acc = dict.fromkeys(wanted, 0)
        for w in _subsets_of_size(n, size):
            for j in wanted:
                acc[j] += _image_rank(pair, snap_a, snap_b, w, j - 1, field)
        for j, v in acc.items():
            entries[(size - j, size)] = v
    return PersistentGradedBettiTable(
        entries, strands, n, field, snap_a.scale, top, (snap_a.scale, snap_b.scale)
    )


def _image_rank(pair, snap_a, snap_b, w: int, q: int, field: str) -> int:
    if pair is not None:
        return pair.image_rank(w, q)
    verts = [v for v in range(snap_b.n) if w >> v & 1]
    return xl.induced_image_rank(
        induced_subcomplex(snap_a, verts), induced_subcomplex(snap_b, verts), q, field
    )


def persistent_graded_betti(
    filtration: Filtration,
    eps1: float,
    eps2: float,
    strands: Iterable[int] = (1, 2, 3),
    field: str = GF2,
    guard: int = DEFAULT_VERTEX_GUARD,
    max_degree: Optional[int] = None,
) -> PersistentGradedBettiTable:
    if eps1 > eps2:
        raise ValueError("eps1 must not exceed eps2")
    return persistent_graded_betti_from(
        snapshot(filtration, eps1), snapshot(filtration, eps2),
        strands, field, guard, max_degree,
    )


def persistent_summand(
    snap_a: ComplexSnapshot,
    snap_b: ComplexSnapshot,
    w: Iterable[int],
    j: int,
    field: str = GF2,
) -> int:
    """One summand dim im(H~_{j-1}(A_W) -> H~_{j-1}(B_W))."""
    m = _mask(w)
    pair = _PairComplex(snap_a, snap_b) if field == GF2 else None
    return _image_rank(pair, snap_a, snap_b, m, j - 1, field)


# --- persistent f- and h-vectors --------------------------------------------------

@dataclass(frozen=True)
class PersistentFHVectors:
    h: tuple[int, ...]
    f: tuple[int, ...]  # (f_-1, ..., f_{d-1})
    n: int
    d: int
    scales: tuple[Optional[float], Optional[float]] = (None, None)
    # m indices whose binomial had a negative upper index with positive lower index
    flagged: tuple[int, ...] = ()


class IncompleteTable(ValueError):
    pass


def persistent_fh_vectors(
    table: GradedBettiTable, n: int, d: int
) -> PersistentFHVectors:
    """h_m = sum_j C(n-d+m-j-1, m-j) sum_i (-1)^i beta_{i,j}; f by the inverse transform."""
    missing = sorted(set(range(d + 1)) - set(table.strands))
    if missing:
        raise IncompleteTable(f"table lacks strands {missing} needed for d={d}")
    if table.max_degree is not None and table.max_degree < d:
        raise IncompleteTable(f"table enumerated degrees only up to {table.max_degree} < d={d}")

    alt = [sum((-1) ** i * table[(i, j)] for i in range(j + 1)) for j in range(d + 1)]
    h, flagged = [], []
    for m in range(d + 1):
        total = 0
        for j in range(m + 1):
            a, b = n - d + m - j - 1, m - j
            if a < 0 and b > 0:
                flagged.append(m)
            total += binom(a, b) * alt[j]
        h.append(total)
    f = tuple(
        sum(binom(d - i, m - i) * h[i] for i in range(m + 1)) for m in range(d + 1)
    )
    scales = getattr(table, "scales", (table.scale, table.scale))
    return PersistentFHVectors(tuple(h), f, n, d, scales, tuple(sorted(set(flagged))))


def hilbert_table(
    snap_a: ComplexSnapshot,
    snap_b: Optional[ComplexSnapshot] = None,
    field: str = GF2,
    guard: int = DEFAULT_VERTEX_GUARD,
) -> tuple[GradedBettiTable, int]:
    """Table with every strand needed for the f/h transform, and its d."""
    snap_b = snap_b if snap_b is not None else snap_a
    d = snap_b.dim + 1
    strands = range(0, d + 1)
    table = persistent_graded_betti_from(snap_a, snap_b, strands, field, guard, max_degree=d)
    return table, d


def persistent_fh_from(
    filtration: Filtration, eps1: float, eps2: float,
    field: str = GF2, guard: int = DEFAULT_VERTEX_GUARD,
) -> PersistentFHVectors:
    a, b = snapshot(filtration, eps1), snapshot(filtration, eps2)
    table, d = hilbert_table(a, b, field, guard)
    return persistent_fh_vectors(table, filtration.vertex_count, d)


# --- per-scale curves -----------------------------------------------------------

@dataclass
class ScaleRecord:
    scale: float
    f: tuple[int, ...]
    h: tuple[int, ...]
    facet_counts: list[int]
    graded: Optional[dict] = None  # {(i, j): value}


def curves(
    filtration: Filtration,
    grid: Sequence[float],
    which: Iterable[str] = ("fh", "facets"),
    strands: Iterable[int] = (1, 2, 3),
    field: str = GF2,
    guard: int = DEFAULT_VERTEX_GUARD,
) -> list[ScaleRecord]:
    """Per-scale f/h-vectors, facet counts and optionally graded Betti tables.

    Snapshots repeat across grid points between critical scales; each
    distinct snapshot is evaluated once.
    """
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending")
    which = set(which)
    strands = tuple(strands)
    if "graded" in which:
        _check_guard(filtration.vertex_count, guard)
    bars = facet_barcodes(filtration)
    cache: dict[int, ScaleRecord] = {}
    out = []
    for eps in grid:
        p = filtration.prefix_length(eps)
        if p not in cache:
            snap = snapshot(filtration, eps)
            fv = f_vector(snap)
            rec = ScaleRecord(
                eps, fv.counts, h_vector(fv, snap.n).values,
                facet_counts_from_bars(bars, filtration.max_dim, eps),
            )
            if "graded" in which:
                rec.graded = graded_betti(snap, strands, field, guard).entries
            cache[p] = rec
        r = cache[p]
        out.append(ScaleRecord(eps, r.f, r.h, r.facet_counts, r.graded))
    return out


def strand_curves(records: Sequence[ScaleRecord], j: int) -> dict[int, list[int]]:
    """{i: [beta_{i,i+j} per grid scale]} for i with any nonzero value."""
    keys = sorted({i for r in records if r.graded for (i, jj) in r.graded if jj - i == j})
    out = {}
    for i in keys:
        series = [(r.graded or {}).get((i, i + j), 0) for r in records]
        if any(series):
            out[i] = series
    return out


def log10_scaled(values: Sequence[int]) -> list[float]:
    return [math.log10(1 + v) for v in values]


def records_to_csv(records: Sequence[ScaleRecord], what: str) -> str:
    """``what`` is 'f', 'h', 'facets' or 'graded' (scale,i,j,value,log10)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if what == "graded":
        w.writerow(["scale", "i", "j", "value", "log10_1p"])
        for r in records:
            for (i, j), v in sorted((r.graded or {}).items()):
                w.writerow([repr(r.scale), i, j, v, repr(math.log10(1 + v))])
        return buf.getvalue()
    width = max(
        len(getattr(r, "facet_counts" if what == "facets" else what)) for r in records
    ) if records else 0
    if what == "f":
        w.writerow(["scale"] + [f"f{m - 1}" for m in range(width)])
    elif what == "h":
        w.writerow(["scale"] + [f"h{m}" for m in range(width)])
    else:
        w.writerow(["scale"] + [f"dim{m}" for m in range(width)])
    for r in records:
        row = getattr(r, "facet_counts" if what == "facets" else what)
        w.writerow([repr(r.scale)] + list(row) + [""] * (width - len(row)))
    return buf.getvalue()


def facet_bars_to_csv(bars: Sequence[FacetBar]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "birth", "death", "simplex"])
    for b in bars:
        death = "inf" if math.isinf(b.death) else repr(b.death)
        w.writerow([b.dim, repr(b.birth), death, " ".join(map(str, b.simplex))])
    return buf.getvalue()
