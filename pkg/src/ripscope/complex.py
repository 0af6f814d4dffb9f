"""Vietoris-Rips filtration and per-scale simplicial queries."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .ingest import PointCloud

Simplex = tuple[int, ...]

DEFAULT_SIMPLEX_BUDGET = 50_000_000
SCALE_DIGITS = 12


class SimplexBudgetExceeded(RuntimeError):
    """The Rips expansion would produce more simplices than allowed."""


def round_scale(x: float) -> float:
    return float(f"{x:.{SCALE_DIGITS}g}")


def faces(simplex: Simplex) -> Iterator[Simplex]:
    """Codimension-one faces, in the order of the omitted vertex."""
    for i in range(len(simplex)):
        yield simplex[:i] + simplex[i + 1:]


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices sorted by (scale, dimension, vertices)."""

    simplices: tuple[Simplex, ...]
    scales: tuple[float, ...]
    max_dim: int
    vertex_count: int
    max_radius: float = math.inf

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return zip(self.simplices, self.scales)

    @cached_property
    def index(self) -> dict[Simplex, int]:
        return {s: i for i, s in enumerate(self.simplices)}

    @cached_property
    def edge_scales(self) -> np.ndarray:
        """Symmetric matrix of edge entry scales, +inf where no edge exists."""
        n = self.vertex_count
        out = np.full((n, n), math.inf)
        np.fill_diagonal(out, 0.0)
        for s, f in zip(self.simplices, self.scales):
            if len(s) == 2:
                out[s[0], s[1]] = out[s[1], s[0]] = f
        return out

    def scale_of(self, simplex: Simplex) -> float:
        return self.scales[self.index[simplex]]

    def prefix_length(self, scale: float) -> int:
        # queries are rounded like stored scales so exact critical values hit
        return bisect.bisect_right(self.scales, round_scale(scale))

    def critical_scales(self) -> list[float]:
        return sorted(set(self.scales))

    def simplex_counts(self) -> list[int]:
        counts = [0] * (self.max_dim + 1)
        for s in self.simplices:
            counts[len(s) - 1] += 1
        return counts

    def to_text(self) -> str:
        head = [
            f"# max_dim {self.max_dim}",
            f"# vertex_count {self.vertex_count}",
            f"# max_radius {self.max_radius!r}",
        ]
        body = [
            " ".join([repr(f), *map(str, s)])
            for s, f in zip(self.simplices, self.scales)
        ]
        return "\n".join(head + body) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Filtration":
        meta: dict[str, str] = {}
        simplices, scales = [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                meta[key] = value.strip()
                continue
            parts = line.split()
            scales.append(float(parts[0]))
            simplices.append(tuple(int(v) for v in parts[1:]))
        return cls(
            tuple(simplices),
            tuple(scales),
            int(meta["max_dim"]),
            int(meta["vertex_count"]),
            float(meta.get("max_radius", "inf")),
        )


def _sort_key(item):
    simplex, scale = item
    return (scale, len(simplex), simplex)


def build_rips_filtration(
    cloud: PointCloud | np.ndarray,
    max_dim: int,
    max_radius: float,
    budget: int = DEFAULT_SIMPLEX_BUDGET,
) -> Filtration:
    """Vietoris-Rips filtration up to ``max_dim`` and ``max_radius``.

    ``cloud`` may also be a precomputed symmetric distance matrix.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    if not max_radius > 0:
        raise ValueError("max_radius must be positive")
    if isinstance(cloud, PointCloud):
        dist = cloud.distance_matrix()
    else:
        dist = np.asarray(cloud, dtype=float)
    n = len(dist)
    rounded = np.vectorize(round_scale, otypes=[float])(dist) if n else dist
    limit = round_scale(max_radius)

    # forward neighbourhoods: only higher-indexed neighbours
    upper = [
        [int(u) for u in np.flatnonzero(rounded[v] <= limit) if u > v]
        for v in range(n)
    ]
    upper_sets = [set(nb) for nb in upper]

    items: list[tuple[Simplex, float]] = []

    def expand(simplex: Simplex, scale: float, cand: list[int]):
        items.append((simplex, scale))
        if len(items) > budget:
            raise SimplexBudgetExceeded(
                f"Rips expansion exceeds {budget} simplices; "
                "lower max_dim or max_radius"
            )
        if len(simplex) > max_dim:
            return
        for u in cand:
            new_scale = max(scale, max(rounded[w, u] for w in simplex))
            expand(simplex + (u,), new_scale, [w for w in cand if w > u and w in upper_sets[u]])

    for v in range(n):
        expand((v,), 0.0, upper[v])

    items.sort(key=_sort_key)
    return Filtration(
        tuple(s for s, _ in items),
        tuple(float(f) for _, f in items),
        max_dim,
        n,
        float(max_radius),
    )


@dataclass(frozen=True, eq=False)
class ComplexSnapshot:
    """A finite simplicial complex on ambient vertices ``0..n-1``.

    ``by_dim[k]`` holds the k-simplices in lexicographic order.
    """

    by_dim: tuple[tuple[Simplex, ...], ...]
    n: int
    scale: Optional[float] = None

    @classmethod
    def from_simplices(cls, simplices: Iterable[Simplex], n: int, scale=None):
        buckets: dict[int, list[Simplex]] = {}
        for s in simplices:
            buckets.setdefault(len(s) - 1, []).append(tuple(s))
        top = max(buckets, default=-1)
        by_dim = tuple(tuple(sorted(buckets.get(k, ()))) for k in range(top + 1))
        return cls(by_dim, n, scale)

    @cached_property
    def members(self) -> frozenset[Simplex]:
        return frozenset(itertools.chain.from_iterable(self.by_dim))

    @cached_property
    def positions(self) -> tuple[dict[Simplex, int], ...]:
        return tuple({s: i for i, s in enumerate(level)} for level in self.by_dim)

    def __contains__(self, simplex) -> bool:
        return tuple(simplex) in self.members or len(simplex) == 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return itertools.chain.from_iterable(self.by_dim)

    @property
    def dim(self) -> int:
        return len(self.by_dim) - 1

    def simplices(self, k: int) -> tuple[Simplex, ...]:
        if 0 <= k < len(self.by_dim):
            return self.by_dim[k]
        return ()

    def count(self, k: int) -> int:
        if k == -1:
            return 1
        return len(self.simplices(k))

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices(0))

    def issubcomplex(self, other: "ComplexSnapshot") -> bool:
        return self.members <= other.members


def snapshot(filtration: Filtration, scale: float) -> ComplexSnapshot:
    """All simplices with entry scale <= ``scale``."""
    m = filtration.prefix_length(scale)
    return ComplexSnapshot.from_simplices(
        filtration.simplices[:m], filtration.vertex_count, scale
    )


def facets(snap: ComplexSnapshot) -> set[Simplex]:
    covered: set[Simplex] = set()
    for k in range(1, snap.dim + 1):
        for s in snap.by_dim[k]:
            covered.update(faces(s))
    return {s for s in snap if s not in covered}


def induced_subcomplex(snap: ComplexSnapshot, vertices: Iterable[int]) -> ComplexSnapshot:
    w = set(vertices)
    by_dim = []
    for level in snap.by_dim:
        kept = tuple(s for s in level if w.issuperset(s))
        if not kept:
            break
        by_dim.append(kept)
    return ComplexSnapshot(tuple(by_dim), snap.n, snap.scale)


# --- f- and h-vectors ----------------------------------------------------------

def binom(a: int, b: int) -> int:
    """Binomial coefficient with C(a, 0) = 1 for every a and 0 outside range."""
    if b == 0:
        return 1
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class FVector:
    counts: tuple[int, ...]  # (f_-1, f_0, ..., f_{d-1})

    @property
    def d(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, i: int) -> int:
        """f_i with i >= -1."""
        return self.counts[i + 1]


@dataclass(frozen=True)
class HVector:
    values: tuple[int, ...]  # (h_0, ..., h_d)
    n: Optional[int] = None

    @property
    def d(self) -> int:
        return len(self.values) - 1


def f_vector(snap: ComplexSnapshot) -> FVector:
    return FVector((1,) + tuple(len(level) for level in snap.by_dim))


def h_vector(f: FVector, n: Optional[int] = None) -> HVector:
    d = f.d
    h = tuple(
        sum(binom(d - j, m - j) * (-1) ** (m - j) * f.counts[j] for j in range(m + 1))
        for m in range(d + 1)
    )
    return HVector(h, n)


def f_from_h(h: HVector) -> FVector:
    d = h.d
    return FVector(tuple(
        sum(binom(d - i, m - i) * h.values[i] for i in range(m + 1))
        for m in range(d + 1)
    ))


def euler_characteristic(f: FVector) -> int:
    """Unreduced Euler characteristic sum_k (-1)^k f_k."""
    return sum((-1) ** k * c for k, c in enumerate(f.counts[1:]))


def scale_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded so grid points compare cleanly."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round_scale(start + i * step) for i in range(count)]
