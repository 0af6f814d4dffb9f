"""Persistent homology over GF(2) by column reduction with clearing."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .complex import Filtration, faces, round_scale

INF = math.inf


@dataclass(frozen=True, order=True)
class Bar:
    dim: int
    birth: float
    death: float = INF

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    def alive(self, scale: float) -> bool:
        return self.birth <= scale < self.death


@dataclass(frozen=True)
class Barcode:
    bars: tuple[Bar, ...]
    max_dim: int  # highest homology dimension reported

    def dim(self, k: int, include_zero: bool = False) -> list[Bar]:
        return [
            b for b in self.bars
            if b.dim == k and (include_zero or b.death > b.birth)
        ]

    def positive(self) -> "Barcode":
        return Barcode(tuple(b for b in self.bars if b.death > b.birth), self.max_dim)

    def to_csv(self, include_zero: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dim", "birth", "death"])
        for b in self.bars:
            if include_zero or b.death > b.birth:
                w.writerow([b.dim, _fmt(b.birth), _fmt(b.death)])
        return buf.getvalue()

    def to_json(self, include_zero: bool = False) -> str:
        rows = [
            {"dim": b.dim, "birth": _fmt(b.birth), "death": _fmt(b.death)}
            for b in self.bars
            if include_zero or b.death > b.birth
        ]
        return json.dumps({"max_dim": self.max_dim, "bars": rows}, indent=1)

    @classmethod
    def from_csv(cls, text: str, max_dim: int | None = None) -> "Barcode":
        rows = list(csv.DictReader(io.StringIO(text)))
        bars = tuple(
            Bar(int(r["dim"]), float(r["birth"]), float(r["death"])) for r in rows
        )
        if max_dim is None:
            max_dim = max((b.dim for b in bars), default=0)
        return cls(bars, max_dim)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(x)


def reported_dims(max_dim: int) -> range:
    """Homology dimensions that are exact for a Rips complex cut at ``max_dim``."""
    return range(max(max_dim, 1))


def compute_barcodes(filtration: Filtration) -> Barcode:
    """Standard persistence pairing; zero-length bars are retained."""
    simplices = filtration.simplices
    scales = filtration.scales
    index = filtration.index
    top = filtration.max_dim
    dims_out = reported_dims(top)

    by_dim: dict[int, list[int]] = {}
    for i, s in enumerate(simplices):
        by_dim.setdefault(len(s) - 1, []).append(i)

    paired_low: dict[int, int] = {}   # creator index -> destroyer index
    cleared: set[int] = set()

    # clearing: reduce from the top dimension down; pivots of dimension d
    # columns are (d-1)-simplices whose own columns are then known to be zero
    for d in range(top, 0, -1):
        pivot_owner: dict[int, int] = {}
        reduced: dict[int, int] = {}
        for j in by_dim.get(d, ()):
            if j in cleared:
                continue
            col = 0
            for face in faces(simplices[j]):
                col ^= 1 << index[face]
            while col:
                low = col.bit_length() - 1
                other = pivot_owner.get(low)
                if other is None:
                    pivot_owner[low] = j
                    reduced[j] = col
                    paired_low[low] = j
                    cleared.add(low)
                    break
                col ^= reduced[other]

    destroyers = set(paired_low.values())
    bars = []
    for i, s in enumerate(simplices):
        d = len(s) - 1
        if d not in dims_out:
            continue
        if i in paired_low:
            bars.append(Bar(d, scales[i], scales[paired_low[i]]))
        elif i not in cleared and i not in destroyers:
            bars.append(Bar(d, scales[i], INF))
    bars.sort(key=lambda b: (b.dim, b.birth, b.death))
    return Barcode(tuple(bars), max(dims_out))


def persistent_betti(barcode: Barcode, k: int, eps1: float, eps2: float) -> int:
    """Number of dim-k classes born by ``eps1`` and still alive at ``eps2``."""
    if eps1 > eps2:
        raise ValueError("eps1 must not exceed eps2")
    eps1, eps2 = round_scale(eps1), round_scale(eps2)
    return sum(1 for b in barcode.bars if b.dim == k and b.birth <= eps1 and b.death > eps2)


def betti_curve(barcode: Barcode, k: int, grid: Sequence[float]) -> list[int]:
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending")
    return [persistent_betti(barcode, k, e, e) for e in grid]


def curves_to_csv(grid: Sequence[float], curves: dict[int, Sequence[int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scale", "k", "betti"])
    for k in sorted(curves):
        for e, v in zip(grid, curves[k]):
            w.writerow([repr(e), k, v])
    return buf.getvalue()
