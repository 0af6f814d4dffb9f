"""Point-cloud ingestion: XYZ and PDB readers plus the synthetic benchmark shapes.

Coordinates are in ångströms throughout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

# points closer than this (but not identical) only warn
NEAR_DUPLICATE_TOL = 1e-9


class ParseError(ValueError):
    """Raised when a structure file cannot be read."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: tuple[str, ...] = ()
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        labels = tuple(self.labels) or tuple(f"p{i}" for i in range(len(pts)))
        object.__setattr__(self, "labels", labels)
        if len(self.labels) != len(pts):
            raise ValueError(
                f"{len(pts)} points but {len(self.labels)} labels"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinate in point cloud")
        _check_duplicates(pts)

    def __len__(self) -> int:
        return len(self.points)

    def distance_matrix(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _check_duplicates(pts: np.ndarray) -> None:
    n = len(pts)
    if n < 2:
        return
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    iu = np.triu_indices(n, 1)
    close = d2[iu]
    exact = np.flatnonzero(close == 0.0)
    if exact.size:
        i, j = iu[0][exact[0]], iu[1][exact[0]]
        raise ValueError(f"points {i} and {j} coincide exactly")
    near = np.flatnonzero(close < NEAR_DUPLICATE_TOL**2)
    if near.size:
        log.warning("%d point pairs closer than %g A", near.size, NEAR_DUPLICATE_TOL)


# --- XYZ -------------------------------------------------------------------

def parse_xyz(text: str, source: Optional[str] = None) -> PointCloud:
    """Read a standard XYZ file (count line, comment line, ``El x y z`` rows)."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty XYZ input")
    try:
        count = int(lines[0].split()[0])
    except (IndexError, ValueError):
        raise ParseError(f"malformed XYZ count line: {lines[0]!r}") from None
    if count < 0:
        raise ParseError(f"negative atom count {count}")
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != count:
        raise ParseError(f"XYZ declares {count} atoms but has {len(rows)} rows")
    labels, coords = [], []
    for lineno, row in enumerate(rows, start=3):
        parts = row.split()
        if len(parts) < 4:
            raise ParseError(f"line {lineno}: expected 'element x y z'")
        try:
            xyz = [float(v) for v in parts[1:4]]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric coordinate") from None
        labels.append(parts[0])
        coords.append(xyz)
    comment = lines[1] if len(lines) > 1 else ""
    return PointCloud(
        np.array(coords, dtype=float).reshape(-1, 3),
        labels,
        {"format": "xyz", "path": source, "comment": comment.strip()},
    )


def serialize_xyz(cloud: PointCloud, comment: str = "") -> str:
    out = [str(len(cloud)), comment]
    for label, (x, y, z) in zip(cloud.labels, cloud.points):
        out.append(f"{label} {float(x)!r} {float(y)!r} {float(z)!r}")
    return "\n".join(out) + "\n"


# --- PDB -------------------------------------------------------------------

def parse_pdb(
    text: str,
    atom_filter: Iterable[str] = ("CA",),
    chain_filter: Optional[Iterable[str]] = None,
    source: Optional[str] = None,
) -> PointCloud:
    """Extract atoms by name from a fixed-column PDB file.

    Only the first MODEL of multi-model (NMR) entries is read. For repeated
    (chain, resSeq, atomName) keys, e.g. from altLoc or insertion codes, the
    first record with altLoc ' ' or 'A' wins.
    """
    names = {a.strip().upper() for a in atom_filter}
    if not names:
        raise ValueError("atom_filter must be nonempty")
    chains = None if chain_filter is None else set(chain_filter)

    seen: set[tuple[str, str, str]] = set()
    labels: list[str] = []
    coords: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        rec = line[:6]
        if rec.startswith("ENDMDL"):
            if coords:
                break
            continue
        if rec not in ("ATOM  ", "HETATM"):
            continue
        atom = line[12:16].strip().upper()
        if atom not in names:
            continue
        alt = line[16:17] if len(line) > 16 else " "
        if alt not in (" ", "A"):
            continue
        chain = line[21:22] if len(line) > 21 else " "
        if chains is not None and chain not in chains:
            continue
        res_seq = line[22:26].strip()
        key = (chain, res_seq, atom)
        if key in seen:
            continue
        try:
            xyz = [float(line[30:38]), float(line[38:46]), float(line[46:54])]
        except ValueError:
            raise ParseError(f"line {lineno}: unparseable coordinate columns") from None
        seen.add(key)
        labels.append(f"{chain.strip()}:{res_seq}:{atom}")
        coords.append(xyz)
    if not coords:
        raise ParseError(f"no atoms matching {sorted(names)}")
    return PointCloud(
        np.array(coords),
        labels,
        {
            "format": "pdb",
            "path": source,
            "atoms": sorted(names),
            "chains": None if chains is None else sorted(chains),
        },
    )


# --- generators --------------------------------------------------------------

def generate_octagon(circumradius: float = 2.0) -> PointCloud:
    if not circumradius > 0:
        raise ValueError("circumradius must be positive")
    k = np.arange(8)
    ang = 2 * np.pi * k / 8
    pts = np.column_stack(
        [circumradius * np.cos(ang), circumradius * np.sin(ang), np.zeros(8)]
    )
    return PointCloud(
        pts,
        [f"v{i}" for i in k],
        {"generator": "octagon", "circumradius": circumradius},
    )


def generate_octahedron() -> PointCloud:
    pts = [
        (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0), (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.5), (0.0, 0.0, -1.5),
    ]
    return PointCloud(pts, [f"v{i}" for i in range(6)], {"generator": "octahedron"})


GENERATORS = {
    "octagon": generate_octagon,
    "octahedron": generate_octahedron,
}


# --- vendored fixtures -------------------------------------------------------

FIXTURES = {
    # name -> (file, format, atom filter)
    "c20": ("c20.xyz", "xyz", None),
    "1l2y": ("1L2Y.pdb", "pdb", ("CA",)),
    "2lyz": ("2LYZ.pdb", "pdb", ("CA",)),
    "1wet": ("1WET.pdb", "pdb", ("P",)),
    "1tw8": ("1TW8.pdb", "pdb", ("P",)),
    "1urn": ("1URN.pdb", "pdb", ("P",)),
}


def fixture_path(filename: str):
    return resources.files("ripscope") / "data" / filename


def load_fixture(name: str) -> PointCloud:
    """Load a vendored structure by short name (``c20``, ``1l2y``, ...)."""
    try:
        filename, fmt, atoms = FIXTURES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None
    path = fixture_path(filename)
    if not path.is_file():
        raise FileNotFoundError(
            f"fixture file {filename} is not vendored in ripscope/data"
        )
    text = path.read_text()
    if fmt == "xyz":
        return parse_xyz(text, source=filename)
    return parse_pdb(text, atoms, source=filename)


def read_structure(
    path: str,
    fmt: Optional[str] = None,
    atom_filter: Sequence[str] = ("CA",),
    chain_filter: Optional[Sequence[str]] = None,
) -> PointCloud:
    if fmt is None:
        fmt = "xyz" if str(path).lower().endswith(".xyz") else "pdb"
    with open(path) as fh:
        text = fh.read()
    if fmt == "xyz":
        return parse_xyz(text, source=str(path))
    if fmt == "pdb":
        return parse_pdb(text, atom_filter, chain_filter, source=str(path))
    raise ValueError(f"unknown structure format {fmt!r}")


def pairwise_distances(cloud: PointCloud) -> np.ndarray:
    return cloud.distance_matrix()


def octagon_critical_radii(circumradius: float = 2.0) -> tuple[float, ...]:
    return tuple(2 * circumradius * math.sin(m * math.pi / 8) for m in (1, 2, 3, 4))
