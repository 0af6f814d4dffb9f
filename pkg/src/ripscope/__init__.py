"""Multiscale topology of point clouds.

Builds a Vietoris-Rips filtration and reads off three families of
invariants: persistence barcodes, persistent Laplacian spectra and
Stanley-Reisner data (facet bars, f/h-vectors, graded Betti numbers).
"""

from .complex import Filtration, build_rips_filtration, snapshot
from .ingest import PointCloud, load_fixture, parse_pdb, parse_xyz
from .persistence import Barcode, compute_barcodes

__all__ = [
    "Barcode",
    "Filtration",
    "PointCloud",
    "build_rips_filtration",
    "compute_barcodes",
    "load_fixture",
    "parse_pdb",
    "parse_xyz",
    "snapshot",
]
__version__ = "0.1.0"
