import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cloud
from oracles import brute_rips, persistent_betti_oracle
from ripscope.complex import build_rips_filtration, scale_grid
from ripscope.ingest import octagon_critical_radii
from ripscope.persistence import (
    Bar,
    Barcode,
    betti_curve,
    compute_barcodes,
    curves_to_csv,
    persistent_betti,
    reported_dims,
)

R1, R2, R3, R4 = octagon_critical_radii(2.0)


def test_reported_dims():
    assert list(reported_dims(3)) == [0, 1, 2]
    assert list(reported_dims(0)) == [0]


class TestOctagon:
    def test_bars(self, octagon_filt):
        bc = compute_barcodes(octagon_filt)
        dim0 = bc.dim(0)
        assert len(dim0) == 8
        assert sum(math.isinf(b.death) for b in dim0) == 1
        assert all(abs(b.death - R1) < 1e-6 for b in dim0 if not math.isinf(b.death))
        (loop,) = bc.dim(1)
        assert abs(loop.birth - R1) < 1e-6 and abs(loop.death - R3) < 1e-6
        assert bc.dim(2) == []

    def test_zero_length_bars_kept_but_filtered(self, octagon_filt):
        bc = compute_barcodes(octagon_filt)
        assert len(bc.dim(1, include_zero=True)) > len(bc.dim(1))
        assert all(b.persistence > 0 for b in bc.positive().bars)

    def test_betti_curve(self, octagon_filt):
        bc = compute_barcodes(octagon_filt)
        grid = [0.0, 1.0, R1, 2.0, R3, 4.0]
        assert betti_curve(bc, 0, grid) == [8, 8, 1, 1, 1, 1]
        assert betti_curve(bc, 1, grid) == [0, 0, 1, 1, 0, 0]

    def test_persistent_betti_order(self, octagon_filt):
        bc = compute_barcodes(octagon_filt)
        assert persistent_betti(bc, 1, 2.0, 3.0) == 1
        assert persistent_betti(bc, 1, 2.0, 3.7) == 0
        with pytest.raises(ValueError):
            persistent_betti(bc, 1, 3.0, 2.0)


def test_octahedron(octahedron_filt):
    bc = compute_barcodes(octahedron_filt)
    deaths = sorted(b.death for b in bc.dim(0))
    assert [round(d, 4) for d in deaths] == [1.4142] * 3 + [1.8028] * 2 + [math.inf]
    (b1,) = bc.dim(1)
    (b2,) = bc.dim(2)
    assert (round(b1.birth, 5), round(b1.death, 5)) == (1.41421, 1.80278)
    assert (round(b2.birth, 5), b2.death) == (1.80278, 2.0)


def test_c20(c20_filt):
    bc = compute_barcodes(c20_filt)
    assert len(bc.dim(0)) == 20
    assert betti_curve(bc, 0, [4.0]) == [1]
    assert len(bc.dim(1)) == 11
    assert len(bc.dim(2)) == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_persistent_betti_matches_rank_formula(seed):
    cloud = random_cloud(seed)
    filt = build_rips_filtration(cloud, 3, 3.5)
    oracle = brute_rips(cloud.points, 3, 3.5)
    bc = compute_barcodes(filt)
    grid = scale_grid(0.0, 3.5, 0.5)
    for i, e1 in enumerate(grid):
        for e2 in grid[i:]:
            for k in range(3):
                assert persistent_betti(bc, k, e1, e2) == persistent_betti_oracle(oracle, e1, e2, k)


def test_essential_count_equals_top_betti_dim0(cloud_factory):
    filt = build_rips_filtration(cloud_factory(3), 1, 0.1)
    bc = compute_barcodes(filt)
    assert len(bc.dim(0)) == filt.vertex_count  # nothing merges below 0.1


class TestSerialization:
    def test_csv_round_trip(self, octagon_filt):
        bc = compute_barcodes(octagon_filt)
        text = bc.to_csv()
        assert "inf" in text
        back = Barcode.from_csv(text, max_dim=2)
        assert back.bars == bc.positive().bars

    def test_json(self, octagon_filt):
        import json

        data = json.loads(compute_barcodes(octagon_filt).to_json())
        assert data["max_dim"] == 2 and len(data["bars"]) == 9

    def test_curves_csv(self):
        bc = Barcode((Bar(0, 0.0),), 0)
        assert curves_to_csv([0.0, 1.0], {0: betti_curve(bc, 0, [0.0, 1.0])}).splitlines() == [
            "scale,k,betti", "0.0,0,1", "1.0,0,1"
        ]

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            betti_curve(Barcode((), 0), 0, [1.0, 0.0])
