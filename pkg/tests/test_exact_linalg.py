import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cloud
from oracles import gf2_rank_dense, real_betti, brute_rips, sympy_rank
from ripscope import exact_linalg as xl
from ripscope.complex import ComplexSnapshot, build_rips_filtration, snapshot


def closure(top_simplices):
    out = set()
    for s in top_simplices:
        for r in range(1, len(s) + 1):
            out.update(itertools.combinations(sorted(s), r))
    return out


def make(top, n=None):
    simplices = closure(top)
    n = n if n is not None else 1 + max(v for s in simplices for v in s)
    return ComplexSnapshot.from_simplices(simplices, n)


RP2 = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
]
# recheck the standard 6-vertex RP^2: every edge in exactly two triangles
assert all(
    sum(1 for t in RP2 if set(e) <= set(t)) == 2
    for e in itertools.combinations(range(6), 2)
)

int_matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r
        )
    )
)


class TestRanks:
    @settings(max_examples=80, deadline=None)
    @given(int_matrices)
    def test_rational_rank_matches_sympy(self, rows):
        assert xl.rank_rational(np.array(rows)) == sympy_rank(rows)

    @settings(max_examples=80, deadline=None)
    @given(int_matrices)
    def test_gf2_rank_matches_elimination(self, rows):
        m = np.array(rows)
        assert xl.rank(m, xl.GF2) == gf2_rank_dense(m)

    def test_bareiss_exact_on_large_entries(self):
        big = 10**30
        m = [[big, big + 1], [big - 1, big]]  # det = 1
        assert xl.rank_rational(m) == 2
        assert xl.rank_rational([[big, 2 * big], [1, 2]]) == 1

    def test_empty(self):
        assert xl.rank(np.zeros((0, 3)), xl.QQ) == 0
        assert xl.rank_gf2_bits([]) == 0

    def test_field_differs(self):
        m = np.array([[1, 1], [1, -1]])
        assert xl.rank(m, xl.QQ) == 2 and xl.rank(m, xl.GF2) == 1

    def test_bad_field(self):
        with pytest.raises(ValueError):
            xl.rank(np.eye(2), "z")


class TestBoundary:
    def test_triangle(self):
        snap = make([(0, 1, 2)])
        b1 = xl.boundary_matrix(snap, 1, xl.QQ)
        assert b1.rows == ((0,), (1,), (2,))
        assert b1.cols == ((0, 1), (0, 2), (1, 2))
        b2 = xl.boundary_matrix(snap, 2, xl.QQ)
        assert b2.entries[:, 0].tolist() == [1, -1, 1]
        assert not (b1.entries @ b2.entries).any()

    def test_augmented_zero(self):
        snap = make([(0, 1)], n=3)
        b0 = xl.boundary_matrix(snap, 0, xl.QQ, augmented=True)
        assert b0.rows == ((),) and b0.entries.tolist() == [[1, 1]]
        assert xl.boundary_matrix(snap, 0, xl.QQ).entries.shape == (0, 2)

    def test_gf2_entries_are_bits(self):
        b = xl.boundary_matrix(make([(0, 1, 2)]), 2, xl.GF2)
        assert set(np.unique(b.entries)) <= {0, 1}

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 5000))
    def test_dd_zero(self, seed):
        snap = snapshot(build_rips_filtration(random_cloud(seed), 3, 2.0), 2.0)
        for k in range(1, snap.dim):
            d1 = xl.boundary_matrix(snap, k, xl.QQ).entries
            d2 = xl.boundary_matrix(snap, k + 1, xl.QQ).entries
            if d1.size and d2.size:
                assert not (d1 @ d2).any()


class TestHomology:
    def test_circle(self):
        h = xl.reduced_betti(make([(0, 1), (1, 2), (2, 3), (0, 3)]))
        assert (h[-1], h[0], h[1]) == (0, 0, 1)
        assert xl.betti_numbers(make([(0, 1), (1, 2), (2, 3), (0, 3)])) == [1, 1]

    def test_empty_complex(self):
        h = xl.reduced_betti(ComplexSnapshot((), 4))
        assert h[-1] == 1 and h[0] == 0

    def test_sphere(self):
        h = xl.reduced_betti(make(list(itertools.combinations(range(4), 3))), xl.QQ)
        assert [h[k] for k in range(-1, 3)] == [0, 0, 0, 1]

    def test_projective_plane_torsion(self):
        snap = make(RP2)
        assert xl.betti_numbers(snap, xl.GF2) == [1, 1, 1]
        assert xl.betti_numbers(snap, xl.QQ) == [1, 0, 0]
        diag = xl.torsion_diagnostic(snap)
        assert not diag.agrees and diag.differing == (1, 2)

    def test_torsion_free_agrees(self):
        assert xl.torsion_diagnostic(make([(0, 1, 2), (2, 3)])).agrees

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 5000), st.floats(0.5, 3.0))
    def test_matches_dense_svd(self, seed, eps):
        cloud = random_cloud(seed)
        snap = snapshot(build_rips_filtration(cloud, 3, 3.0), eps)
        oracle = brute_rips(cloud.points, 3, 3.0)
        betti = xl.betti_numbers(snap, xl.QQ)
        for k in range(min(3, len(betti))):
            assert betti[k] == real_betti(oracle, eps, k)


class TestInducedImage:
    def test_circle_filled(self):
        a = make([(0, 1), (1, 2), (0, 2)])
        b = make([(0, 1, 2)])
        assert xl.induced_image_rank(a, a, 1) == 1
        assert xl.induced_image_rank(a, b, 1) == 0

    def test_components_merge(self):
        a = make([(0,), (1,), (2,)])
        b = make([(0, 1), (2,)])
        assert xl.induced_image_rank(a, b, 0) == 1
        assert xl.induced_image_rank(a, b, 0, reduced=False) == 2

    def test_minus_one(self):
        empty = ComplexSnapshot((), 3)
        pt = make([(0,)], n=3)
        assert xl.induced_image_rank(empty, empty, -1) == 1
        assert xl.induced_image_rank(empty, pt, -1) == 0
        assert xl.induced_image_rank(pt, pt, -1) == 0

    def test_not_subcomplex(self):
        with pytest.raises(ValueError):
            xl.induced_image_rank(make([(0, 1)]), make([(1, 2)]), 0)

    def test_identity_equals_betti(self):
        snap = make(RP2)
        for field in xl.FIELDS:
            h = xl.reduced_betti(snap, field)
            for k in range(-1, 3):
                assert xl.induced_image_rank(snap, snap, k, field) == h[k]
