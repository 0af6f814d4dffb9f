import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripscope.ingest import (
    FIXTURES,
    ParseError,
    PointCloud,
    fixture_path,
    generate_octagon,
    generate_octahedron,
    load_fixture,
    octagon_critical_radii,
    parse_pdb,
    parse_xyz,
    read_structure,
    serialize_xyz,
)


def pdb_line(serial, name, res, chain, seq, x, y, z, alt=" ", record="ATOM  "):
    return (
        f"{record}{serial:5d} {name:<4s}{alt}{res:>3s} {chain}{seq:4d}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C"
    )


def test_pdb_line_helper_matches_columns():
    line = pdb_line(1, "CA", "ASN", "A", 1, -8.901, 4.127, -0.555)
    assert line[12:16].strip() == "CA"
    assert line[21] == "A"
    assert float(line[30:38]) == -8.901


class TestXYZ:
    def test_basic(self):
        cloud = parse_xyz("2\nwater\nO 0 0 0\nH 0.96 0 0\n")
        assert len(cloud) == 2
        assert cloud.labels == ("O", "H")
        assert cloud.source["comment"] == "water"

    @pytest.mark.parametrize(
        "text",
        ["", "x\n\n", "3\nc\nC 0 0 0\n", "1\nc\nC 0 0\n", "1\nc\nC a b c\n", "-1\nc\n"],
    )
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_xyz(text)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.tuples(*[st.floats(-50, 50, allow_nan=False) for _ in range(3)]),
            min_size=1,
            max_size=12,
            unique=True,
        )
    )
    def test_round_trip(self, pts):
        cloud = PointCloud(np.array(pts))
        back = parse_xyz(serialize_xyz(cloud, "rt"))
        assert np.array_equal(back.points, cloud.points)
        assert back.labels == cloud.labels


class TestPointCloud:
    def test_exact_duplicate_rejected(self):
        with pytest.raises(ValueError, match="coincide"):
            PointCloud([[0, 0, 0], [0, 0, 0]])

    def test_near_duplicate_warns(self, caplog):
        PointCloud([[0, 0, 0], [1e-12, 0, 0]])
        assert "closer than" in caplog.text

    def test_non_finite(self):
        with pytest.raises(ValueError):
            PointCloud([[0, 0, math.nan]])

    def test_label_length(self):
        with pytest.raises(ValueError):
            PointCloud([[0, 0, 0]], ["a", "b"])

    def test_points_read_only(self):
        cloud = PointCloud([[0, 0, 0], [1, 0, 0]])
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 5.0

    def test_distance_matrix(self):
        cloud = PointCloud([[0, 0, 0], [3, 4, 0]])
        assert cloud.distance_matrix()[0, 1] == 5.0


class TestPDB:
    TEXT = "\n".join([
        "HEADER    TEST",
        "MODEL        1",
        pdb_line(1, "N", "GLY", "A", 1, 0, 0, 0),
        pdb_line(2, "CA", "GLY", "A", 1, 1, 0, 0),
        pdb_line(3, "CA", "GLY", "A", 2, 2, 0, 0, alt="A"),
        pdb_line(4, "CA", "GLY", "A", 2, 9, 9, 9, alt="B"),
        pdb_line(5, "CA", "GLY", "B", 1, 3, 0, 0),
        pdb_line(6, "P", "DA", "B", 2, 4, 0, 0),
        pdb_line(7, "CA", "CA", "C", 1, 5, 0, 0, record="HETATM"),
        "ENDMDL",
        "MODEL        2",
        pdb_line(8, "CA", "GLY", "A", 1, 7, 7, 7),
        "ENDMDL",
        "END",
    ])

    def test_first_model_altloc_and_hetatm(self):
        cloud = parse_pdb(self.TEXT)
        assert cloud.labels == ("A:1:CA", "A:2:CA", "B:1:CA", "C:1:CA")
        assert cloud.points[1].tolist() == [2.0, 0.0, 0.0]

    def test_chain_filter(self):
        cloud = parse_pdb(self.TEXT, chain_filter=["B"])
        assert cloud.labels == ("B:1:CA",)

    def test_atom_filter(self):
        cloud = parse_pdb(self.TEXT, atom_filter=["P"])
        assert cloud.labels == ("B:2:P",)

    def test_no_match(self):
        with pytest.raises(ParseError):
            parse_pdb(self.TEXT, atom_filter=["ZN"])

    def test_bad_coordinates(self):
        line = pdb_line(1, "CA", "GLY", "A", 1, 0, 0, 0)
        bad = line[:30] + "   xx.xx" + line[38:]
        with pytest.raises(ParseError, match="line 1"):
            parse_pdb(bad)

    def test_real_1l2y(self):
        cloud = load_fixture("1l2y")
        assert len(cloud) == 20
        assert cloud.labels[0] == "A:1:CA"
        assert cloud.labels[-1] == "A:20:CA"
        assert np.allclose(cloud.points[0], [-8.608, 3.135, -1.618])

    def test_read_structure_path(self, tmp_path):
        p = tmp_path / "x.pdb"
        p.write_text(self.TEXT)
        assert len(read_structure(str(p))) == 4
        q = tmp_path / "y.xyz"
        q.write_text("1\n\nC 0 0 0\n")
        assert len(read_structure(str(q))) == 1


class TestGenerators:
    def test_octagon_geometry(self):
        cloud = generate_octagon(2.0)
        d = cloud.distance_matrix()
        r1, r2, r3, r4 = octagon_critical_radii(2.0)
        assert np.allclose(np.linalg.norm(cloud.points, axis=1), 2.0)
        assert math.isclose(r1, 1.5307, abs_tol=1e-4)
        assert math.isclose(r2, 2.8284, abs_tol=1e-4)
        assert math.isclose(r3, 3.6955, abs_tol=1e-4)
        assert math.isclose(r4, 4.0, abs_tol=1e-12)
        values = sorted(set(np.round(d[np.triu_indices(8, 1)], 9)))
        assert np.allclose(values, [r1, r2, r3, r4])

    def test_octagon_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            generate_octagon(0.0)

    def test_octahedron_distances(self):
        d = generate_octahedron().distance_matrix()
        values = sorted(set(np.round(d[np.triu_indices(6, 1)], 9)))
        assert np.allclose(values, [math.sqrt(2), math.sqrt(3.25), 2.0, 3.0])


class TestFixtures:
    def test_c20_is_dodecahedron(self):
        cloud = load_fixture("c20")
        d = cloud.distance_matrix()
        iu = np.triu_indices(20, 1)
        values, counts = np.unique(np.round(d[iu], 8), return_counts=True)
        assert math.isclose(values[0], 1.4, abs_tol=1e-9)
        assert counts.tolist() == [30, 60, 60, 30, 10]
        assert (np.sum(np.isclose(d, 1.4), axis=1) == 3).all()

    def test_unknown_fixture(self):
        with pytest.raises(KeyError):
            load_fixture("nope")

    def test_missing_fixture_raises_file_not_found(self):
        missing = [k for k, (f, _, _) in FIXTURES.items() if not fixture_path(f).is_file()]
        for name in missing:
            with pytest.raises(FileNotFoundError):
                load_fixture(name)
