"""
Unit tests for pair classification and family verification.
"""

import pytest

from classify import (
    Relation,
    SamePolygonError,
    classify_pair,
    intersects_badly,
    is_almost_disjoint,
    is_vertex_or_edge_compatible,
    relation_holds,
    shared_diagonals,
    verify_family,
)
from constructions import almost_disjoint_example, bad_pair_example, christmas_tree
from geom_kernel import Point3, Region, Segment, ShapeKind, SinglePoint
from models import Family, PointSet, validate_polygon


def P(x, y, z):
    return Point3.of(x, y, z)


def pair(coords, first, second):
    points = PointSet.from_coordinates(coords)
    return validate_polygon(points, first), validate_polygon(points, second)


class TestRelation:
    """Test cases for relation names"""

    def test_parse(self):
        """Test CLI names parse case-insensitively"""
        assert Relation.parse(" No-Bad ") == Relation.NO_BAD
        assert Relation.parse("almost-disjoint") == Relation.ALMOST_DISJOINT

    def test_parse_unknown(self):
        """Test unknown names list the valid choices"""
        with pytest.raises(ValueError, match="Unknown relation 'touching'"):
            Relation.parse("touching")


class TestClassifyPair:
    """Test cases for classify_pair and the relation predicates"""

    def test_bad_pair(self):
        """Test a plane slicing through a triangle at a shared vertex"""
        family = bad_pair_example()
        cls = classify_pair(*family.polygons)
        assert cls.shared_vertices == (0,)
        assert cls.shape == Segment(P(0, 0, 0), P(1, 1, 0))
        assert cls.interior_contact
        assert cls.interior_contact_both
        assert intersects_badly(cls)
        assert intersects_badly(cls, strict=True)
        assert not is_almost_disjoint(cls)
        assert not is_vertex_or_edge_compatible(cls)

    def test_single_shared_vertex(self):
        """Test triangles meeting only at their common vertex"""
        cls = classify_pair(*almost_disjoint_example().polygons)
        assert cls.shape == SinglePoint(P(0, 0, 0))
        assert is_almost_disjoint(cls)
        assert is_vertex_or_edge_compatible(cls)
        assert not intersects_badly(cls)

    def test_shared_edge(self):
        """Test coplanar triangles on opposite sides of a shared edge"""
        t1, t2 = pair([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, -1, 0)], [0, 1, 2], [0, 1, 3])
        cls = classify_pair(t1, t2)
        assert cls.shared_full_edges == 1
        assert cls.shape.kind == ShapeKind.SEGMENT
        assert not is_almost_disjoint(cls)
        assert is_vertex_or_edge_compatible(cls)
        assert not intersects_badly(cls)

    def test_shared_edge_folded(self):
        """Test non-coplanar triangles hinged on a shared edge"""
        t1, t2 = pair([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], [0, 1, 2], [0, 1, 3])
        cls = classify_pair(t1, t2)
        assert cls.shape == Segment(P(0, 0, 0), P(1, 0, 0))
        assert is_vertex_or_edge_compatible(cls)

    def test_shared_edge_overlapping(self):
        """Test coplanar triangles on the same side of a shared edge overlap badly"""
        t1, t2 = pair([(0, 0, 0), (2, 0, 0), (0, 2, 0), (1, 1, 0)], [0, 1, 2], [0, 1, 3])
        cls = classify_pair(t1, t2)
        assert isinstance(cls.shape, Region)
        assert not is_vertex_or_edge_compatible(cls)
        assert intersects_badly(cls)

    def test_disjoint(self):
        """Test far-apart triangles satisfy every relation"""
        t1, t2 = pair([(0, 0, 0), (1, 0, 0), (0, 1, 0), (5, 5, 5), (6, 5, 5), (5, 6, 7)], [0, 1, 2], [3, 4, 5])
        cls = classify_pair(t1, t2)
        assert cls.shape.kind == ShapeKind.EMPTY
        for relation in Relation:
            assert relation_holds(cls, relation)

    def test_overlap_without_shared_vertex(self):
        """Test overlapping triangles with no common vertex are not a bad pair"""
        t1, t2 = pair([(0, 0, 0), (2, 0, 0), (0, 2, 0), ("1/2", "1/2", 0), (3, "1/2", 0), ("1/2", 3, 0)],
                      [0, 1, 2], [3, 4, 5])
        cls = classify_pair(t1, t2)
        assert isinstance(cls.shape, Region)
        assert not intersects_badly(cls)
        assert relation_holds(cls, Relation.NO_BAD)
        assert not relation_holds(cls, Relation.VERTEX_OR_EDGE)

    def test_touching_without_shared_vertex(self):
        """Test a vertex resting on another triangle's edge is not almost disjoint"""
        t1, t2 = pair([(0, 0, 0), (2, 0, 0), (0, 2, 0), (1, 1, 0), (3, 3, 1), (3, 3, -1)], [0, 1, 2], [3, 4, 5])
        cls = classify_pair(t1, t2)
        assert cls.shared_vertices == ()
        assert cls.shape == SinglePoint(P(1, 1, 0))
        assert not cls.interior_contact
        assert not is_almost_disjoint(cls)
        assert not intersects_badly(cls)

    def test_same_polygon(self):
        """Test a polygon cannot be classified against itself"""
        t1, t2 = pair([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [0, 1, 2], [2, 1, 0])
        with pytest.raises(SamePolygonError):
            classify_pair(t1, t2)

    def test_to_dict(self):
        """Test the serialized classification"""
        data = classify_pair(*bad_pair_example().polygons).to_dict()
        assert data["shared_vertices"] == [0]
        assert data["shape"] == {"kind": "segment", "points": [["0", "0", "0"], ["1", "1", "0"]]}
        assert data["interior_contact"] is True


class TestSharedDiagonals:
    """Test cases for shared_diagonals"""

    def test_parallelograms_sharing_a_diagonal(self):
        """Test two quadrilaterals in different planes with a common diagonal"""
        points = PointSet.from_coordinates([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (1, 0, 1), (0, 1, -1)])
        square = validate_polygon(points, [0, 1, 2, 3])
        tilted = validate_polygon(points, [0, 4, 2, 5])
        assert shared_diagonals(square, tilted) == {(0, 2)}


class TestVerifyFamily:
    """Test cases for verify_family"""

    def test_christmas_tree_is_vertex_or_edge(self):
        """Test every pair of a small Christmas tree"""
        report = verify_family(christmas_tree(3), Relation.VERTEX_OR_EDGE, threads=1)
        assert report.ok
        assert report.checked_pairs == 36

    def test_bad_pair_reported(self):
        """Test the violating pair is listed"""
        report = verify_family(bad_pair_example(), Relation.NO_BAD, threads=1)
        assert not report.ok
        assert [(i, j) for i, j, _ in report.violating_pairs] == [(0, 1)]
        assert report.to_dict()["violations"] == 1

    def test_threads_do_not_change_the_result(self):
        """Test parallel verification matches the sequential one"""
        family = christmas_tree(4)
        sequential = verify_family(family, Relation.ALMOST_DISJOINT, threads=1)
        parallel = verify_family(family, Relation.ALMOST_DISJOINT, threads=4)
        assert not sequential.ok
        assert [(i, j) for i, j, _ in sequential.violating_pairs] == [(i, j) for i, j, _ in parallel.violating_pairs]

    def test_empty_family(self):
        """Test a family without polygons has nothing to check"""
        report = verify_family(Family(PointSet(()), ()), Relation.NO_BAD, threads=1)
        assert report.ok
        assert report.checked_pairs == 0
