"""
Unit tests for the family generators.
"""

from fractions import Fraction

import pytest

from classify import Relation, verify_family
from constructions import (
    BadTranslationError,
    ConstructionParams,
    InfeasibleParamsError,
    christmas_tree,
    drop_one_vertex,
    fat_hexagon_stack,
    general_position_points,
    parse_vector,
    prism_quadrilaterals,
    rational_circle_points,
)
from geom_kernel import Point3
from models import FatnessParams

DEFAULT_PARAMS = FatnessParams.from_c(2, Fraction(1, 2))

STACK_3_POINTS = [
    (0, 0, 0), (0, 0, "1/10"), (8, 0, 0), (4, 7, 0), (8, 0, "1/10"), (4, 7, "-1/15"),
    (4, -3, 0), ("17/2", 5, 0), ("-1/2", 5, 0),
    (4, -3, "1/10"), ("17/2", 5, "11/480"), ("-1/2", 5, "-43/480"),
    (4, -3, "1/7"), ("17/2", 5, "1/35"), ("-1/2", 5, "1/35"),
]
STACK_3_POLYGONS = [(0, 6, 2, 7, 3, 8), (0, 11, 5, 10, 4, 9), (1, 12, 4, 13, 3, 14)]


def P(x, y, z):
    return Point3.of(x, y, z)


class TestConstructionParams:
    """Test cases for ConstructionParams"""

    def test_validation(self):
        """Test m and seed ranges"""
        assert ConstructionParams(3).seed == 0
        with pytest.raises(ValueError, match="m must be >= 1"):
            ConstructionParams(0)
        with pytest.raises(ValueError, match="64 bits"):
            ConstructionParams(2, seed=2 ** 64)


class TestCirclePoints:
    """Test cases for rational_circle_points"""

    def test_seed_zero(self):
        """Test the fixed parameters t = 0, 1, 2"""
        assert rational_circle_points(3) == [P(1, 0, 0), P(0, 1, 0), P("-3/5", "4/5", 0)]

    def test_seeded_points_on_circle(self):
        """Test seeded points are distinct, exact and on the unit circle"""
        points = rational_circle_points(6, seed=7)
        assert len(set(points)) == 6
        for p in points:
            assert p.x * p.x + p.y * p.y == 1
            assert p.z == 0

    def test_deterministic(self):
        """Test the same seed gives the same points"""
        assert rational_circle_points(5, seed=11) == rational_circle_points(5, seed=11)

    def test_invalid_m(self):
        """Test m below 1"""
        with pytest.raises(ValueError):
            rational_circle_points(0)


class TestChristmasTree:
    """Test cases for christmas_tree"""

    def test_m3(self):
        """Test points and triangles for m = 3"""
        family = christmas_tree(3)
        assert len(family.point_set) == 7
        assert list(family.point_set)[3:] == [P(0, 0, j) for j in range(4)]
        assert [p.vertex_indices for p in family.polygons] == [
            (0, 3, 4), (0, 4, 5), (0, 5, 6),
            (1, 4, 3), (1, 5, 4), (1, 6, 5),
            (2, 4, 3), (2, 5, 4), (2, 6, 5),
        ]

    def test_sizes(self):
        """Test 2m+1 points and m^2 triangles"""
        for m in (1, 2, 5):
            family = christmas_tree(m)
            assert len(family.point_set) == 2 * m + 1
            assert len(family) == m * m
            assert family.uniform_k == 3

    def test_invalid_m(self):
        """Test m = 0"""
        with pytest.raises(ValueError, match="m must be >= 1"):
            christmas_tree(0)


class TestPrismQuadrilaterals:
    """Test cases for prism_quadrilaterals and its base points"""

    def test_general_position(self):
        """Test no three base points are collinear"""
        points = general_position_points(7, seed=3)
        assert len(set(points)) == 7
        for i in range(7):
            for j in range(i + 1, 7):
                for k in range(j + 1, 7):
                    a, b, c = points[i], points[j], points[k]
                    assert (b.x - a.x) * (c.y - a.y) != (b.y - a.y) * (c.x - a.x)

    def test_seed_zero_parabola(self):
        """Test seed 0 places the base on the parabola y = x^2"""
        assert general_position_points(4, seed=0) == [P(0, 0, 0), P(1, 1, 0), P(2, 4, 0), P(3, 9, 0)]
        family = prism_quadrilaterals(4)
        assert [p.vertex_indices for p in family.polygons] == [
            (0, 1, 5, 4), (0, 2, 6, 4), (0, 3, 7, 4), (1, 2, 6, 5), (1, 3, 7, 5), (2, 3, 7, 6)
        ]

    def test_m4(self):
        """Test 8 points and 6 parallelograms"""
        family = prism_quadrilaterals(4, seed=1)
        assert len(family.point_set) == 8
        assert len(family) == 6
        assert family.uniform_k == 4
        for i in range(4):
            assert family.point_set[i + 4] - family.point_set[i] == P(0, 0, 1)

    def test_custom_translation(self):
        """Test a slanted translation vector"""
        family = prism_quadrilaterals(3, seed=2, v=P(1, 1, 2))
        assert family.point_set[3] - family.point_set[0] == P(1, 1, 2)

    def test_no_bad_pairs(self):
        """Test prism families are free of bad pairs"""
        assert verify_family(prism_quadrilaterals(5, seed=4), Relation.NO_BAD, threads=1).ok

    def test_errors(self):
        """Test small m and a horizontal translation"""
        with pytest.raises(ValueError, match="m must be >= 2"):
            prism_quadrilaterals(1)
        with pytest.raises(BadTranslationError):
            prism_quadrilaterals(3, v=P(1, 0, 0))


class TestFatHexagonStack:
    """Test cases for fat_hexagon_stack"""

    def test_three_hexagons(self):
        """Test the exact points and polygons of one gadget"""
        family = fat_hexagon_stack(3, DEFAULT_PARAMS)
        assert list(family.point_set) == [P(*c) for c in STACK_3_POINTS]
        assert [p.vertex_indices for p in family.polygons] == STACK_3_POLYGONS

    def test_only_first_pair_is_bad(self):
        """Test hexagons 0 and 1 intersect badly and nothing else does"""
        report = verify_family(fat_hexagon_stack(3, DEFAULT_PARAMS), Relation.NO_BAD, threads=1)
        assert [(i, j) for i, j, _ in report.violating_pairs] == [(0, 1)]

    def test_leftover_hexagons(self):
        """Test counts that are not a multiple of three"""
        family = fat_hexagon_stack(5, DEFAULT_PARAMS)
        assert len(family) == 5
        assert len(family.point_set) == 15 + 2 * 6

    def test_disjoint_variant(self):
        """Test side-by-side copies are almost disjoint"""
        family = fat_hexagon_stack(4, DEFAULT_PARAMS, disjoint=True)
        assert len(family.point_set) == 24
        assert verify_family(family, Relation.ALMOST_DISJOINT, threads=1).ok

    def test_seed_applies_symmetry(self):
        """Test seed 3 mirrors both plane axes"""
        base = fat_hexagon_stack(3, DEFAULT_PARAMS, seed=0)
        mirrored = fat_hexagon_stack(3, DEFAULT_PARAMS, seed=3)
        for p, q in zip(base.point_set, mirrored.point_set):
            assert q == P(-p.x, -p.y, p.z)

    def test_infeasible(self):
        """Test too few hexagons, an ambiguous labeling and a failed fatness check"""
        with pytest.raises(InfeasibleParamsError, match="count >= 3"):
            fat_hexagon_stack(2, DEFAULT_PARAMS)
        with pytest.raises(InfeasibleParamsError, match="ambiguous"):
            fat_hexagon_stack(3, FatnessParams.from_c(2, Fraction(7, 10)))
        with pytest.raises(InfeasibleParamsError, match="not fat"):
            fat_hexagon_stack(3, FatnessParams.from_c(1, Fraction(3, 10)))


class TestHelpers:
    """Test cases for drop_one_vertex and parse_vector"""

    def test_drop_one_vertex(self):
        """Test parallelograms shrink to triangles"""
        reduced = drop_one_vertex(prism_quadrilaterals(4, seed=1), seed=5)
        assert reduced.uniform_k == 3
        assert 1 <= len(reduced) <= 6
        assert all(p.k == 3 for p in reduced.polygons)

    def test_drop_from_triangles(self):
        """Test triangles have no vertex to spare"""
        with pytest.raises(ValueError, match="triangle"):
            drop_one_vertex(christmas_tree(2))

    def test_parse_vector(self):
        """Test comma-separated rational components"""
        assert parse_vector("1, 2,3/4") == P(1, 2, "3/4")
        with pytest.raises(ValueError, match="three comma-separated"):
            parse_vector("1,2")
