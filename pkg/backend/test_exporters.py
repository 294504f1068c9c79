"""
Unit tests for the OBJ and SVG exporters.
"""

import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from constructions import christmas_tree, fat_hexagon_stack
from exporters import decimal_string, export_obj, export_svg
from geom_kernel import Point3
from models import FatnessParams
from pipeline import ProjectionSpec, projection_for_direction

SVG_NS = "{http://www.w3.org/2000/svg}"


class TestDecimalString:
    """Test cases for decimal_string"""

    def test_rounding(self):
        """Test significant-digit rounding in plain notation"""
        assert decimal_string(Fraction(1, 3), 5) == "0.33333"
        assert decimal_string(Fraction(-3, 5), 12) == "-0.6"
        assert decimal_string(Fraction(2), 12) == "2"
        assert decimal_string(Fraction(12345), 2) == "12000"


class TestExportObj:
    """Test cases for export_obj"""

    def test_christmas_tree(self):
        """Test one vertex line per point and one 1-based face per triangle"""
        lines = export_obj(christmas_tree(5)).splitlines()
        assert lines[0] == "# hexfam export, 12 significant digits"
        vertices = [line for line in lines if line.startswith("v ")]
        faces = [line for line in lines if line.startswith("f ")]
        assert len(vertices) == 11
        assert len(faces) == 25
        assert faces[0] == "f 1 6 7"
        assert vertices[0] == "v 1 0 0"

    def test_fraction_coordinates(self):
        """Test rational coordinates are written as decimals"""
        text = export_obj(christmas_tree(3), digits=3)
        assert "v -0.6 0.8 0" in text.splitlines()

    def test_invalid_digits(self):
        """Test at least one digit is required"""
        with pytest.raises(ValueError, match="digits"):
            export_obj(christmas_tree(1), digits=0)


class TestExportSvg:
    """Test cases for export_svg"""

    def setup_method(self):
        self.family = fat_hexagon_stack(3, FatnessParams.from_c(2, Fraction(1, 2)))
        self.projection = projection_for_direction(self.family, Point3(1, 2, 40))

    def test_structure(self):
        """Test one polygon element per hexagon and one circle per point"""
        svg = export_svg(self.family, self.projection, size=400)
        root = ET.fromstring(svg.encode("utf-8"))
        assert root.attrib["width"] == "400"
        assert len(root.findall(f"{SVG_NS}polygon")) == 3
        assert len(root.findall(f"{SVG_NS}circle")) == 15
        assert "projection along (1, 2, 40)" in svg

    def test_points_fit_the_canvas(self):
        """Test every point lands inside the margins"""
        root = ET.fromstring(export_svg(self.family, self.projection, size=300).encode("utf-8"))
        for circle in root.findall(f"{SVG_NS}circle"):
            assert 19.999 <= float(circle.attrib["cx"]) <= 280.001
            assert 19.999 <= float(circle.attrib["cy"]) <= 280.001

    def test_polygon_titles(self):
        """Test polygon titles list their vertex indices"""
        root = ET.fromstring(export_svg(self.family, self.projection).encode("utf-8"))
        titles = [p.find(f"{SVG_NS}title").text for p in root.findall(f"{SVG_NS}polygon")]
        assert titles[0] == "polygon 0: 0 6 2 7 3 8"

    def test_small_canvas(self):
        """Test the canvas must be wider than both margins"""
        with pytest.raises(ValueError, match="exceed 40"):
            export_svg(self.family, self.projection, size=40)

    def test_unchecked_projection(self):
        """Test a projection built without genericity checks still renders"""
        svg = export_svg(christmas_tree(2), ProjectionSpec.along(Point3(1, 1, 1)))
        assert svg.count("<polygon ") == 4
