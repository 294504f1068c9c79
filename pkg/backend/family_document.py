"""
Line-oriented text format for point sets and polygon families.

    hexfam-family 1
    meta <key> <value>          (zero or more, sorted by key)
    points <N>
    <x> <y> <z>                 (N lines of integers or reduced fractions)
    polygons <M>
    <i0> <i1> ... <ik-1>        (M lines of 0-based point indices)
    end

Serialization is canonical: one space between tokens, reduced fractions,
metadata sorted by key, a single trailing newline.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from geom_kernel import format_scalar, to_scalar
from models import Family, PointSet

logger = logging.getLogger(__name__)

FORMAT_NAME = "hexfam-family"
FORMAT_VERSION = 1


class DocumentParseError(ValueError):
    """Malformed family document; the message names the offending line"""


class FamilyDocument(BaseModel):
    """Validated in-memory form of a family document"""
    format_version: int = Field(default=FORMAT_VERSION)
    points: List[Tuple[str, str, str]] = Field(default_factory=list)
    polygons: List[List[int]] = Field(default_factory=list)
    metadata: Dict[str, str] = Field(default_factory=dict)

    @field_validator("format_version")
    @classmethod
    def check_version(cls, v):
        if v != FORMAT_VERSION:
            raise ValueError(f"Unsupported format version {v}; this reader understands {FORMAT_VERSION}")
        return v

    @field_validator("points")
    @classmethod
    def canonical_coordinates(cls, v):
        return [tuple(format_scalar(to_scalar(c)) for c in point) for point in v]

    @field_validator("polygons")
    @classmethod
    def check_polygons(cls, v):
        for position, indices in enumerate(v):
            if len(indices) < 3:
                raise ValueError(f"Polygon {position} has {len(indices)} vertices; at least 3 are required")
            if any(i < 0 for i in indices):
                raise ValueError(f"Polygon {position} has a negative vertex index")
        return v

    @field_validator("metadata")
    @classmethod
    def single_line_metadata(cls, v):
        cleaned = {}
        for key, value in v.items():
            if not key or any(ch.isspace() for ch in key):
                raise ValueError(f"Metadata key {key!r} must be a non-empty token without whitespace")
            value = str(value).strip()
            if "\n" in value or "\r" in value:
                raise ValueError(f"Metadata value for {key!r} must fit on one line")
            cleaned[key] = value
        return cleaned

    @classmethod
    def parse(cls, text: str) -> "FamilyDocument":
        return _Parser(text).parse()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FamilyDocument":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_family(cls, family: Family, metadata: Optional[Dict[str, str]] = None) -> "FamilyDocument":
        return cls(
            points=[tuple(p.to_strings()) for p in family.point_set],
            polygons=[list(p.vertex_indices) for p in family.polygons],
            metadata={str(k): str(v) for k, v in (metadata or {}).items()},
        )

    def point_set(self) -> PointSet:
        return PointSet.from_coordinates(self.points)

    def to_family(self, uniform_k: Optional[int] = None) -> Family:
        """Validated family; polygons come back in counter-clockwise order"""
        return Family.from_index_lists(self.point_set(), self.polygons, uniform_k)

    def canonical(self) -> "FamilyDocument":
        """Same document after a validation round trip through Family"""
        return FamilyDocument.from_family(self.to_family(), self.metadata)

    def serialize(self) -> str:
        lines = [f"{FORMAT_NAME} {self.format_version}"]
        lines.extend(f"meta {key} {self.metadata[key]}".rstrip() for key in sorted(self.metadata))
        lines.append(f"points {len(self.points)}")
        lines.extend(" ".join(point) for point in self.points)
        lines.append(f"polygons {len(self.polygons)}")
        lines.extend(" ".join(str(i) for i in polygon) for polygon in self.polygons)
        lines.append("end")
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8")
        logger.info(f"Wrote {len(self.points)} points and {len(self.polygons)} polygons to {path}")


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.position = 0

    def _error(self, message: str, line_no: Optional[int] = None) -> DocumentParseError:
        return DocumentParseError(f"line {line_no or self.position}: {message}")

    def _next(self, expecting: str) -> List[str]:
        while self.position < len(self.lines):
            self.position += 1
            tokens = self.lines[self.position - 1].split()
            if tokens:
                return tokens
        raise self._error(f"unexpected end of document, expected {expecting}", self.position + 1)

    def _count(self, tokens: List[str], keyword: str) -> int:
        if len(tokens) != 2 or tokens[0] != keyword:
            raise self._error(f"expected '{keyword} <count>', got {' '.join(tokens)!r}")
        try:
            count = int(tokens[1])
        except ValueError:
            raise self._error(f"{keyword} count must be an integer, got {tokens[1]!r}")
        if count < 0:
            raise self._error(f"{keyword} count must be non-negative")
        return count

    def parse(self) -> FamilyDocument:
        header = self._next("header")
        if len(header) != 2 or header[0] != FORMAT_NAME:
            raise self._error(f"expected '{FORMAT_NAME} <version>' header")
        try:
            version = int(header[1])
        except ValueError:
            raise self._error(f"format version must be an integer, got {header[1]!r}")
        if version != FORMAT_VERSION:
            raise self._error(f"unsupported format version {version}")

        metadata: Dict[str, str] = {}
        tokens = self._next("points section")
        while tokens[0] == "meta":
            if len(tokens) < 2:
                raise self._error("meta line needs a key")
            line = self.lines[self.position - 1].strip()
            value = line.split(None, 2)[2] if len(tokens) > 2 else ""
            metadata[tokens[1]] = value
            tokens = self._next("points section")

        points = []
        for _ in range(self._count(tokens, "points")):
            coords = self._next("a coordinate line")
            if len(coords) != 3:
                raise self._error(f"expected 3 coordinates, got {len(coords)}")
            try:
                points.append(tuple(format_scalar(to_scalar(c)) for c in coords))
            except ValueError as e:
                raise self._error(str(e))

        polygons = []
        for _ in range(self._count(self._next("polygons section"), "polygons")):
            indices = self._next("a polygon line")
            try:
                polygons.append([int(i) for i in indices])
            except ValueError:
                raise self._error(f"vertex indices must be integers, got {' '.join(indices)!r}")
            if len(indices) < 3:
                raise self._error(f"polygon needs at least 3 vertices, got {len(indices)}")

        if self._next("'end'") != ["end"]:
            raise self._error("expected 'end'")
        for line_no, trailing in enumerate(self.lines[self.position:], start=self.position + 1):
            if trailing.strip():
                raise self._error("content after 'end'", line_no)

        try:
            return FamilyDocument(format_version=version, points=points, polygons=polygons, metadata=metadata)
        except ValidationError as e:
            raise DocumentParseError(f"invalid document: {e.errors()[0]['msg']}")
