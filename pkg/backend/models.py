"""
Core data models for polygon families.
Defines PointSet, ConvexPlanarPolygon, Family and the (c, alpha)-fatness
predicate for hexagons, with validation and dictionary serialization.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from certified import cosine_upper_bound
from geom_kernel import (
    AngleData,
    DegenerateError,
    Plane,
    Point3,
    format_scalar,
    sign,
    squared_cosine,
    supporting_plane,
    to_scalar,
    vertex_centroid,
)

logger = logging.getLogger(__name__)

# Alternating vertex triples of a hexagon, in tie-break order
ALTERNATING_TRIPLES: Tuple[Tuple[int, int, int], ...] = ((0, 2, 4), (1, 3, 5))


class ModelError(ValueError):
    """Base class for configuration model validation errors"""


class DuplicatePointError(ModelError):
    pass


class TooFewVerticesError(ModelError):
    pass


class DuplicateVertexError(ModelError):
    pass


class NotConvexError(ModelError):
    pass


class NotHexagonError(ModelError):
    pass


class DuplicatePolygonError(ModelError):
    pass


class VertexIndexError(IndexError):
    """A vertex or point index is out of range"""


@dataclass(frozen=True)
class PointSet:
    """Ordered list of pairwise distinct points"""
    points: Tuple[Point3, ...]

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        seen: Dict[Point3, int] = {}
        for i, p in enumerate(points):
            if p in seen:
                raise DuplicatePointError(f"Points {seen[p]} and {i} coincide at {p}")
            seen[p] = i

    @classmethod
    def from_coordinates(cls, coordinates: Iterable[Sequence]) -> "PointSet":
        return cls(tuple(Point3.of(*c) for c in coordinates))

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, index: int) -> Point3:
        if not 0 <= index < len(self.points):
            raise VertexIndexError(f"Point index {index} out of range for {len(self.points)} points")
        return self.points[index]

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class ConvexPlanarPolygon:
    """
    Strictly convex planar polygon over a point set. Vertices run
    counter-clockwise w.r.t. plane.normal. Build through validate_polygon.
    """
    vertex_indices: Tuple[int, ...]
    plane: Plane
    vertices: Tuple[Point3, ...]

    @property
    def k(self) -> int:
        return len(self.vertex_indices)

    def canonical_key(self) -> Tuple[int, ...]:
        """Identity up to cyclic rotation and reversal"""
        idx = self.vertex_indices
        candidates = []
        for seq in (idx, tuple(reversed(idx))):
            for r in range(len(seq)):
                candidates.append(seq[r:] + seq[:r])
        return min(candidates)

    def edges(self) -> FrozenSet[Tuple[int, int]]:
        idx = self.vertex_indices
        k = len(idx)
        return frozenset(tuple(sorted((idx[i], idx[(i + 1) % k]))) for i in range(k))

    def diagonals(self) -> FrozenSet[Tuple[int, int]]:
        idx = self.vertex_indices
        k = len(idx)
        result = set()
        for i in range(k):
            for j in range(i + 2, k):
                if i == 0 and j == k - 1:
                    continue
                result.add(tuple(sorted((idx[i], idx[j]))))
        return frozenset(result)

    def side_lengths_sq(self) -> Tuple[Fraction, ...]:
        """Squared length of side i (vertex i to vertex i+1)"""
        vs = self.vertices
        k = len(vs)
        return tuple((vs[(i + 1) % k] - vs[i]).norm_sq() for i in range(k))

    def centroid(self) -> Point3:
        return vertex_centroid(self.vertices)

    def to_dict(self) -> Dict[str, Any]:
        return {"vertex_indices": list(self.vertex_indices), "plane": self.plane.to_dict()}


def validate_polygon(point_set: PointSet, indices: Sequence[int]) -> ConvexPlanarPolygon:
    """
    Validate an index list as a strictly convex planar polygon.
    A clockwise input is stored reversed, keeping its first vertex.
    """
    idx = tuple(int(i) for i in indices)
    if len(idx) < 3:
        raise TooFewVerticesError(f"A polygon needs at least 3 vertices, got {len(idx)}")
    for i in idx:
        if not 0 <= i < len(point_set):
            raise VertexIndexError(f"Vertex index {i} out of range for {len(point_set)} points")
    if len(set(idx)) != len(idx):
        raise DuplicateVertexError(f"Repeated vertex in {list(idx)}")

    points = [point_set[i] for i in idx]
    try:
        plane = supporting_plane(points)
    except DegenerateError:
        raise NotConvexError(f"Vertices {list(idx)} are collinear")

    n = plane.normal
    first_turn = sign(n.dot((points[1] - points[0]).cross(points[2] - points[1])))
    if first_turn == 0:
        raise NotConvexError(f"Vertices {idx[0]}, {idx[1]}, {idx[2]} are collinear")
    if first_turn < 0:
        idx = (idx[0],) + tuple(reversed(idx[1:]))
        points = [points[0]] + list(reversed(points[1:]))

    k = len(points)
    for i in range(k):
        a = points[i]
        edge = points[(i + 1) % k] - a
        for j in range(k):
            if j == i or j == (i + 1) % k:
                continue
            if sign(n.dot(edge.cross(points[j] - a))) <= 0:
                raise NotConvexError(
                    f"Vertex {idx[j]} is not strictly inside edge ({idx[i]}, {idx[(i + 1) % k]}) "
                    f"of polygon {list(idx)}"
                )

    return ConvexPlanarPolygon(idx, plane, tuple(points))


def interior_angle_data(polygon: ConvexPlanarPolygon, i: int) -> AngleData:
    """Angle data at vertex i between the two edges leaving it"""
    k = polygon.k
    if not 0 <= i < k:
        raise VertexIndexError(f"Vertex position {i} out of range for a {k}-gon")
    vs = polygon.vertices
    return squared_cosine(vs[i - 1] - vs[i], vs[(i + 1) % k] - vs[i])


@dataclass
class Family:
    """Polygons over a shared point set; no polygon appears twice"""
    point_set: PointSet
    polygons: Tuple[ConvexPlanarPolygon, ...]
    uniform_k: Optional[int] = None

    def __post_init__(self):
        self.polygons = tuple(self.polygons)
        if self.uniform_k is not None and self.uniform_k < 3:
            raise ValueError(f"uniform_k must be >= 3, got {self.uniform_k}")

        seen: Dict[Tuple[int, ...], int] = {}
        for position, polygon in enumerate(self.polygons):
            if self.uniform_k is not None and polygon.k != self.uniform_k:
                raise ValueError(
                    f"Polygon {position} has {polygon.k} vertices, family requires {self.uniform_k}"
                )
            for index, vertex in zip(polygon.vertex_indices, polygon.vertices):
                if self.point_set[index] != vertex:
                    raise ValueError(f"Polygon {position} vertex {index} does not match the point set")
            key = polygon.canonical_key()
            if key in seen:
                raise DuplicatePolygonError(f"Polygons {seen[key]} and {position} are the same polygon {list(key)}")
            seen[key] = position

    @classmethod
    def from_index_lists(cls, point_set: PointSet, index_lists: Iterable[Sequence[int]],
                         uniform_k: Optional[int] = None) -> "Family":
        polygons = tuple(validate_polygon(point_set, indices) for indices in index_lists)
        return cls(point_set, polygons, uniform_k)

    def __len__(self) -> int:
        return len(self.polygons)

    def subfamily(self, positions: Iterable[int]) -> "Family":
        return Family(self.point_set, tuple(self.polygons[i] for i in positions), self.uniform_k)

    def point_incidences(self) -> List[int]:
        """Number of polygons containing each point"""
        counts = [0] * len(self.point_set)
        for polygon in self.polygons:
            for index in polygon.vertex_indices:
                counts[index] += 1
        return counts

    def is_hexagon_family(self) -> bool:
        return all(polygon.k == 6 for polygon in self.polygons)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [p.to_strings() for p in self.point_set],
            "polygons": [list(p.vertex_indices) for p in self.polygons],
            "uniform_k": self.uniform_k,
        }


@dataclass(frozen=True)
class FatnessParams:
    """
    Fatness parameters (c, alpha), carried as c^2 and cos(alpha)
    so that transferred parameters stay exact.
    """
    c_sq: Fraction
    cos_alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c_sq", to_scalar(self.c_sq))
        object.__setattr__(self, "cos_alpha", to_scalar(self.cos_alpha))
        if self.c_sq < 1:
            raise ValueError(f"c must be >= 1, got c^2 = {self.c_sq}")
        if not 0 < self.cos_alpha < 1:
            raise ValueError(f"cos_alpha must lie in (0, 1), got {self.cos_alpha}")

    @classmethod
    def from_c(cls, c, cos_alpha) -> "FatnessParams":
        c = to_scalar(c)
        if c < 1:
            raise ValueError(f"c must be >= 1, got {c}")
        return cls(c * c, to_scalar(cos_alpha))

    @property
    def cos_alpha_sq(self) -> Fraction:
        return self.cos_alpha * self.cos_alpha

    def to_dict(self) -> Dict[str, Any]:
        return {"c_sq": format_scalar(self.c_sq), "cos_alpha": format_scalar(self.cos_alpha)}


@dataclass
class FatnessReport:
    is_fat: bool
    side_ratio_sq_max: Fraction
    fat_vertex_triple: Optional[Tuple[int, int, int]] = None
    failing_condition: Optional[str] = None
    fat_triples: Tuple[Tuple[int, int, int], ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_fat": self.is_fat,
            "side_ratio_sq_max": format_scalar(self.side_ratio_sq_max),
            "fat_vertex_triple": list(self.fat_vertex_triple) if self.fat_vertex_triple else None,
            "failing_condition": self.failing_condition,
            "fat_triples": [list(t) for t in self.fat_triples],
        }


def fat_triples(hexagon: ConvexPlanarPolygon, cos_alpha: Fraction) -> Tuple[Tuple[int, int, int], ...]:
    """Alternating triples whose three angles all satisfy |cos| <= cos_alpha"""
    bound = cos_alpha * cos_alpha
    return tuple(
        triple for triple in ALTERNATING_TRIPLES
        if all(interior_angle_data(hexagon, i).value <= bound for i in triple)
    )


def is_fat_hexagon(hexagon: ConvexPlanarPolygon, params: FatnessParams) -> FatnessReport:
    if hexagon.k != 6:
        raise NotHexagonError(f"Fatness is defined for hexagons, got a {hexagon.k}-gon")

    sides = hexagon.side_lengths_sq()
    # all pairs within [1/c^2, c^2] is the same as max/min <= c^2
    ratio = max(sides) / min(sides)
    triples = fat_triples(hexagon, params.cos_alpha)

    failures = []
    if ratio > params.c_sq:
        failures.append(f"side ratio squared {format_scalar(ratio)} exceeds c^2 = {format_scalar(params.c_sq)}")
    if not triples:
        failures.append(f"no alternating triple has every |cos| <= {format_scalar(params.cos_alpha)}")

    return FatnessReport(
        is_fat=not failures,
        side_ratio_sq_max=ratio,
        fat_vertex_triple=triples[0] if triples else None,
        failing_condition="; ".join(failures) or None,
        fat_triples=triples,
    )


def cos_alpha_bound(angle_degrees) -> Fraction:
    """Rational upper bound on cos(angle) for users who think of alpha in degrees"""
    angle = to_scalar(angle_degrees)
    if not 0 < angle < 90:
        raise ValueError(f"alpha must lie strictly between 0 and 90 degrees, got {angle}")
    return cosine_upper_bound(angle)
