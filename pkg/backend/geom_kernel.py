"""
Exact geometric kernel for convex planar polygons in 3-space.

Points carry fractions.Fraction coordinates; every predicate and
construction here is exact. Polygons are accepted through the
PolygonLike protocol (anything with ``vertices`` and ``plane``) so the
kernel does not depend on the model layer.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import ClassVar, Iterable, List, NamedTuple, Optional, Protocol, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

# Exact scalar type used for every coordinate
Q = Fraction


class GeometryError(ValueError):
    """Base class for kernel-level geometric errors"""


class ZeroVectorError(GeometryError):
    """A nonzero vector was required"""


class DegenerateError(GeometryError):
    """Input points do not span what the operation needs (e.g. all collinear)"""


class NotCoplanarError(GeometryError):
    """Points that must share a plane do not"""


def to_scalar(value: Union[int, str, Fraction]) -> Fraction:
    """Convert an int, Fraction or 'n/d' string to an exact scalar"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError(f"Cannot use boolean {value!r} as a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational literal {value!r}: {e}")
    raise TypeError(f"Cannot convert {value!r} of type {type(value).__name__} to an exact scalar")


def sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def format_scalar(q: Fraction) -> str:
    """Canonical text form: 'n' for integers, 'n/d' otherwise"""
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class Point3:
    """A point (or vector) with exact rational coordinates"""
    x: Fraction
    y: Fraction
    z: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", to_scalar(self.x))
        object.__setattr__(self, "y", to_scalar(self.y))
        object.__setattr__(self, "z", to_scalar(self.z))

    @classmethod
    def of(cls, x, y, z) -> "Point3":
        return cls(to_scalar(x), to_scalar(y), to_scalar(z))

    def __add__(self, other: "Point3") -> "Point3":
        return Point3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Point3") -> "Point3":
        return Point3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Point3":
        return Point3(-self.x, -self.y, -self.z)

    def scaled(self, k: Fraction) -> "Point3":
        return Point3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Point3") -> Fraction:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Point3") -> "Point3":
        return Point3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm_sq(self) -> Fraction:
        return self.dot(self)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0

    def as_tuple(self) -> Tuple[Fraction, Fraction, Fraction]:
        return (self.x, self.y, self.z)

    def to_strings(self) -> List[str]:
        return [format_scalar(c) for c in self.as_tuple()]

    def __str__(self) -> str:
        return "(" + ", ".join(self.to_strings()) + ")"


# Vectors and points share a representation
Vector3 = Point3
ORIGIN = Point3(0, 0, 0)


def orient3d(a: Point3, b: Point3, c: Point3, d: Point3) -> int:
    """Sign of det(b-a, c-a, d-a)"""
    return sign((b - a).dot((c - a).cross(d - a)))


@dataclass(frozen=True)
class Plane:
    """
    Plane {p : normal . p = offset}, always stored canonically: integer
    coefficients with no common factor and the first nonzero normal
    component positive. Two equal planes therefore compare equal.
    """
    normal: Point3
    offset: Fraction

    def __post_init__(self):
        coeffs = [*self.normal.as_tuple(), to_scalar(self.offset)]
        if all(c == 0 for c in coeffs[:3]):
            raise ZeroVectorError("Plane normal must be nonzero")
        denom = lcm(*(c.denominator for c in coeffs))
        ints = [int(c * denom) for c in coeffs]
        g = gcd(*ints)
        ints = [v // g for v in ints]
        lead = next(v for v in ints[:3] if v != 0)
        if lead < 0:
            ints = [-v for v in ints]
        object.__setattr__(self, "normal", Point3(ints[0], ints[1], ints[2]))
        object.__setattr__(self, "offset", Fraction(ints[3]))

    @classmethod
    def from_coefficients(cls, a, b, c, d) -> "Plane":
        """Plane a*x + b*y + c*z = d"""
        return cls(Point3.of(a, b, c), to_scalar(d))

    @classmethod
    def through(cls, point: Point3, normal: Point3) -> "Plane":
        return cls(normal, normal.dot(point))

    def evaluate(self, p: Point3) -> Fraction:
        return self.normal.dot(p) - self.offset

    def side(self, p: Point3) -> int:
        return sign(self.evaluate(p))

    def contains(self, p: Point3) -> bool:
        return self.evaluate(p) == 0

    def to_dict(self):
        return {"normal": self.normal.to_strings(), "offset": format_scalar(self.offset)}


class ShapeKind(str, Enum):
    """Kinds of hull intersection"""
    EMPTY = "empty"
    POINT = "point"
    SEGMENT = "segment"
    REGION = "region"


@dataclass(frozen=True)
class Empty:
    kind: ClassVar[ShapeKind] = ShapeKind.EMPTY
    dimension: ClassVar[int] = -1

    @property
    def points(self) -> Tuple[Point3, ...]:
        return ()

    def to_dict(self):
        return {"kind": self.kind.value, "points": []}


@dataclass(frozen=True)
class SinglePoint:
    point: Point3
    kind: ClassVar[ShapeKind] = ShapeKind.POINT
    dimension: ClassVar[int] = 0

    @property
    def points(self) -> Tuple[Point3, ...]:
        return (self.point,)

    def to_dict(self):
        return {"kind": self.kind.value, "points": [self.point.to_strings()]}


@dataclass(frozen=True)
class Segment:
    """Closed segment; endpoints distinct and stored lexicographically"""
    a: Point3
    b: Point3
    kind: ClassVar[ShapeKind] = ShapeKind.SEGMENT
    dimension: ClassVar[int] = 1

    def __post_init__(self):
        if self.a == self.b:
            raise DegenerateError(f"Segment endpoints coincide at {self.a}")
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def points(self) -> Tuple[Point3, ...]:
        return (self.a, self.b)

    def midpoint(self) -> Point3:
        return (self.a + self.b).scaled(Fraction(1, 2))

    def to_dict(self):
        return {"kind": self.kind.value, "points": [self.a.to_strings(), self.b.to_strings()]}


@dataclass(frozen=True)
class Region:
    """
    Strictly convex planar region, vertices counter-clockwise w.r.t.
    plane.normal, lexicographically least vertex first. Build it with
    planar_convex_hull so the canonical form holds.
    """
    vertices: Tuple[Point3, ...]
    plane: Plane
    kind: ClassVar[ShapeKind] = ShapeKind.REGION
    dimension: ClassVar[int] = 2

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(self.vertices) < 3:
            raise DegenerateError(f"Region needs at least 3 vertices, got {len(self.vertices)}")

    @property
    def points(self) -> Tuple[Point3, ...]:
        return self.vertices

    def centroid(self) -> Point3:
        return vertex_centroid(self.vertices)

    def to_dict(self):
        return {"kind": self.kind.value, "points": [v.to_strings() for v in self.vertices]}


IntersectionShape = Union[Empty, SinglePoint, Segment, Region]
EMPTY = Empty()


class AngleData(NamedTuple):
    """Exact description of an angle: squared cosine and the sign of the cosine"""
    value: Fraction
    dot_sign: int


def squared_cosine(u: Vector3, v: Vector3) -> AngleData:
    if u.is_zero() or v.is_zero():
        raise ZeroVectorError(f"squared_cosine needs nonzero vectors, got {u} and {v}")
    d = u.dot(v)
    return AngleData(d * d / (u.norm_sq() * v.norm_sq()), sign(d))


def vertex_centroid(points: Sequence[Point3]) -> Point3:
    total = ORIGIN
    for p in points:
        total = total + p
    return total.scaled(Fraction(1, len(points)))


def supporting_plane(points: Sequence[Point3]) -> Plane:
    """Canonical plane through all points (first independent triple defines it)"""
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateError(f"Need at least 3 points for a plane, got {len(pts)}")

    a = pts[0]
    b = next((p for p in pts[1:] if p != a), None)
    if b is None:
        raise DegenerateError("All points coincide")

    normal = None
    for c in pts:
        n = (b - a).cross(c - a)
        if not n.is_zero():
            normal = n
            break
    if normal is None:
        raise DegenerateError("All points are collinear")

    plane = Plane.through(a, normal)
    for p in pts:
        if not plane.contains(p):
            raise NotCoplanarError(f"Point {p} is off the plane {plane.to_dict()}")
    return plane


def project_point(p: Point3, direction: Vector3) -> Point3:
    """Orthogonal projection onto the plane through the origin normal to direction"""
    return p - direction.scaled(p.dot(direction) / direction.norm_sq())


class PolygonLike(Protocol):
    """Anything exposing counter-clockwise vertices and their canonical plane"""

    @property
    def vertices(self) -> Tuple[Point3, ...]: ...

    @property
    def plane(self) -> Plane: ...


class LocationKind(str, Enum):
    OUTSIDE = "outside"
    VERTEX = "vertex"
    EDGE_INTERIOR = "edge_interior"
    RELATIVE_INTERIOR = "relative_interior"


@dataclass(frozen=True)
class PointLocation:
    kind: LocationKind
    index: Optional[int] = None


OUTSIDE = PointLocation(LocationKind.OUTSIDE)
RELATIVE_INTERIOR = PointLocation(LocationKind.RELATIVE_INTERIOR)


def point_polygon_location(p: Point3, polygon: PolygonLike) -> PointLocation:
    """Where p sits relative to the closed polygon; edge i runs from vertex i to i+1"""
    plane = polygon.plane
    if not plane.contains(p):
        return OUTSIDE

    vertices = polygon.vertices
    for i, v in enumerate(vertices):
        if p == v:
            return PointLocation(LocationKind.VERTEX, i)

    n = plane.normal
    k = len(vertices)
    on_edge = None
    for i in range(k):
        a, b = vertices[i], vertices[(i + 1) % k]
        s = sign(n.dot((b - a).cross(p - a)))
        if s < 0:
            return OUTSIDE
        if s == 0:
            on_edge = i

    if on_edge is None:
        return RELATIVE_INTERIOR
    return PointLocation(LocationKind.EDGE_INTERIOR, on_edge)


def segment_segment_intersection(s1: Segment, s2: Segment) -> IntersectionShape:
    p, d1 = s1.a, s1.b - s1.a
    q, d2 = s2.a, s2.b - s2.a
    w = q - p
    n = d1.cross(d2)

    if n.is_zero():
        # parallel: only collinear overlap can meet
        if not d1.cross(w).is_zero():
            return EMPTY
        dd = d1.norm_sq()
        t0 = d1.dot(s2.a - p) / dd
        t1 = d1.dot(s2.b - p) / dd
        lo = max(Fraction(0), min(t0, t1))
        hi = min(Fraction(1), max(t0, t1))
        if lo > hi:
            return EMPTY
        start = p + d1.scaled(lo)
        if lo == hi:
            return SinglePoint(start)
        return Segment(start, p + d1.scaled(hi))

    if w.dot(n) != 0:
        return EMPTY  # skew lines

    nn = n.norm_sq()
    s = w.cross(d2).dot(n) / nn
    u = w.cross(d1).dot(n) / nn
    if 0 <= s <= 1 and 0 <= u <= 1:
        return SinglePoint(p + d1.scaled(s))
    return EMPTY


def segment_plane_crossing(a: Point3, b: Point3, plane: Plane) -> Optional[Point3]:
    """Point where the open segment ab strictly crosses plane, if it does"""
    va, vb = plane.evaluate(a), plane.evaluate(b)
    if (va > 0 and vb < 0) or (va < 0 and vb > 0):
        return a + (b - a).scaled(va / (va - vb))
    return None


def planar_convex_hull(points: Iterable[Point3], plane: Plane) -> IntersectionShape:
    """
    Exact convex hull of coplanar points as a canonical IntersectionShape.
    Gift wrapping from the lexicographically least point, turning
    counter-clockwise w.r.t. plane.normal; collinear points are dropped.
    """
    unique = sorted(set(points))
    if not unique:
        return EMPTY
    if len(unique) == 1:
        return SinglePoint(unique[0])

    n = plane.normal

    def turn(a: Point3, b: Point3, c: Point3) -> int:
        return sign(n.dot((b - a).cross(c - a)))

    start, last = unique[0], unique[-1]
    if all(turn(start, last, p) == 0 for p in unique):
        return Segment(start, last)

    hull = [start]
    current = start
    while True:
        candidate = None
        for p in unique:
            if p == current:
                continue
            if candidate is None:
                candidate = p
                continue
            t = turn(current, candidate, p)
            if t < 0 or (t == 0 and (p - current).norm_sq() > (candidate - current).norm_sq()):
                candidate = p
        if candidate == start:
            break
        hull.append(candidate)
        current = candidate
        if len(hull) > len(unique):
            raise DegenerateError("Hull walk did not close; points are not coplanar")

    return Region(tuple(hull), plane)


def _clip_coplanar(subject_poly: PolygonLike, clip_poly: PolygonLike) -> List[Point3]:
    """Sutherland-Hodgman clipping of one polygon by every edge half-plane of another"""
    n = subject_poly.plane.normal
    subject = list(subject_poly.vertices)
    clip = clip_poly.vertices
    k = len(clip)

    for i in range(k):
        a = clip[i]
        edge = clip[(i + 1) % k] - a
        values = [n.dot(edge.cross(p - a)) for p in subject]
        output: List[Point3] = []
        m = len(subject)
        for j in range(m):
            cur, nxt = subject[j], subject[(j + 1) % m]
            vc, vn = values[j], values[(j + 1) % m]
            if vc >= 0:
                output.append(cur)
            if (vc > 0 and vn < 0) or (vc < 0 and vn > 0):
                output.append(cur + (nxt - cur).scaled(vc / (vc - vn)))
        subject = output
        if not subject:
            break
    return subject


def _plane_section(polygon: PolygonLike, plane: Plane) -> List[Point3]:
    """Points of the polygon boundary lying on plane (vertices on it plus edge crossings)"""
    vertices = polygon.vertices
    k = len(vertices)
    points = []
    for i in range(k):
        a, b = vertices[i], vertices[(i + 1) % k]
        if plane.contains(a):
            points.append(a)
        crossing = segment_plane_crossing(a, b, plane)
        if crossing is not None:
            points.append(crossing)
    return points


def convex_polygon_intersection(P: PolygonLike, Q: PolygonLike) -> IntersectionShape:
    """Exact intersection of the two closed convex hulls"""
    if P.plane == Q.plane:
        return planar_convex_hull(_clip_coplanar(P, Q), P.plane)

    direction = P.plane.normal.cross(Q.plane.normal)
    if direction.is_zero():
        return EMPTY  # parallel, distinct planes

    on_p = _plane_section(P, Q.plane)
    on_q = _plane_section(Q, P.plane)
    if not on_p or not on_q:
        return EMPTY

    # both sections lie on the common line; intersect them as intervals along it
    key = direction.dot
    lo = max(min(on_p, key=key), min(on_q, key=key), key=key)
    hi = min(max(on_p, key=key), max(on_q, key=key), key=key)
    if key(lo) > key(hi):
        return EMPTY
    if key(lo) == key(hi):
        return SinglePoint(lo)
    return Segment(lo, hi)
