"""
Generators for the extremal configurations (Christmas tree, prism
quadrilaterals) and for synthetic fat-hexagon families that exercise the
projection pipeline. Every generator is a deterministic function of its
arguments and emits exact rational coordinates.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from geom_kernel import Point3, to_scalar
from models import (
    Family,
    FatnessParams,
    PointSet,
    is_fat_hexagon,
    validate_polygon,
)

logger = logging.getLogger(__name__)

DEFAULT_TRANSLATION = Point3(0, 0, 1)
MAX_SAMPLING_ATTEMPTS = 10_000

# Footprint of every stack hexagon, counter-clockwise: A, B, C, D, E, F.
# B, D, F bulge outward from the near-equilateral triangle A, C, E.
HEXAGON_FOOTPRINT: Tuple[Tuple[Fraction, Fraction], ...] = (
    (Fraction(0), Fraction(0)),
    (Fraction(4), Fraction(-3)),
    (Fraction(8), Fraction(0)),
    (Fraction(17, 2), Fraction(5)),
    (Fraction(4), Fraction(7)),
    (Fraction(-1, 2), Fraction(5)),
)
STACK_SPACING = Fraction(20)

# Signed permutations of the xy-plane selected by seed % 8
_XY_SYMMETRIES = (
    (False, 1, 1), (False, -1, 1), (False, 1, -1), (False, -1, -1),
    (True, 1, 1), (True, -1, 1), (True, 1, -1), (True, -1, -1),
)


class BadTranslationError(ValueError):
    """Prism translation vector lies in the base plane"""


class InfeasibleParamsError(ValueError):
    """The requested construction cannot be built with these parameters"""


@dataclass
class ConstructionParams:
    """Size parameter, seed and optional translation shared by the generators"""
    m: int
    seed: int = 0
    translation: Optional[Point3] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not -(2 ** 63) <= self.seed < 2 ** 64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")


def _circle_point(t: Fraction) -> Point3:
    denom = 1 + t * t
    return Point3((1 - t * t) / denom, 2 * t / denom, 0)


def _angle_key(t: Fraction) -> Tuple[int, Fraction]:
    # t >= 0 maps to angles [0, pi), t < 0 to (pi, 2*pi), both increasing in t
    return (0, t) if t >= 0 else (1, t)


def rational_circle_points(m: int, seed: int = 0) -> List[Point3]:
    """
    m distinct exact points on the unit circle in z = 0, sorted by angle.
    Seed 0 uses t = 0, 1, ..., m-1; other seeds draw small distinct rationals.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    if seed == 0:
        ts = [Fraction(j) for j in range(m)]
    else:
        rng = np.random.default_rng(seed)
        chosen = set()
        bound = 3 * m + 3
        while len(chosen) < m:
            numerator = int(rng.integers(-bound, bound + 1))
            denominator = int(rng.integers(1, m + 2))
            chosen.add(Fraction(numerator, denominator))
        ts = list(chosen)

    ts.sort(key=_angle_key)
    return [_circle_point(t) for t in ts]


def christmas_tree(m: int) -> Family:
    """m circle points, axis points (0,0,0)..(0,0,m), and m^2 triangles"""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    circle = rational_circle_points(m, 0)
    axis = [Point3(0, 0, j) for j in range(m + 1)]
    point_set = PointSet(tuple(circle + axis))

    triangles = [
        (i, m + j, m + j + 1)
        for i in range(m)
        for j in range(m)
    ]
    family = Family.from_index_lists(point_set, triangles, uniform_k=3)
    logger.info(f"Built Christmas tree with m={m}: {len(point_set)} points, {len(family)} triangles")
    return family


def _random_rational(rng: np.random.Generator, bound: int) -> Fraction:
    return Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 4)))


def _collinear_xy(a: Point3, b: Point3, c: Point3) -> bool:
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) == 0


def general_position_points(m: int, seed: int) -> List[Point3]:
    """
    m points on z = 0, no three collinear. Seed 0 uses the parabola points
    (j, j^2, 0); other seeds are rejection-sampled.
    """
    if seed == 0:
        return [Point3(j, j * j, 0) for j in range(m)]

    rng = np.random.default_rng(seed)
    bound = 4 * m
    points: List[Point3] = []
    attempts = 0
    while len(points) < m:
        attempts += 1
        if attempts > MAX_SAMPLING_ATTEMPTS:
            raise InfeasibleParamsError(f"Could not place {m} points in general position after {attempts} draws")
        candidate = Point3(_random_rational(rng, bound), _random_rational(rng, bound), 0)
        if candidate in points:
            continue
        if any(_collinear_xy(points[i], points[j], candidate)
               for i in range(len(points)) for j in range(i + 1, len(points))):
            continue
        points.append(candidate)
    logger.debug(f"Sampled {m} general-position points in {attempts} draws")
    return points


def prism_quadrilaterals(m: int, seed: int = 0, v: Optional[Point3] = None) -> Family:
    """C(m,2) parallelograms P_i, P_j, P_j+v, P_i+v over 2m points"""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    v = v or DEFAULT_TRANSLATION
    if v.z == 0:
        raise BadTranslationError(f"Translation {v} is parallel to the base plane z = 0")

    base = general_position_points(m, seed)
    point_set = PointSet(tuple(base + [p + v for p in base]))
    quads = [(i, j, m + j, m + i) for i in range(m) for j in range(i + 1, m)]
    family = Family.from_index_lists(point_set, quads, uniform_k=4)
    logger.info(f"Built prism family with m={m}, seed={seed}: {len(point_set)} points, {len(family)} quadrilaterals")
    return family


class _PointRegistry:
    """Collects points in insertion order and hands out their indices"""

    def __init__(self, transform):
        self.transform = transform
        self.points: List[Point3] = []
        self.index: Dict[Point3, int] = {}

    def add(self, x: Fraction, y: Fraction, z: Fraction) -> int:
        p = self.transform(x, y, z)
        if p not in self.index:
            self.index[p] = len(self.points)
            self.points.append(p)
        return self.index[p]


def _xy_symmetry(seed: int):
    swap, sx, sy = _XY_SYMMETRIES[seed % len(_XY_SYMMETRIES)]

    def transform(x: Fraction, y: Fraction, z: Fraction) -> Point3:
        if swap:
            x, y = y, x
        return Point3(sx * x, sy * y, z)

    return transform


def _footprint_heights(height) -> List[Tuple[Fraction, Fraction, Fraction]]:
    return [(x, y, height(x, y)) for x, y in HEXAGON_FOOTPRINT]


def _add_gadget(registry: _PointRegistry, ox: Fraction, oy: Fraction) -> List[List[int]]:
    """
    Three hexagons over one footprint. H1 lies in z = 0, H2 shares A with
    H1 and is tilted so the two planes meet along a ray into both
    interiors, H3 uses H2's C and H1's E and sits above both elsewhere.
    Their diagonal triangles close up into the rainbow triangle A, C2, E1.
    """
    def h1(x, y):
        return Fraction(0)

    def h2(x, y):
        return (3 * x - 4 * y) / 240

    def h3(x, y):
        return (7 - y) / 70

    def put(x, y, z):
        return registry.add(x + ox, y + oy, z)

    flat, tilted, raised = (_footprint_heights(h) for h in (h1, h2, h3))

    # A-type vertices first so each hexagon's A has its smallest A/C/E index
    a = put(*flat[0])
    a3 = put(*raised[0])
    c1, e1 = put(*flat[2]), put(*flat[4])
    c2, e2 = put(*tilted[2]), put(*tilted[4])

    hexagons = []
    for corners, (va, vc, ve) in ((flat, (a, c1, e1)), (tilted, (a, c2, e2)), (raised, (a3, c2, e1))):
        vb, vd, vf = (put(*corners[i]) for i in (1, 3, 5))
        hexagons.append([va, vb, vc, vd, ve, vf])
    return hexagons


def _add_flat_hexagon(registry: _PointRegistry, ox: Fraction, oy: Fraction) -> List[int]:
    return [registry.add(x + ox, y + oy, Fraction(0)) for x, y in HEXAGON_FOOTPRINT]


def fat_hexagon_stack(count: int, params: FatnessParams, seed: int = 0, disjoint: bool = False) -> Family:
    """
    count fat hexagons. The default variant groups them in three-hexagon
    gadgets whose diagonal triangles form a rainbow triangle and whose
    first two members intersect badly; leftovers are flat copies of the
    footprint. disjoint=True places count flat copies side by side
    (no shared points, no bad pairs).
    """
    if count < 3:
        raise InfeasibleParamsError(f"A hexagon stack needs count >= 3, got {count}")

    registry = _PointRegistry(_xy_symmetry(seed))
    index_lists: List[List[int]] = []

    if disjoint:
        for i in range(count):
            index_lists.append(_add_flat_hexagon(registry, STACK_SPACING * i, Fraction(0)))
    else:
        gadgets, leftovers = divmod(count, 3)
        for g in range(gadgets):
            index_lists.extend(_add_gadget(registry, STACK_SPACING * g, Fraction(0)))
        for s in range(leftovers):
            index_lists.append(_add_flat_hexagon(registry, STACK_SPACING * (gadgets + s), Fraction(0)))

    point_set = PointSet(tuple(registry.points))
    family = Family.from_index_lists(point_set, index_lists, uniform_k=6)

    for position, hexagon in enumerate(family.polygons):
        report = is_fat_hexagon(hexagon, params)
        if not report.is_fat:
            raise InfeasibleParamsError(
                f"Stack hexagon {position} is not fat for c^2={params.c_sq}, cos_alpha={params.cos_alpha}: "
                f"{report.failing_condition}"
            )
        if report.fat_triples != ((1, 3, 5),):
            raise InfeasibleParamsError(
                f"cos_alpha={params.cos_alpha} also makes the A, C, E triple of hexagon {position} fat; "
                f"the labeling would be ambiguous"
            )

    logger.info(f"Built hexagon stack: {count} hexagons on {len(point_set)} points "
                f"({'disjoint' if disjoint else 'rainbow gadgets'}, seed={seed})")
    return family


def drop_one_vertex(family: Family, seed: int = 0) -> Family:
    """Replace each k-gon (k >= 4) by the (k-1)-gon left after deleting a seeded-random vertex"""
    rng = np.random.default_rng(seed)
    seen = set()
    index_lists = []
    for position, polygon in enumerate(family.polygons):
        if polygon.k < 4:
            raise ValueError(f"Polygon {position} is a triangle; cannot drop a vertex")
        drop = int(rng.integers(polygon.k))
        indices = [v for i, v in enumerate(polygon.vertex_indices) if i != drop]
        reduced = validate_polygon(family.point_set, indices)
        key = reduced.canonical_key()
        if key in seen:
            logger.debug(f"Skipping duplicate reduced polygon {list(key)} from polygon {position}")
            continue
        seen.add(key)
        index_lists.append(reduced.vertex_indices)

    uniform_k = family.uniform_k - 1 if family.uniform_k else None
    return Family.from_index_lists(family.point_set, index_lists, uniform_k)


def bad_pair_example() -> Family:
    """Two triangles sharing a vertex where the second plane slices the first triangle"""
    point_set = PointSet.from_coordinates([(0, 0, 0), (2, 0, 0), (0, 2, 0), (2, 2, -1), (2, 2, 1)])
    return Family.from_index_lists(point_set, [(0, 1, 2), (0, 3, 4)], uniform_k=3)


def almost_disjoint_example() -> Family:
    """Two triangles meeting only in their common vertex"""
    point_set = PointSet.from_coordinates([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)])
    return Family.from_index_lists(point_set, [(0, 1, 2), (0, 3, 4)], uniform_k=3)


def parse_vector(text: str) -> Point3:
    """'x,y,z' with rational components"""
    parts = [part for part in text.replace(" ", "").split(",") if part]
    if len(parts) != 3:
        raise ValueError(f"Expected three comma-separated components, got {text!r}")
    return Point3.of(*(to_scalar(p) for p in parts))
