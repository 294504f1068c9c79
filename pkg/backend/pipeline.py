"""
Projection pipeline that searches a family of fat hexagons in 3-space for
a pair that intersects badly.

Stages: choose a generic projection direction, transfer the fatness
parameters to the projected hexagons, label each hexagon A..F, bucket the
hexagons by the inclinations of their three long diagonals, build the
graph of diagonal triangles in the largest bucket, look for a triangle
whose three edges come from three different hexagons, and read the bad
pair off that triangle. Every irrational quantity is handled through
certified intervals; every combinatorial decision is exact.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import floor
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from certified import (
    DEFAULT_MAX_PRECISION_BITS,
    DEFAULT_TOLERANCE,
    CertifiedInterval,
    PrecisionExhaustedError,
    arctan_bounds,
    floor_ratio,
    inclination_bounds,
    pi_bounds,
    tan_phi_bounds,
)
from classify import PairClassification, classify_pair, intersects_badly
from config import PipelineConfig
from geom_kernel import (
    Plane,
    Point3,
    Vector3,
    format_scalar,
    orient3d,
    project_point,
    squared_cosine,
    supporting_plane,
    DegenerateError,
)
from models import (
    ConvexPlanarPolygon,
    Family,
    FatnessParams,
    NotHexagonError,
    PointSet,
    fat_triples,
    is_fat_hexagon,
    validate_polygon,
)

logger = logging.getLogger(__name__)

LABELS = "ABCDEF"
# Long diagonals AC, CE, EA as label positions
DIAGONALS: Tuple[Tuple[int, int], ...] = ((0, 2), (2, 4), (4, 0))
AUTO_PHI_GRID = 10 ** 9
JITTER_RANGE = 8
JITTER_DENOMINATOR = 64


class NoGenericDirectionError(ValueError):
    pass


class DegenerateProjectionError(ValueError):
    """A requested direction is zero or parallel to some polygon plane"""


class ThetaTooLargeError(ValueError):
    pass


class NotFatError(ValueError):
    pass


class PhiTooLargeError(ValueError):
    pass


class SharedDiagonalError(ValueError):
    pass


class NoBadPairFoundError(ValueError):
    def __init__(self, message: str, diagnostics: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


def _canonical_direction(direction: Vector3) -> Vector3:
    # Plane canonicalization gives a primitive integer vector, first nonzero entry positive
    return Plane(direction, 0).normal


def _image_basis(direction: Vector3) -> Tuple[Vector3, Vector3]:
    """b1, b2 spanning the plane normal to direction, with b1 x b2 a positive multiple of direction"""
    components = [abs(c) for c in direction.as_tuple()]
    axis = components.index(min(components))
    e = Point3(*(1 if i == axis else 0 for i in range(3)))
    b1 = e.scaled(direction.norm_sq()) - direction.scaled(direction.dot(e))
    b2 = direction.cross(b1)
    return b1, b2


@dataclass(frozen=True)
class ProjectionSpec:
    """Orthogonal projection along direction onto the plane through the origin normal to it"""
    direction: Vector3
    basis: Tuple[Vector3, Vector3]
    cos_theta_sq: Tuple[Fraction, ...] = ()
    attempts: int = 1
    requested: bool = False

    def __post_init__(self):
        if self.direction.is_zero():
            raise DegenerateProjectionError("Projection direction must be nonzero")
        b1, b2 = self.basis
        if b1.dot(self.direction) != 0 or b2.dot(self.direction) != 0 or b1.dot(b2) != 0:
            raise ValueError("Projection basis must be orthogonal and normal to the direction")
        if b1.cross(b2).dot(self.direction) <= 0:
            raise ValueError("Projection basis must be positively oriented around the direction")

    @classmethod
    def along(cls, direction: Vector3, **kwargs) -> "ProjectionSpec":
        d = _canonical_direction(direction)
        return cls(d, _image_basis(d), **kwargs)

    def project(self, p: Point3) -> Point3:
        return project_point(p, self.direction)

    def image_coordinates(self, p: Point3) -> Tuple[float, float]:
        """Approximate 2D coordinates in the orthonormalized basis, for drawing only"""
        b1, b2 = self.basis
        return (float(p.dot(b1)) / float(b1.norm_sq()) ** 0.5,
                float(p.dot(b2)) / float(b2.norm_sq()) ** 0.5)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction.to_strings(),
            "basis": [b.to_strings() for b in self.basis],
            "attempts": self.attempts,
            "requested": self.requested,
            "min_cos_theta_sq": format_scalar(min(self.cos_theta_sq)) if self.cos_theta_sq else None,
        }


def _genericity_failure(family: Family, direction: Vector3) -> Optional[str]:
    for position, polygon in enumerate(family.polygons):
        if polygon.plane.normal.dot(direction) == 0:
            return f"polygon {position} is parallel to the direction"
    images = {}
    for index, p in enumerate(family.point_set):
        q = project_point(p, direction)
        if q in images:
            return f"points {images[q]} and {index} project to the same point"
        images[q] = index
    return None


def _cos_theta_sq(family: Family, direction: Vector3) -> Tuple[Fraction, ...]:
    return tuple(squared_cosine(polygon.plane.normal, direction).value for polygon in family.polygons)


def _mean_normal(family: Family) -> Vector3:
    total = Point3(0, 0, 0)
    reference = None
    for polygon in family.polygons:
        n = polygon.plane.normal
        n = n.scaled(Fraction(1, max(abs(c) for c in n.as_tuple())))
        if reference is None:
            reference = n
        elif n.dot(reference) < 0:
            n = -n
        total = total + n
    return total if not total.is_zero() else Point3(0, 0, 1)


def projection_for_direction(family: Family, direction: Vector3) -> ProjectionSpec:
    """Projection along a user-supplied direction, rejected if it is not generic"""
    if direction.is_zero():
        raise DegenerateProjectionError("Projection direction must be nonzero")
    d = _canonical_direction(direction)
    failure = _genericity_failure(family, d)
    if failure:
        raise DegenerateProjectionError(f"Direction {direction} is not generic: {failure}")
    return ProjectionSpec(d, _image_basis(d), _cos_theta_sq(family, d), attempts=1, requested=True)


def choose_projection(family: Family, seed: int = 0, max_theta_cos_sq: Fraction = Fraction(0),
                      attempts: int = 10, direction: Optional[Vector3] = None) -> ProjectionSpec:
    """
    Pick a generic direction close to the polygons' mean normal. Candidates
    are the requested direction (if any) and then seeded rational jitters
    of growing size. The first generic candidate with at least three
    polygons (or all of them) inside the theta bound is taken; otherwise
    the generic candidate with the most such polygons.
    """
    if len(family) == 0:
        raise ValueError("Cannot choose a projection for an empty family")

    rng = np.random.default_rng(seed)
    base = _mean_normal(family)
    wanted = min(3, len(family))
    best: Optional[ProjectionSpec] = None
    best_survivors = -1

    def candidates() -> Iterator[Tuple[Vector3, bool]]:
        if direction is not None and not direction.is_zero():
            yield direction, True
        for attempt in range(attempts):
            scale = Fraction(attempt + 1, JITTER_DENOMINATOR)
            jitter = Point3(*(int(v) for v in rng.integers(-JITTER_RANGE, JITTER_RANGE + 1, size=3)))
            yield base + jitter.scaled(scale), False

    for tried, (candidate, requested) in enumerate(candidates(), start=1):
        if candidate.is_zero():
            continue
        d = _canonical_direction(candidate)
        failure = _genericity_failure(family, d)
        if failure:
            if requested:
                logger.warning(f"Requested direction {candidate} is not generic ({failure}); drawing another")
            else:
                logger.debug(f"Rejected direction {d}: {failure}")
            continue

        cos_sq = _cos_theta_sq(family, d)
        survivors = sum(1 for value in cos_sq if value >= max_theta_cos_sq)
        spec = ProjectionSpec(d, _image_basis(d), cos_sq, attempts=tried, requested=requested)
        if survivors >= wanted:
            logger.info(f"Projection direction {d} after {tried} candidate(s), "
                        f"{survivors}/{len(family)} polygons within the theta bound")
            return spec
        if survivors > best_survivors:
            best, best_survivors = spec, survivors

    if best is None:
        raise NoGenericDirectionError(f"No generic projection direction among {attempts} candidates (seed {seed})")
    logger.warning(f"Best generic direction {best.direction} keeps only {best_survivors} polygon(s) "
                   f"within the theta bound")
    return best


@dataclass(frozen=True)
class FatnessTransferResult:
    """Fatness parameters that the projected hexagons are guaranteed to satisfy"""
    cos_theta_sq: Fraction
    c_prime_sq: Fraction
    cos_alpha_prime: Fraction
    tan_phi_bounds: CertifiedInterval

    @property
    def degenerate(self) -> bool:
        """At the domain boundary alpha' is zero and no angle bound remains"""
        return self.cos_alpha_prime == 1

    def params(self) -> FatnessParams:
        if self.degenerate:
            raise ThetaTooLargeError(
                f"cos^2(theta) = {format_scalar(self.cos_theta_sq)} lies on the domain boundary; alpha' is zero"
            )
        return FatnessParams(self.c_prime_sq, self.cos_alpha_prime)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cos_theta_sq": format_scalar(self.cos_theta_sq),
            "c_prime_sq": format_scalar(self.c_prime_sq),
            "cos_alpha_prime": format_scalar(self.cos_alpha_prime),
            "tan_phi": self.tan_phi_bounds.to_dict(),
        }


def theta_domain_boundary(params: FatnessParams) -> Fraction:
    """Smallest cos^2(theta) for which the transfer is defined"""
    return (1 + params.cos_alpha) / 2


def default_theta_floor(params: FatnessParams) -> Fraction:
    """Midway between the domain boundary and 1"""
    return (theta_domain_boundary(params) + 1) / 2


def fatness_transfer(params: FatnessParams, cos_theta_sq: Fraction,
                     tolerance: Fraction = DEFAULT_TOLERANCE,
                     max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> FatnessTransferResult:
    """
    A (c, alpha)-fat hexagon tilted by theta against the projection
    direction projects to a (c', alpha')-fat one with
    c'^2 = c^2 / cos^2(theta) and cos(alpha') = (cos(alpha) + sin^2(theta)) / cos^2(theta).
    """
    cos_theta_sq = Fraction(cos_theta_sq)
    if not 0 < cos_theta_sq <= 1:
        raise ValueError(f"cos^2(theta) must lie in (0, 1], got {cos_theta_sq}")
    if params.cos_alpha > 2 * cos_theta_sq - 1:
        raise ThetaTooLargeError(
            f"cos^2(theta) = {format_scalar(cos_theta_sq)} is below "
            f"{format_scalar(theta_domain_boundary(params))}; the projected angle bound degenerates"
        )

    c_prime_sq = params.c_sq / cos_theta_sq
    cos_alpha_prime = (params.cos_alpha + 1 - cos_theta_sq) / cos_theta_sq
    tan = tan_phi_bounds(c_prime_sq, cos_alpha_prime, tolerance, max_bits)
    return FatnessTransferResult(cos_theta_sq, c_prime_sq, cos_alpha_prime, tan)


def auto_phi(tan_bounds: CertifiedInterval, tolerance: Fraction = DEFAULT_TOLERANCE,
             max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> Fraction:
    """Half of the certified lower bound on arctan(tan_lower), rounded down to a 1e-9 grid"""
    atan = arctan_bounds(tan_bounds.lower, tolerance, max_bits)
    return Fraction(floor(atan.lower / 2 * AUTO_PHI_GRID), AUTO_PHI_GRID)


def validate_phi(phi: Fraction, tan_bounds: CertifiedInterval, tolerance: Fraction = DEFAULT_TOLERANCE,
                 max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> Fraction:
    """phi must be certified strictly below arctan(tan_lower)"""
    phi = Fraction(phi)
    if phi <= 0:
        raise PhiTooLargeError(f"phi must be positive, got {phi}")
    tol = tolerance
    while True:
        try:
            atan = arctan_bounds(tan_bounds.lower, tol, max_bits)
        except PrecisionExhaustedError:
            break
        if phi < atan.lower:
            return phi
        if phi >= atan.upper:
            break
        tol = tol / 2 ** 32
    raise PhiTooLargeError(
        f"phi = {float(phi):.6g} is not certified below arctan({float(tan_bounds.lower):.6g})"
    )


@dataclass(frozen=True)
class LabeledHexagon:
    """Projected hexagon with labels A..F; B, D, F carry the fat angles"""
    source_index: int
    point_indices: Tuple[int, ...]
    vertices: Tuple[Point3, ...]

    def __post_init__(self):
        if len(self.point_indices) != 6 or len(self.vertices) != 6:
            raise ValueError("A labeled hexagon has exactly six vertices")

    def vertex(self, label: str) -> int:
        return self.point_indices[LABELS.index(label)]

    def diagonal_triangle(self) -> Tuple[int, int, int]:
        return (self.point_indices[0], self.point_indices[2], self.point_indices[4])

    def diagonal_edges(self) -> List[Tuple[int, int]]:
        return [tuple(sorted((self.point_indices[i], self.point_indices[j]))) for i, j in DIAGONALS]

    def to_dict(self) -> Dict[str, Any]:
        return {"source": self.source_index, "labels": dict(zip(LABELS, self.point_indices))}


def label_hexagon(projected: ConvexPlanarPolygon, cos_alpha: Fraction, source_index: int = 0) -> LabeledHexagon:
    """
    The fat triple becomes B, D, F. When both alternating triples are fat
    the one containing the smallest point index wins. A is the non-fat
    vertex with the smallest point index, and labels run counter-clockwise.
    """
    if projected.k != 6:
        raise NotHexagonError(f"Only hexagons can be labeled, got a {projected.k}-gon")
    triples = fat_triples(projected, cos_alpha)
    if not triples:
        raise NotFatError(f"Hexagon {source_index} has no fat alternating triple for cos_alpha={cos_alpha}")

    idx = projected.vertex_indices
    fat = min(triples, key=lambda t: min(idx[i] for i in t))
    others = [i for i in range(6) if i not in fat]
    start = min(others, key=lambda i: idx[i])
    order = [(start + r) % 6 for r in range(6)]
    return LabeledHexagon(
        source_index=source_index,
        point_indices=tuple(idx[i] for i in order),
        vertices=tuple(projected.vertices[i] for i in order),
    )


@dataclass
class DiagonalInclination:
    """Certified inclination of one projected diagonal, refinable on demand"""
    u: Fraction
    v: Fraction
    v_scale_sq: Fraction
    interval: CertifiedInterval
    max_bits: int = DEFAULT_MAX_PRECISION_BITS

    def refined(self, tolerance: Fraction) -> CertifiedInterval:
        if self.interval.width <= tolerance:
            return self.interval
        return inclination_bounds(self.u, self.v, self.v_scale_sq, tolerance, self.max_bits)


def diagonal_inclinations(hexagon: LabeledHexagon, projection: ProjectionSpec,
                          tolerance: Fraction = DEFAULT_TOLERANCE,
                          max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> Tuple[DiagonalInclination, ...]:
    """Inclinations in [0, pi) of AC, CE, EA"""
    b1, b2 = projection.basis
    scale = projection.direction.norm_sq()
    result = []
    for i, j in DIAGONALS:
        w = hexagon.vertices[j] - hexagon.vertices[i]
        u, v = w.dot(b1), w.dot(b2)
        result.append(DiagonalInclination(u, v, scale, inclination_bounds(u, v, scale, tolerance, max_bits), max_bits))
    return tuple(result)


@dataclass
class SlopeBucket:
    members: Tuple[int, ...]
    shift: int
    cells: Tuple[int, int, int]
    cell_count: int
    fallbacks: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "members": list(self.members),
            "shift": self.shift,
            "cells": list(self.cells),
            "cell_count": self.cell_count,
            "midpoint_fallbacks": self.fallbacks,
        }


def _cell_count(phi: Fraction, tolerance: Fraction, max_bits: int) -> int:
    """ceil(pi / phi), certified"""
    while True:
        pi = pi_bounds(tolerance, max_bits)
        low, high = -floor(-pi.lower / phi), -floor(-pi.upper / phi)
        if low == high:
            return int(high)
        # pi / phi is never an integer; pi_bounds raises PrecisionExhaustedError at the cap
        tolerance = tolerance / 2 ** 64


def _half_turns(theta: CertifiedInterval, pi: CertifiedInterval) -> CertifiedInterval:
    """Enclosure of theta / pi for theta >= 0"""
    return CertifiedInterval(theta.lower / pi.upper, theta.upper / pi.lower)


class _CellAssigner:
    """
    Maps certified inclinations to one of cell_count equal half-open cells
    tiling [0, pi) periodically; grid s is offset by s / grid_shifts of a cell.
    """

    def __init__(self, phi: Fraction, grid_shifts: int, tolerance: Fraction, max_bits: int):
        self.grid_shifts = grid_shifts
        self.max_bits = max_bits
        self.tolerances = [tolerance, tolerance / 2 ** 64, tolerance / 2 ** 256]
        self.cell_count = _cell_count(phi, tolerance, max_bits)
        self.width = Fraction(1, self.cell_count)
        self._pi: Dict[Fraction, CertifiedInterval] = {}
        self.fallbacks = 0

    def _pi_bounds(self, tolerance: Fraction) -> CertifiedInterval:
        if tolerance not in self._pi:
            self._pi[tolerance] = pi_bounds(tolerance, self.max_bits)
        return self._pi[tolerance]

    def cell(self, inclination: DiagonalInclination, shift: int) -> int:
        offset = self.width * shift / self.grid_shifts
        t = None
        for tolerance in self.tolerances:
            try:
                t = _half_turns(inclination.refined(tolerance), self._pi_bounds(tolerance))
            except PrecisionExhaustedError:
                break
            cell = floor_ratio(CertifiedInterval(t.lower - offset, t.upper - offset), self.width)
            if cell is not None:
                return cell % self.cell_count

        # Still straddling a cell boundary at the precision cap
        self.fallbacks += 1
        if t is None:
            t = _half_turns(inclination.interval, self._pi_bounds(self.tolerances[0]))
        logger.debug(f"Inclination straddles a cell boundary at grid shift {shift}; using its midpoint")
        return floor((t.midpoint - offset) / self.width) % self.cell_count


def bucket_by_slope(inclinations: Sequence[Tuple[DiagonalInclination, ...]], phi: Fraction,
                    grid_shifts: int = 1, tolerance: Fraction = DEFAULT_TOLERANCE,
                    max_bits: int = DEFAULT_MAX_PRECISION_BITS) -> SlopeBucket:
    """
    Partition hexagons (given by position in inclinations) by the cells of
    their three diagonal inclinations. [0, pi) is cut into ceil(pi/phi)
    equal cells, so no cell is wider than phi; with grid_shifts > 1 the
    grid is also tried at offsets of 1/grid_shifts of a cell, and the most
    populated class over all grids is returned.
    Ties go to the class whose member list is lexicographically smallest.
    """
    if not inclinations:
        raise ValueError("Cannot bucket an empty list of hexagons")
    if phi <= 0:
        raise ValueError(f"phi must be positive, got {phi}")
    if grid_shifts < 1:
        raise ValueError(f"grid_shifts must be >= 1, got {grid_shifts}")

    assigner = _CellAssigner(Fraction(phi), grid_shifts, tolerance, max_bits)
    groups: Dict[Tuple[int, Tuple[int, int, int]], List[int]] = defaultdict(list)
    for shift in range(grid_shifts):
        for position, diagonals in enumerate(inclinations):
            cells = tuple(assigner.cell(d, shift) for d in diagonals)
            groups[(shift, cells)].append(position)

    (shift, cells), members = min(groups.items(), key=lambda item: (-len(item[1]), item[1], item[0]))
    logger.info(f"Largest slope bucket holds {len(members)}/{len(inclinations)} hexagons "
                f"(grid shift {shift}, cells {list(cells)})")
    return SlopeBucket(tuple(members), shift, cells, assigner.cell_count, assigner.fallbacks)


@dataclass
class DiagonalTriangleGraph:
    """Union of diagonal triangles; every edge remembers its source hexagon"""
    graph: nx.Graph
    triangles: Dict[int, Tuple[int, int, int]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": self.graph.number_of_nodes(),
            "edges": self.graph.number_of_edges(),
            "sources": sorted(self.triangles),
        }


def build_triangle_graph(hexagons: Sequence[LabeledHexagon]) -> DiagonalTriangleGraph:
    graph = nx.Graph()
    triangles = {}
    for hexagon in hexagons:
        triangles[hexagon.source_index] = hexagon.diagonal_triangle()
        for u, v in hexagon.diagonal_edges():
            if graph.has_edge(u, v):
                other = graph.edges[u, v]["source"]
                raise SharedDiagonalError(
                    f"Hexagons {other} and {hexagon.source_index} share diagonal ({u}, {v})"
                )
            graph.add_edge(u, v, source=hexagon.source_index)
    logger.debug(f"Triangle graph: {graph.number_of_nodes()} vertices, {graph.number_of_edges()} edges")
    return DiagonalTriangleGraph(graph, triangles)


@dataclass(frozen=True)
class RainbowTriangle:
    """Triangle whose three edges come from three different source hexagons"""
    vertices: Tuple[int, int, int]
    edges: Tuple[Tuple[int, int, int], ...]
    source_triangles: Dict[int, Tuple[int, int, int]] = field(default_factory=dict, hash=False, compare=False)

    @property
    def sources(self) -> Tuple[int, ...]:
        return tuple(sorted(source for _, _, source in self.edges))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": list(self.vertices),
            "edges": [{"edge": [u, v], "source": s} for u, v, s in self.edges],
        }


def enumerate_triangles(graph: nx.Graph) -> Iterator[Tuple[int, int, int]]:
    """Triangles as sorted vertex triples, in lexicographic order"""
    for u in sorted(graph.nodes):
        higher = sorted(v for v in graph.adj[u] if v > u)
        for i, v in enumerate(higher):
            for w in higher[i + 1:]:
                if graph.has_edge(v, w):
                    yield (u, v, w)


def find_rainbow_triangle(triangle_graph: DiagonalTriangleGraph) -> Optional[RainbowTriangle]:
    """Lexicographically least rainbow triangle, or None"""
    graph = triangle_graph.graph
    for u, v, w in enumerate_triangles(graph):
        edges = ((u, v), (v, w), (u, w))
        sources = [graph.edges[a, b]["source"] for a, b in edges]
        if len(set(sources)) == 3:
            return RainbowTriangle(
                vertices=(u, v, w),
                edges=tuple((a, b, s) for (a, b), s in zip(edges, sources)),
                source_triangles={s: triangle_graph.triangles[s] for s in sources},
            )
    return None


@dataclass
class BadPairWitness:
    i: int
    j: int
    classification: PairClassification
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": [self.i, self.j],
            "classification": self.classification.to_dict(),
            "diagnostics": self.diagnostics,
        }


def _rainbow_diagnostics(rainbow: RainbowTriangle, family: Family) -> List[Dict[str, Any]]:
    """Where each source triangle sits relative to the rainbow triangle's plane"""
    points = family.point_set
    corners = [points[v] for v in rainbow.vertices]
    try:
        plane = supporting_plane(corners)
    except DegenerateError:
        return [{"note": "rainbow triangle is degenerate in 3-space"}]

    diagnostics = []
    for u, v, source in rainbow.edges:
        triangle = rainbow.source_triangles.get(source)
        if triangle is None:
            diagnostics.append({"source": source, "edge": [u, v], "note": "source triangle unknown"})
            continue
        apex = next(p for p in triangle if p not in (u, v))
        try:
            source_plane = supporting_plane([points[p] for p in triangle])
            cos_sq = format_scalar(squared_cosine(plane.normal, source_plane.normal).value)
        except DegenerateError:
            cos_sq = None
        diagnostics.append({
            "source": source,
            "edge": [u, v],
            "apex": apex,
            "apex_side": orient3d(*corners, points[apex]),
            "plane_cos_sq": cos_sq,
        })
    return diagnostics


def extract_bad_pair(rainbow: RainbowTriangle, family: Family) -> BadPairWitness:
    """
    Classify the three pairs of source hexagons in 3-space and return the
    first pair (in index order) that intersects badly.
    """
    sources = rainbow.sources
    for i, j in combinations(sources, 2):
        cls = classify_pair(family.polygons[i], family.polygons[j])
        if intersects_badly(cls):
            logger.info(f"Hexagons {i} and {j} intersect badly")
            return BadPairWitness(i, j, cls, _rainbow_diagnostics(rainbow, family))

    diagnostics = _rainbow_diagnostics(rainbow, family)
    raise NoBadPairFoundError(
        f"None of the source hexagons {list(sources)} of rainbow triangle {list(rainbow.vertices)} "
        f"intersect badly",
        diagnostics,
    )


class PipelineOutcome(str, Enum):
    WITNESS = "witness"
    CERTIFIED_CLEAN = "certified_clean"
    INCONCLUSIVE = "inconclusive"


class StageStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class StageRecord:
    name: str
    status: StageStatus
    message: str = ""
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "status": self.status.value, "message": self.message, "details": self.details}


@dataclass
class PipelineSettings:
    seed: int = 0
    phi: Optional[Fraction] = None
    projection_attempts: int = 10
    tolerance: Fraction = DEFAULT_TOLERANCE
    max_precision_bits: int = DEFAULT_MAX_PRECISION_BITS
    grid_shifts: int = 4
    theta_cos_sq_floor: Optional[Fraction] = None
    direction: Optional[Vector3] = None

    @classmethod
    def from_config(cls, cfg: PipelineConfig, **overrides) -> "PipelineSettings":
        settings = cls(
            seed=cfg.seed,
            phi=None if cfg.phi == "auto" else Fraction(str(cfg.phi)),
            projection_attempts=cfg.projection_attempts,
            tolerance=cfg.tolerance,
            max_precision_bits=cfg.max_precision_bits,
            grid_shifts=cfg.grid_shifts,
            theta_cos_sq_floor=None if cfg.theta_cos_sq_floor is None else Fraction(str(cfg.theta_cos_sq_floor)),
        )
        for key, value in overrides.items():
            setattr(settings, key, value)
        return settings


@dataclass
class PipelineReport:
    params: FatnessParams
    stages: List[StageRecord] = field(default_factory=list)
    outcome: PipelineOutcome = PipelineOutcome.INCONCLUSIVE
    projection: Optional[ProjectionSpec] = None
    transfer: Optional[FatnessTransferResult] = None
    phi: Optional[Fraction] = None
    labeled: List[LabeledHexagon] = field(default_factory=list)
    bucket: Optional[SlopeBucket] = None
    rainbow: Optional[RainbowTriangle] = None
    witness: Optional[BadPairWitness] = None

    def add(self, name: str, status: StageStatus, message: str = "", **details) -> StageRecord:
        record = StageRecord(name, status, message, details)
        self.stages.append(record)
        log = logger.warning if status == StageStatus.FAILED else logger.info
        log(f"Stage {name}: {status.value}{' - ' + message if message else ''}")
        return record

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((s for s in self.stages if s.name == name), None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "params": self.params.to_dict(),
            "projection": self.projection.to_dict() if self.projection else None,
            "transfer": self.transfer.to_dict() if self.transfer else None,
            "phi": format_scalar(self.phi) if self.phi is not None else None,
            "bucket": self.bucket.to_dict() if self.bucket else None,
            "rainbow": self.rainbow.to_dict() if self.rainbow else None,
            "witness": self.witness.to_dict() if self.witness else None,
            "stages": [s.to_dict() for s in self.stages],
        }


def _project_family(family: Family, projection: ProjectionSpec) -> PointSet:
    return PointSet(tuple(projection.project(p) for p in family.point_set))


def _label_survivors(family: Family, params: FatnessParams, projection: ProjectionSpec, floor_sq: Fraction,
                     settings: PipelineSettings, report: PipelineReport) -> List[LabeledHexagon]:
    projected_points = _project_family(family, projection)
    labeled = []
    excluded = {}
    for position, hexagon in enumerate(family.polygons):
        cos_sq = projection.cos_theta_sq[position]
        if cos_sq < floor_sq:
            excluded[position] = f"cos^2(theta) = {float(cos_sq):.6g} below floor"
            continue
        original = is_fat_hexagon(hexagon, params)
        if not original.is_fat:
            excluded[position] = f"not fat in 3-space: {original.failing_condition}"
            continue
        try:
            transfer = fatness_transfer(params, cos_sq, settings.tolerance, settings.max_precision_bits)
        except ThetaTooLargeError as e:
            excluded[position] = str(e)
            continue
        if transfer.degenerate:
            excluded[position] = "cos^2(theta) on the domain boundary leaves no angle bound"
            continue

        image = validate_polygon(projected_points, hexagon.vertex_indices)
        if not is_fat_hexagon(image, transfer.params()).is_fat:
            excluded[position] = "projection is not fat for the transferred parameters"
            continue
        label = label_hexagon(image, transfer.cos_alpha_prime, position)

        before = {hexagon.vertex_indices[i] for i in (original.fat_vertex_triple or ())}
        after = {label.vertex(name) for name in "BDF"}
        if before != after:
            logger.warning(f"Hexagon {position}: fat triple changed under projection")
        labeled.append(label)

    report.add("fatness_transfer", StageStatus.OK, f"{len(labeled)} of {len(family)} hexagons labeled",
               floor=format_scalar(floor_sq), excluded={str(k): v for k, v in excluded.items()})
    return labeled


def run_pipeline(family: Family, params: FatnessParams, settings: Optional[PipelineSettings] = None) -> PipelineReport:
    """
    Full pipeline. Stage failures are recorded in the report; the only
    exception raised is NotHexagonError for a family that is not all hexagons.
    """
    settings = settings or PipelineSettings()
    if not family.is_hexagon_family():
        raise NotHexagonError("The pipeline requires a family of hexagons")

    report = PipelineReport(params=params)
    logger.info(f"Running pipeline on {len(family)} hexagons (seed {settings.seed})")
    if len(family) == 0:
        report.add("input", StageStatus.FAILED, "empty family")
        return report
    report.add("input", StageStatus.OK, f"{len(family)} hexagons on {len(family.point_set)} points")

    floor_sq = settings.theta_cos_sq_floor
    if floor_sq is None:
        floor_sq = default_theta_floor(params)

    try:
        projection = choose_projection(family, settings.seed, floor_sq, settings.projection_attempts,
                                       settings.direction)
    except NoGenericDirectionError as e:
        report.add("projection", StageStatus.FAILED, str(e))
        return report
    report.projection = projection
    report.add("projection", StageStatus.OK, f"direction {projection.direction}", attempts=projection.attempts)

    labeled = _label_survivors(family, params, projection, floor_sq, settings, report)
    report.labeled = labeled
    if not labeled:
        report.add("phi", StageStatus.SKIPPED, "no hexagon survived the fatness transfer")
        return report

    worst = min(projection.cos_theta_sq[h.source_index] for h in labeled)
    report.transfer = fatness_transfer(params, worst, settings.tolerance, settings.max_precision_bits)

    try:
        if settings.phi is None:
            phi = auto_phi(report.transfer.tan_phi_bounds, settings.tolerance, settings.max_precision_bits)
            if phi <= 0:
                raise PhiTooLargeError("automatic phi rounds to zero")
        else:
            phi = validate_phi(settings.phi, report.transfer.tan_phi_bounds, settings.tolerance,
                               settings.max_precision_bits)
    except (PhiTooLargeError, PrecisionExhaustedError) as e:
        report.add("phi", StageStatus.FAILED, str(e))
        return report
    report.phi = phi
    report.add("phi", StageStatus.OK, f"phi = {float(phi):.9g}", auto=settings.phi is None)

    try:
        inclinations = [diagonal_inclinations(h, projection, settings.tolerance, settings.max_precision_bits)
                        for h in labeled]
        bucket = bucket_by_slope(inclinations, phi, settings.grid_shifts, settings.tolerance,
                                 settings.max_precision_bits)
    except PrecisionExhaustedError as e:
        report.add("bucketing", StageStatus.FAILED, str(e))
        return report
    report.bucket = bucket
    members = [labeled[p] for p in bucket.members]
    report.add("bucketing", StageStatus.OK, f"{len(members)} hexagons in the largest bucket",
               sources=[h.source_index for h in members])

    try:
        graph = build_triangle_graph(members)
    except SharedDiagonalError as e:
        report.add("triangle_graph", StageStatus.FAILED, str(e))
        return report
    report.add("triangle_graph", StageStatus.OK, **graph.to_dict())

    if len(members) < 3:
        report.add("rainbow", StageStatus.FAILED, "fewer than three source hexagons; no rainbow triangle possible")
        return report

    rainbow = find_rainbow_triangle(graph)
    if rainbow is None:
        report.add("rainbow", StageStatus.OK, "no rainbow triangle", found=False)
        report.outcome = PipelineOutcome.CERTIFIED_CLEAN
        return report
    report.rainbow = rainbow
    report.add("rainbow", StageStatus.OK, f"rainbow triangle {list(rainbow.vertices)}", found=True)

    try:
        report.witness = extract_bad_pair(rainbow, family)
    except NoBadPairFoundError as e:
        report.add("extraction", StageStatus.FAILED, str(e), diagnostics=e.diagnostics)
        return report
    report.add("extraction", StageStatus.OK, f"bad pair {report.witness.i}, {report.witness.j}")
    report.outcome = PipelineOutcome.WITNESS
    return report
