"""
Pairwise intersection classification and whole-family verification
under the three compatibility relations (almost disjoint, vertex-or-edge,
no bad intersection).
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from config import config
from geom_kernel import (
    IntersectionShape,
    LocationKind,
    Point3,
    Region,
    Segment,
    ShapeKind,
    SinglePoint,
    convex_polygon_intersection,
    point_polygon_location,
)
from models import ConvexPlanarPolygon, Family

logger = logging.getLogger(__name__)


class SamePolygonError(ValueError):
    """A polygon was classified against itself"""


class Relation(str, Enum):
    """Pairwise compatibility relations, by CLI name"""
    ALMOST_DISJOINT = "almost-disjoint"
    VERTEX_OR_EDGE = "vertex-or-edge"
    NO_BAD = "no-bad"

    @classmethod
    def parse(cls, name: str) -> "Relation":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(r.value for r in cls)
            raise ValueError(f"Unknown relation {name!r}. Must be one of: {valid}")


@dataclass(frozen=True)
class PairClassification:
    shared_vertices: Tuple[int, ...]
    shared_full_edges: int
    shape: IntersectionShape
    interior_contact: bool
    interior_contact_both: bool = False
    shared_edge_list: Tuple[Tuple[int, int], ...] = ()
    shared_vertex_points: Tuple[Point3, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shared_vertices": list(self.shared_vertices),
            "shared_full_edges": self.shared_full_edges,
            "shape": self.shape.to_dict(),
            "interior_contact": self.interior_contact,
            "interior_contact_both": self.interior_contact_both,
        }


@dataclass
class ViolationReport:
    relation: Relation
    violating_pairs: List[Tuple[int, int, PairClassification]] = field(default_factory=list)
    checked_pairs: int = 0

    @property
    def ok(self) -> bool:
        return not self.violating_pairs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation.value,
            "checked_pairs": self.checked_pairs,
            "violations": len(self.violating_pairs),
            "violating_pairs": [
                {"pair": [i, j], "classification": cls.to_dict()} for i, j, cls in self.violating_pairs
            ],
        }


def _contact_candidates(shape: IntersectionShape) -> List[Point3]:
    """Finite set of points that decides whether a convex shape meets a relative interior"""
    if isinstance(shape, SinglePoint):
        return [shape.point]
    if isinstance(shape, Segment):
        return [shape.a, shape.b, shape.midpoint()]
    if isinstance(shape, Region):
        return list(shape.vertices) + [shape.centroid()]
    return []


def _in_relative_interior(p: Point3, polygon: ConvexPlanarPolygon) -> bool:
    return point_polygon_location(p, polygon).kind == LocationKind.RELATIVE_INTERIOR


def shared_diagonals(P: ConvexPlanarPolygon, Q: ConvexPlanarPolygon) -> FrozenSet[Tuple[int, int]]:
    """Index pairs that are diagonals of both polygons"""
    return P.diagonals() & Q.diagonals()


def classify_pair(P: ConvexPlanarPolygon, Q: ConvexPlanarPolygon) -> PairClassification:
    """
    Exact classification of how the hulls of P and Q meet. Both polygons
    carry their resolved vertices, so no separate point set is needed.
    """
    if P.canonical_key() == Q.canonical_key():
        raise SamePolygonError(f"Cannot classify polygon {list(P.vertex_indices)} against itself")

    shared = tuple(sorted(set(P.vertex_indices) & set(Q.vertex_indices)))
    shared_edges = tuple(sorted(P.edges() & Q.edges()))
    shape = convex_polygon_intersection(P, Q)

    candidates = _contact_candidates(shape)
    either = False
    both = False
    for p in candidates:
        in_p = _in_relative_interior(p, P)
        in_q = _in_relative_interior(p, Q)
        either = either or in_p or in_q
        both = both or (in_p and in_q)

    lookup = dict(zip(P.vertex_indices, P.vertices))
    return PairClassification(
        shared_vertices=shared,
        shared_full_edges=len(shared_edges),
        shape=shape,
        interior_contact=either,
        interior_contact_both=both,
        shared_edge_list=shared_edges,
        shared_vertex_points=tuple(lookup[i] for i in shared),
    )


def is_almost_disjoint(cls: PairClassification) -> bool:
    if cls.shape.kind == ShapeKind.EMPTY:
        return True
    if cls.shape.kind == ShapeKind.POINT and len(cls.shared_vertices) == 1:
        return cls.shape.point == cls.shared_vertex_points[0]
    return False


def is_vertex_or_edge_compatible(cls: PairClassification) -> bool:
    if is_almost_disjoint(cls):
        return True
    if cls.shape.kind != ShapeKind.SEGMENT or cls.shared_full_edges < 1:
        return False
    points = dict(zip(cls.shared_vertices, cls.shared_vertex_points))
    for u, v in cls.shared_edge_list:
        if Segment(points[u], points[v]) == cls.shape:
            return True
    return False


def intersects_badly(cls: PairClassification, strict: bool = False) -> bool:
    """strict=True reads 'interior point' as interior to both polygons"""
    contact = cls.interior_contact_both if strict else cls.interior_contact
    return bool(cls.shared_vertices) and contact


def relation_holds(cls: PairClassification, relation: Relation, strict: Optional[bool] = None) -> bool:
    if relation == Relation.ALMOST_DISJOINT:
        return is_almost_disjoint(cls)
    if relation == Relation.VERTEX_OR_EDGE:
        return is_vertex_or_edge_compatible(cls)
    if strict is None:
        strict = config.get_classify_config().interior_mode == "both"
    return not intersects_badly(cls, strict=strict)


def _check_pair(family: Family, i: int, j: int, relation: Relation,
                strict: Optional[bool]) -> Optional[Tuple[int, int, PairClassification]]:
    cls = classify_pair(family.polygons[i], family.polygons[j])
    if relation_holds(cls, relation, strict):
        return None
    return (i, j, cls)


def verify_family(family: Family, relation: Relation, threads: Optional[int] = None,
                  strict: Optional[bool] = None) -> ViolationReport:
    """Classify every unordered pair; violations are sorted by index pair"""
    threads = threads or config.get_thread_count()
    pairs = list(combinations(range(len(family)), 2))
    logger.info(f"Verifying {len(family)} polygons ({len(pairs)} pairs) under {relation.value} "
                f"with {threads} thread(s)")

    violations: List[Tuple[int, int, PairClassification]] = []
    if threads <= 1 or len(pairs) < 2:
        for i, j in pairs:
            result = _check_pair(family, i, j, relation, strict)
            if result is not None:
                violations.append(result)
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(_check_pair, family, i, j, relation, strict) for i, j in pairs]
            for future in as_completed(futures):
                result = future.result()
                if result is not None:
                    violations.append(result)

    violations.sort(key=lambda item: (item[0], item[1]))
    report = ViolationReport(relation=relation, violating_pairs=violations, checked_pairs=len(pairs))
    logger.info(f"Checked {report.checked_pairs} pairs, found {len(violations)} violation(s)")
    return report
