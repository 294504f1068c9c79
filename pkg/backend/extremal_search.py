"""
Exhaustive search for the largest family of convex k-gons on a small point
set that is pairwise compatible under one of the three relations, plus
checks of the search results against the known upper bounds.
"""

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

from classify import Relation, classify_pair, relation_holds
from config import config
from geom_kernel import DegenerateError, NotCoplanarError, Region, format_scalar, planar_convex_hull, supporting_plane
from models import ConvexPlanarPolygon, Family, PointSet, validate_polygon

logger = logging.getLogger(__name__)


class PointSetTooLargeError(ValueError):
    pass


class BoundViolationError(ValueError):
    def __init__(self, message: str, report: "BoundReport"):
        super().__init__(message)
        self.report = report


class BudgetExceededError(RuntimeError):
    """The search ran out of nodes or time; best_result holds the best family found so far"""

    def __init__(self, message: str, best_result: "SearchResult"):
        super().__init__(message)
        self.best_result = best_result


@dataclass
class SearchProblem:
    point_set: PointSet
    k: int
    relation: Relation
    node_budget: Optional[int] = None
    time_budget_seconds: Optional[float] = None
    max_points: Optional[int] = None

    def __post_init__(self):
        limits = config.get_search_config()
        if self.k < 3:
            raise ValueError(f"k must be >= 3, got {self.k}")
        if self.node_budget is None:
            self.node_budget = limits.node_budget
        if self.time_budget_seconds is None:
            self.time_budget_seconds = limits.time_budget_seconds
        if self.max_points is None:
            self.max_points = limits.max_points
        if self.node_budget < 0 or self.time_budget_seconds < 0:
            raise ValueError(f"Search budgets must be non-negative, got {self.node_budget} nodes "
                             f"and {self.time_budget_seconds}s")
        if len(self.point_set) > self.max_points:
            raise PointSetTooLargeError(
                f"Exhaustive search is limited to {self.max_points} points, got {len(self.point_set)}"
            )


@dataclass
class SearchResult:
    relation: Relation
    k: int
    n: int
    max_size: int
    witness_family: Family
    candidates: int
    nodes_explored: int
    exhausted: bool
    elapsed_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation.value,
            "k": self.k,
            "points": self.n,
            "max_size": self.max_size,
            "candidates": self.candidates,
            "nodes_explored": self.nodes_explored,
            "exhausted": self.exhausted,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "witness": [list(p.vertex_indices) for p in self.witness_family.polygons],
            "provenance": "exhaustive search" if self.exhausted else "partial search, max_size is a lower bound",
        }


def enumerate_candidate_kgons(point_set: PointSet, k: int) -> List[ConvexPlanarPolygon]:
    """
    Every k-subset of coplanar points in strictly convex position, once,
    as a counter-clockwise polygon. Order follows the sorted index subsets.
    """
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")

    candidates = []
    for subset in combinations(range(len(point_set)), k):
        points = [point_set[i] for i in subset]
        try:
            plane = supporting_plane(points)
        except (DegenerateError, NotCoplanarError):
            continue
        hull = planar_convex_hull(points, plane)
        if not isinstance(hull, Region) or len(hull.vertices) != k:
            continue
        index_of = {point_set[i]: i for i in subset}
        candidates.append(validate_polygon(point_set, [index_of[v] for v in hull.vertices]))

    logger.info(f"{len(candidates)} candidate {k}-gons on {len(point_set)} points")
    return candidates


def compatibility_graph(candidates: Sequence[ConvexPlanarPolygon], relation: Relation) -> nx.Graph:
    """Nodes are candidate positions; an edge joins every compatible pair"""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(candidates)))
    for i, j in combinations(range(len(candidates)), 2):
        if relation_holds(classify_pair(candidates[i], candidates[j]), relation):
            graph.add_edge(i, j)
    return graph


class _BudgetExhausted(Exception):
    pass


class _CliqueSearch:
    """
    Branch and bound for the lexicographically least maximum clique.
    Branches follow increasing node order; a greedy colouring of the
    remaining candidates (taken in degeneracy order) bounds the gain.
    """

    def __init__(self, graph: nx.Graph, node_budget: int, deadline: float):
        self.adjacency: Dict[int, Set[int]] = {v: set(graph.adj[v]) for v in graph.nodes}
        cores = nx.core_number(graph) if graph.number_of_nodes() else {}
        self.colour_rank = {v: r for r, v in enumerate(sorted(graph.nodes, key=lambda v: (-cores[v], v)))}
        self.node_budget = node_budget
        self.deadline = deadline
        self.best: Tuple[int, ...] = ()
        self.nodes = 0

    def run(self) -> bool:
        """True when the search space was exhausted"""
        try:
            self._expand((), sorted(self.adjacency))
        except _BudgetExhausted:
            return False
        return True

    def _colour_bound(self, candidates: List[int]) -> int:
        classes: List[List[int]] = []
        for v in sorted(candidates, key=self.colour_rank.__getitem__):
            neighbours = self.adjacency[v]
            for members in classes:
                if not any(u in neighbours for u in members):
                    members.append(v)
                    break
            else:
                classes.append([v])
        return len(classes)

    def _expand(self, current: Tuple[int, ...], candidates: List[int]):
        self.nodes += 1
        if self.nodes > self.node_budget or time.monotonic() > self.deadline:
            raise _BudgetExhausted()
        if len(current) > len(self.best):
            self.best = current
        if not candidates:
            return
        if len(current) + self._colour_bound(candidates) <= len(self.best):
            return

        for position, v in enumerate(candidates):
            rest = candidates[position + 1:]
            if len(current) + 1 + len(rest) <= len(self.best):
                break
            neighbours = self.adjacency[v]
            self._expand(current + (v,), [u for u in rest if u in neighbours])


def max_family(problem: SearchProblem) -> SearchResult:
    """
    Largest compatible family of candidate k-gons, and the lexicographically
    least one among those (by sorted candidate positions).
    Raises BudgetExceededError carrying the best family found so far.
    """
    started = time.monotonic()
    candidates = enumerate_candidate_kgons(problem.point_set, problem.k)
    graph = compatibility_graph(candidates, problem.relation)
    logger.info(f"Compatibility graph under {problem.relation.value}: "
                f"{graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges")

    search = _CliqueSearch(graph, problem.node_budget, started + problem.time_budget_seconds)
    exhausted = search.run()
    witness = Family(problem.point_set, tuple(candidates[i] for i in search.best), problem.k)
    result = SearchResult(
        relation=problem.relation,
        k=problem.k,
        n=len(problem.point_set),
        max_size=len(search.best),
        witness_family=witness,
        candidates=len(candidates),
        nodes_explored=search.nodes,
        exhausted=exhausted,
        elapsed_seconds=time.monotonic() - started,
    )
    if not exhausted:
        raise BudgetExceededError(
            f"Search stopped after {search.nodes} nodes ({result.elapsed_seconds:.1f}s); "
            f"best family so far has {result.max_size} polygons",
            result,
        )
    logger.info(f"Maximum family has {result.max_size} polygons ({search.nodes} nodes explored)")
    return result


@dataclass
class BoundCheck:
    name: str
    bound: Fraction
    value: int
    strict: bool = False

    @property
    def holds(self) -> bool:
        return self.value < self.bound if self.strict else self.value <= self.bound

    @property
    def slack(self) -> Fraction:
        return self.bound - self.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "bound": format_scalar(self.bound),
            "value": self.value,
            "strict": self.strict,
            "holds": self.holds,
            "slack": format_scalar(self.slack),
        }


@dataclass
class BoundReport:
    relation: Relation
    k: int
    n: int
    exhausted: bool
    checks: List[BoundCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(check.holds for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation.value,
            "k": self.k,
            "points": self.n,
            "exhausted": self.exhausted,
            "checks": [check.to_dict() for check in self.checks],
        }


def upper_bounds(relation: Relation, n: int, k: int) -> List[BoundCheck]:
    """Known upper bounds on the family size, with value left at 0"""
    checks = []
    if relation == Relation.ALMOST_DISJOINT:
        checks.append(BoundCheck("almost-disjoint: n(n-1)/6", Fraction(n * (n - 1), 6), 0))
    elif relation == Relation.VERTEX_OR_EDGE:
        if n >= 4:
            name = "vertex-or-edge: n(n-3)" if k == 3 else "vertex-or-edge: n(n-3) via vertex deletion"
            checks.append(BoundCheck(name, Fraction(n * (n - 3)), 0))
    else:
        checks.append(BoundCheck("no-bad: n^2", Fraction(n * n), 0, strict=True))
        if k >= 4:
            # each k-gon owns k(k-3)/2 diagonals and no two members share one
            checks.append(BoundCheck("no-bad: diagonal count", Fraction(comb(n, 2) * 2, k * (k - 3)), 0))
    return checks


def check_paper_bounds(result: SearchResult) -> BoundReport:
    """Compare a search result with the upper bounds for its relation; raise on violation"""
    report = BoundReport(result.relation, result.k, result.n, result.exhausted)
    for check in upper_bounds(result.relation, result.n, result.k):
        check.value = result.max_size
        report.checks.append(check)

    if not report.ok:
        failed = [c.name for c in report.checks if not c.holds]
        raise BoundViolationError(f"Family of {result.max_size} polygons violates {', '.join(failed)}", report)
    if not result.exhausted:
        logger.warning("Bounds checked against a non-exhaustive search; the value is only a lower bound")
    return report


@dataclass
class IncidenceReport:
    relation: Relation
    incidences: List[int]
    bound: Optional[int]

    @property
    def max_incidence(self) -> int:
        return max(self.incidences, default=0)

    @property
    def holds(self) -> bool:
        return self.bound is None or self.max_incidence <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation.value,
            "max_incidence": self.max_incidence,
            "bound": self.bound,
            "holds": self.holds,
        }


def point_incidence_bounds(family: Family, relation: Relation) -> IncidenceReport:
    """
    Triangles through one point: at most floor((n-1)/2) when almost
    disjoint, at most 3(n-1)-6 under vertex-or-edge compatibility (the
    link of the point is planar). No per-point bound for no-bad families.
    """
    if any(polygon.k != 3 for polygon in family.polygons):
        raise ValueError("Point incidence bounds apply to triangle families")
    n = len(family.point_set)
    bound = None
    if relation == Relation.ALMOST_DISJOINT:
        bound = (n - 1) // 2
    elif relation == Relation.VERTEX_OR_EDGE and n >= 4:
        bound = 3 * (n - 1) - 6
    return IncidenceReport(relation, family.point_incidences(), bound)


def link_graph(family: Family, point: int) -> nx.Graph:
    """Graph on the other points with an edge uv for every triangle (point, u, v)"""
    graph = nx.Graph()
    for polygon in family.polygons:
        if polygon.k != 3 or point not in polygon.vertex_indices:
            continue
        u, v = (i for i in polygon.vertex_indices if i != point)
        graph.add_edge(u, v)
    return graph


def link_planarity(family: Family) -> Dict[int, bool]:
    """Planarity of each nonempty link graph"""
    result = {}
    for point in range(len(family.point_set)):
        graph = link_graph(family, point)
        if graph.number_of_edges():
            planar, _ = nx.check_planarity(graph)
            result[point] = planar
    return result
