"""
Reference intersection of two convex polygons in 3-space, computed without
the geometry kernel.

P ∩ Q is the image of the polytope
    { (lam, mu) >= 0 : sum lam_i p_i = sum mu_j q_j, sum lam = 1, sum mu = 1 }
under (lam, mu) -> sum lam_i p_i. Its vertices are the basic feasible
solutions, so enumerating small supports, solving each one exactly and
keeping the non-negative unique solutions yields a point set whose hull
is the intersection. For polygons in different planes that hull lies on a
line and is reported as empty, a point or a segment; coplanar polygons may
also meet in a region, reported by its extreme points.
"""

from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

Coord = Tuple[Fraction, Fraction, Fraction]


def _solve(columns: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    """Unique solution of the len(rhs) x len(columns) system, or None"""
    width, rows = len(columns), len(rhs)
    matrix = [[columns[c][r] for c in range(width)] + [rhs[r]] for r in range(rows)]
    row = 0
    for col in range(width):
        pivot = next((r for r in range(row, rows) if matrix[r][col] != 0), None)
        if pivot is None:
            return None
        matrix[row], matrix[pivot] = matrix[pivot], matrix[row]
        lead = matrix[row][col]
        matrix[row] = [v / lead for v in matrix[row]]
        for r in range(rows):
            if r != row and matrix[r][col] != 0:
                factor = matrix[r][col]
                matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[row])]
        row += 1

    # inconsistent leftover equations
    if any(matrix[r][width] != 0 for r in range(row, rows)):
        return None
    return [matrix[i][width] for i in range(width)]


def _column(point: Coord, sign: int, first: bool) -> List[Fraction]:
    return [sign * point[0], sign * point[1], sign * point[2], Fraction(int(first)), Fraction(int(not first))]


def intersection_points(P: Sequence[Coord], Q: Sequence[Coord]) -> List[Coord]:
    """Images of every basic feasible solution"""
    rhs = [Fraction(0), Fraction(0), Fraction(0), Fraction(1), Fraction(1)]
    found = set()
    for size_a in range(1, 4):
        for size_b in range(1, 4):
            if size_a + size_b > len(rhs):
                continue
            for a in combinations(range(len(P)), size_a):
                for b in combinations(range(len(Q)), size_b):
                    columns = [_column(P[i], 1, True) for i in a] + [_column(Q[j], -1, False) for j in b]
                    solution = _solve(columns, rhs)
                    if solution is None or any(v < 0 for v in solution):
                        continue
                    lam = solution[:size_a]
                    found.add(tuple(sum(weight * P[i][axis] for weight, i in zip(lam, a)) for axis in range(3)))
    return sorted(found)


def _sub(a: Coord, b: Coord) -> Coord:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(u: Coord, v: Coord) -> Coord:
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _dot(u: Coord, v: Coord) -> Fraction:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _normal(points: Sequence[Coord]) -> Optional[Coord]:
    """Normal of the plane through points, None when they are collinear"""
    origin = points[0]
    far = points[-1]
    for p in points[1:-1]:
        n = _cross(_sub(far, origin), _sub(p, origin))
        if any(n):
            return n
    return None


def _hull_vertices(points: Sequence[Coord], normal: Coord) -> List[Coord]:
    """Extreme points of coplanar points, by monotone chain in the plane dropped along the largest normal axis"""
    drop = max(range(3), key=lambda axis: abs(normal[axis]))
    keep = [axis for axis in range(3) if axis != drop]
    flat = {(p[keep[0]], p[keep[1]]): p for p in points}
    ordered = sorted(flat)

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def chain(sequence):
        kept = []
        for p in sequence:
            while len(kept) >= 2 and turn(kept[-2], kept[-1], p) <= 0:
                kept.pop()
            kept.append(p)
        return kept[:-1]

    return [flat[p] for p in chain(ordered) + chain(reversed(ordered))]


def intersection_shape(P: Sequence[Coord], Q: Sequence[Coord]) -> Tuple:
    """('empty',), ('point', p), ('segment', lo, hi) or ('region', frozenset of vertices)"""
    points = intersection_points(P, Q)
    if not points:
        return ("empty",)
    if len(points) == 1:
        return ("point", points[0])
    normal = _normal(points)
    if normal is None:
        # collinear points: lexicographic order runs along the line
        return ("segment", points[0], points[-1])
    return ("region", frozenset(_hull_vertices(points, normal)))


def in_relative_interior(x: Coord, polygon: Sequence[Coord]) -> bool:
    """x lies in the plane of the convex polygon and strictly inside every edge"""
    normal = _cross(_sub(polygon[1], polygon[0]), _sub(polygon[2], polygon[0]))
    if _dot(normal, _sub(x, polygon[0])) != 0:
        return False
    sides = set()
    for a, b in zip(polygon, list(polygon[1:]) + [polygon[0]]):
        side = _dot(normal, _cross(_sub(b, a), _sub(x, a)))
        sides.add((side > 0) - (side < 0))
    return sides in ({1}, {-1})


def intersects_badly(P: Sequence[Coord], Q: Sequence[Coord]) -> bool:
    """A shared vertex plus a common point inside the relative interior of P or Q"""
    if not set(P) & set(Q):
        return False
    shape = intersection_shape(P, Q)
    if shape[0] == "empty":
        return False
    if shape[0] == "point":
        candidates = [shape[1]]
    elif shape[0] == "segment":
        lo, hi = shape[1], shape[2]
        candidates = [lo, hi, tuple((a + b) / 2 for a, b in zip(lo, hi))]
    else:
        vertices = list(shape[1])
        candidates = [tuple(sum(v[axis] for v in vertices) / len(vertices) for axis in range(3))]
    return any(in_relative_interior(x, P) or in_relative_interior(x, Q) for x in candidates)
