"""Coverage partition, the induced edge-labelled digraph, and its dimension.

The hull images cut the attractor along finitely many exact points into
closed cells; each cell is carried onto a window of cells by one inverse
map, so the cells obey a graph-directed structure. The attractor dimension
is then the unique exponent where the ratio-weighted spectral radius of the
edge matrix crosses one. Removing the cells where two neighbour images
exchange codings gives the subsystem bounding the single-coding set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import AffineMap, Interval, format_rational
from .scc import strongly_connected_components
from .system import Ifs, ValidationReport

__all__ = [
    "CoverViolationError",
    "DimensionResult",
    "EmptyReducedSystemError",
    "GraphDirectedSystem",
    "NonConvergenceError",
    "Partition",
    "PartitionInvariantError",
    "Vertex",
    "build_graph",
    "build_partition",
    "reduced_system",
    "solve_dimension",
    "spectral_radius",
    "strongly_connected",
    "to_dot",
]

POWER_ITERATION_CAP = 10**6


class PartitionInvariantError(RuntimeError):
    """The cut-point set misses its expected size or preimage closure."""


class CoverViolationError(RuntimeError):
    """The admissible cells fail to tile the union of hull images."""


class EmptyReducedSystemError(ValueError):
    """Removing the switch cells deleted every vertex."""


class NonConvergenceError(RuntimeError):
    """An iterative solve ran past its cap without converging."""


@dataclass(frozen=True)
class Partition:
    """Sorted cut points with the admissible consecutive pairs.

    Pair i (1-based) is the interval [points[i-1], points[i]]. ``cover``
    maps each admissible pair index to the smallest digit whose hull image
    contains the whole pair.
    """

    points: tuple[Fraction, ...]
    admissible: tuple[int, ...]
    cover: dict[int, int]

    @property
    def gamma(self) -> int:
        return len(self.points)

    def pair_interval(self, i: int) -> Interval:
        return Interval(self.points[i - 1], self.points[i])

    def gap_pairs(self) -> tuple[int, ...]:
        admissible = set(self.admissible)
        return tuple(i for i in range(1, self.gamma) if i not in admissible)


def build_partition(ifs: Ifs, report: ValidationReport) -> Partition:
    """Cut points of a validated member system.

    The set consists of all hull-image endpoints plus the two overlap tails:
    the forward orbit of the right hull endpoint under the first map (up to
    the maximal left tail length) and of the left hull endpoint under the
    last map (up to the maximal right tail length). The expected count and
    the preimage closure of admissible pairs are hard checks.
    """
    if not report.member:
        raise ValueError("partition is only defined for members")
    assert report.u_max is not None and report.v_max is not None
    a, b = ifs.hull.lo, ifs.hull.hi
    first, last = ifs.maps[0], ifs.maps[-1]

    points: set[Fraction] = set()
    for d in range(1, ifs.m + 1):
        piece = ifs.piece(d)
        points.add(piece.lo)
        points.add(piece.hi)
    t = b
    for _ in range(report.v_max):
        t = first(t)
        points.add(t)
    t = a
    for _ in range(report.u_max):
        t = last(t)
        points.add(t)

    ordered = tuple(sorted(points))
    expected = 2 * ifs.m + report.u_max + report.v_max - 2
    if len(ordered) != expected:
        raise PartitionInvariantError(
            f"expected {expected} cut points, deduplication left {len(ordered)}"
        )

    admissible: list[int] = []
    cover: dict[int, int] = {}
    for i in range(1, len(ordered)):
        cell = Interval(ordered[i - 1], ordered[i])
        for d in range(1, ifs.m + 1):
            if ifs.piece(d).contains_interval(cell):
                admissible.append(i)
                cover[i] = d
                break

    point_set = set(ordered)
    for i in admissible:
        g = ifs.map(cover[i])
        for endpoint in (ordered[i - 1], ordered[i]):
            pre = g.invert(endpoint)
            if pre not in point_set:
                raise PartitionInvariantError(
                    f"preimage {format_rational(pre)} of cut point "
                    f"{format_rational(endpoint)} under map {cover[i]} is not a cut point"
                )

    return Partition(points=ordered, admissible=tuple(admissible), cover=cover)


@dataclass(frozen=True)
class Vertex:
    """One admissible cell together with the map that expands it."""

    pair_index: int
    cell: Interval
    digit: int
    ratio: Fraction


@dataclass(frozen=True)
class GraphDirectedSystem:
    """Vertices (admissible cells) and 0/1 edge counts between them.

    counts[p][q] = 1 when expanding vertex p's cell by its covering map's
    inverse yields a window containing vertex q's cell.
    """

    vertices: tuple[Vertex, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def edge_count(self) -> int:
        return sum(sum(row) for row in self.counts)


def _merged(intervals: Sequence[Interval]) -> list[Interval]:
    """Union of closed intervals as a sorted list of maximal pieces."""
    pieces = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    out: list[Interval] = []
    for iv in pieces:
        if out and iv.lo <= out[-1].hi:
            if iv.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return out


def build_graph(ifs: Ifs, part: Partition) -> GraphDirectedSystem:
    """Edge structure over the admissible cells.

    Each vertex p gets an edge to exactly the admissible cells contained in
    the inverse image of p's cell under p's covering map. Two structural
    facts are verified along the way: the admissible cells cover exactly the
    union of the hull images, and no non-admissible gap meets a hull image
    in more than endpoints.
    """
    vertices = tuple(
        Vertex(
            pair_index=i,
            cell=part.pair_interval(i),
            digit=part.cover[i],
            ratio=ifs.map(part.cover[i]).ratio,
        )
        for i in part.admissible
    )

    cell_union = _merged([v.cell for v in vertices])
    piece_union = _merged([ifs.piece(d) for d in range(1, ifs.m + 1)])
    if cell_union != piece_union:
        raise CoverViolationError(
            "admissible cells do not cover the union of hull images: "
            f"{[str(iv) for iv in cell_union]} vs {[str(iv) for iv in piece_union]}"
        )
    for i in part.gap_pairs():
        gap = part.pair_interval(i)
        for d in range(1, ifs.m + 1):
            if ifs.piece(d).interior_overlaps(gap):
                raise CoverViolationError(
                    f"gap {gap} meets the image of map {d} beyond endpoints"
                )

    rows: list[tuple[int, ...]] = []
    for v in vertices:
        g = ifs.map(v.digit)
        window = Interval(g.invert(v.cell.lo), g.invert(v.cell.hi))
        rows.append(tuple(1 if window.contains_interval(w.cell) else 0 for w in vertices))
    return GraphDirectedSystem(vertices=vertices, counts=tuple(rows))


def strongly_connected(gds: GraphDirectedSystem) -> bool:
    """True when every vertex reaches every vertex (one vertex counts)."""
    n = gds.size
    if n == 0:
        return False

    def successors(p: int) -> list[int]:
        return [q for q in range(n) if gds.counts[p][q]]

    return len(strongly_connected_components(range(n), successors)) == 1


def _power_block(block: np.ndarray, tol: float) -> float:
    """Perron value of an irreducible nonnegative block by power iteration.

    Iterates on block + I so bare cycles (periodic supports) cannot make the
    Rayleigh quotient oscillate; the shift adds exactly one to the Perron
    value and is subtracted back.
    """
    n = block.shape[0]
    x = np.ones(n) / math.sqrt(n)
    previous = math.inf
    for _ in range(POWER_ITERATION_CAP):
        y = block @ x + x
        rayleigh = float(x @ y)
        if abs(rayleigh - previous) < tol / 10:
            return rayleigh - 1.0
        previous = rayleigh
        norm = float(np.linalg.norm(y))
        x = y / norm
    raise NonConvergenceError(
        f"power iteration did not converge within {POWER_ITERATION_CAP} steps"
    )


def spectral_radius(matrix, tol: float = 1e-9) -> float:
    """Spectral radius of a nonnegative square matrix.

    Irreducible support converges directly; reducible matrices take the
    maximum over the diagonal blocks given by the strongly connected
    components of the support graph.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if (a < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = a.shape[0]
    if n == 0:
        return 0.0

    def successors(i: int) -> list[int]:
        return [j for j in range(n) if a[i, j] > 0]

    best = 0.0
    for component in strongly_connected_components(range(n), successors):
        if len(component) == 1:
            i = component[0]
            if a[i, i] == 0:
                continue
        idx = np.array(sorted(component))
        best = max(best, _power_block(a[np.ix_(idx, idx)], tol))
    return best


@dataclass(frozen=True)
class DimensionResult:
    """Dimension value with its certified rational bracket.

    The bracket, not the float, is the contract: the weighted spectral
    radius is >= 1 at the lower end and <= 1 at the upper end, and the
    bracket width never exceeds the requested tolerance.
    """

    value: float
    bracket: tuple[Fraction, Fraction]
    iterations: int
    method: str


def _weighted(gds: GraphDirectedSystem, s: float) -> np.ndarray:
    mat = np.array(gds.counts, dtype=float)
    weights = np.array([float(v.ratio) ** s for v in gds.vertices])
    return mat * weights[:, None]


def _radius_at(gds: GraphDirectedSystem, s, tol: float) -> float:
    return spectral_radius(_weighted(gds, float(s)), tol)


def solve_dimension(
    gds: GraphDirectedSystem, tol: float = 1e-9, force_bisection: bool = False
) -> DimensionResult:
    """Solve for the exponent where the weighted spectral radius equals one.

    The radius is strictly decreasing in the exponent (all ratios are below
    one), so bisection brackets the crossing; when every vertex carries the
    same ratio the closed form via the unweighted radius is used instead and
    cross-checked against a direct probe. ``force_bisection`` exists so the
    two routes can be compared on equal-ratio systems.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if gds.size == 0:
        raise ValueError("empty graph-directed system")
    if gds.edge_count() == 0:
        raise ValueError("graph-directed system has no edges")

    ratios = {v.ratio for v in gds.vertices}
    if len(ratios) == 1 and not force_bisection:
        lam = float(next(iter(ratios)))
        rho = spectral_radius(np.array(gds.counts, dtype=float), tol)
        if rho < 1.0:
            # Acyclic counts: no exponent works, the system is dimension zero.
            return DimensionResult(0.0, (Fraction(0), Fraction(0)), 1, "equal-ratio-closed-form")
        value = math.log(rho) / (-math.log(lam))
        probe = _radius_at(gds, value, tol)
        if abs(probe - 1.0) > 1e-6:
            raise NonConvergenceError(
                f"closed form failed its cross-check: radius at {value} is {probe}"
            )
        half = Fraction(tol) / 2
        lo = max(Fraction(0), Fraction(value) - half)
        hi = Fraction(value) + half
        if _radius_at(gds, lo, tol) < 1.0 or _radius_at(gds, hi, tol) > 1.0:
            raise NonConvergenceError("closed-form bracket does not straddle the crossing")
        return DimensionResult(value, (lo, hi), 3, "equal-ratio-closed-form")

    lo = Fraction(0)
    rho_lo = _radius_at(gds, lo, tol)
    if rho_lo < 1.0:
        return DimensionResult(0.0, (Fraction(0), Fraction(0)), 1, "bisection")
    hi = Fraction(1)
    iterations = 1
    while _radius_at(gds, hi, tol) >= 1.0:
        hi *= 2
        iterations += 1
        if hi > 2**60:
            raise NonConvergenceError("no upper bracket found for the dimension exponent")
    rho_hi = _radius_at(gds, hi, tol)
    while hi - lo > Fraction(tol):
        # Strict decrease is the monotonicity contract behind the bisection.
        if not rho_lo > rho_hi - 1e-12:
            raise NonConvergenceError(
                f"weighted radius is not decreasing across the bracket: "
                f"{rho_lo} at {lo} vs {rho_hi} at {hi}"
            )
        mid = (lo + hi) / 2
        rho_mid = _radius_at(gds, mid, tol)
        iterations += 1
        if rho_mid >= 1.0:
            lo, rho_lo = mid, rho_mid
        else:
            hi, rho_hi = mid, rho_mid
    return DimensionResult(float((lo + hi) / 2), (lo, hi), iterations, "bisection")


def reduced_system(ifs: Ifs, part: Partition, gds: GraphDirectedSystem) -> GraphDirectedSystem:
    """Drop the switch cells (the overlaps themselves) and induced edges.

    Every overlapping neighbour pair contributes exactly one cell equal to
    the overlap interval; removing those cells leaves the subsystem whose
    attractor contains every single-coding point.
    """
    switches: list[Interval] = []
    for i in range(1, ifs.m):
        inter = ifs.piece(i).intersect(ifs.piece(i + 1))
        if inter is not None and not inter.is_point:
            switches.append(inter)

    keep: list[int] = []
    matched: set[int] = set()
    for p, vertex in enumerate(gds.vertices):
        hit = next((k for k, sw in enumerate(switches) if sw == vertex.cell), None)
        if hit is None:
            keep.append(p)
        else:
            matched.add(hit)
    if len(matched) != len(switches):
        raise PartitionInvariantError("an overlap interval did not appear as a vertex cell")
    if not keep:
        raise EmptyReducedSystemError("removing the switch cells deleted every vertex")

    vertices = tuple(gds.vertices[p] for p in keep)
    counts = tuple(tuple(gds.counts[p][q] for q in keep) for p in keep)
    return GraphDirectedSystem(vertices=vertices, counts=counts)


def to_dot(gds: GraphDirectedSystem, name: str = "coverage") -> str:
    """Graphviz rendering: cells labelled by exact endpoints, edges by digit."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for p, v in enumerate(gds.vertices):
        label = f"{format_rational(v.cell.lo)}..{format_rational(v.cell.hi)}"
        lines.append(f'  v{p} [label="{label}"];')
    for p, v in enumerate(gds.vertices):
        for q in range(gds.size):
            if gds.counts[p][q]:
                lines.append(f'  v{p} -> v{q} [label="{v.digit}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
