"""Digit codings of points: residual graphs, cardinality, witnesses.

A coding of x is an infinite digit word (d_i) with x = lim f_{d_1..d_n}(0).
For an exact rational x the possible first digits are the maps whose hull
image contains x, and stripping a digit replaces x by the exact inverse
image. Closing that step over all admissible digits yields a finite directed
graph whose infinite paths are exactly the codings of x, which reduces the
counting questions to graph structure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .scc import strongly_connected_components
from .system import Ifs, ValidationReport, end_case

__all__ = [
    "Cardinality",
    "DEFAULT_MAX_DEPTH",
    "DEFAULT_MAX_NODES",
    "PointNotInAttractorError",
    "ResidualGraph",
    "SymbolicPoint",
    "UnreachableTargetError",
    "WitnessRequest",
    "WitnessVerificationError",
    "admissible_digits",
    "build_residual_graph",
    "classify_cardinality",
    "classify_point",
    "enumerate_codings",
    "evaluate",
    "make_witness",
    "symbolic_point",
]

# All constructions used in practice close within tens of nodes; the limits
# only guard adversarial inputs, and hitting one yields an honest "unknown".
DEFAULT_MAX_NODES = 4096
DEFAULT_MAX_DEPTH = 512


class PointNotInAttractorError(ValueError):
    """The queried point carries no infinite digit path at all."""


class UnreachableTargetError(ValueError):
    """No point of the attractor has the requested number of codings."""


class WitnessVerificationError(RuntimeError):
    """A constructed witness failed its classification self-check."""


@dataclass(frozen=True)
class SymbolicPoint:
    """Eventually periodic digit word and the exact point it encodes.

    ``value`` is the preperiod composition applied to the fixed point of the
    period composition.
    """

    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    value: Fraction

    def __str__(self) -> str:
        pre = ",".join(str(d) for d in self.preperiod)
        per = ",".join(str(d) for d in self.period)
        return f"w={pre};p={per}"

    @classmethod
    def parse(cls, text: str, ifs: Ifs) -> SymbolicPoint:
        """Parse the ``w=<digits>;p=<digits>`` form, digits comma-separated."""
        parts = text.strip().split(";")
        if len(parts) != 2 or not parts[0].startswith("w=") or not parts[1].startswith("p="):
            raise ValueError(f"point must look like 'w=1;p=4', got {text!r}")
        try:
            pre = tuple(int(tok) for tok in parts[0][2:].split(",") if tok)
            per = tuple(int(tok) for tok in parts[1][2:].split(",") if tok)
        except ValueError as exc:
            raise ValueError(f"bad digits in point {text!r}") from exc
        return symbolic_point(ifs, pre, per)


def _check_digits(ifs: Ifs, word: Iterable[int]) -> None:
    for d in word:
        if not 1 <= d <= ifs.m:
            raise ValueError(f"digit {d} outside 1..{ifs.m}")


def evaluate(ifs: Ifs, preperiod: Sequence[int], period: Sequence[int]) -> Fraction:
    """Exact value of an eventually periodic digit word.

    The result does not change when the period word is rotated and the
    preperiod extended consistently.
    """
    if not period:
        raise ValueError("period word must be nonempty")
    _check_digits(ifs, preperiod)
    _check_digits(ifs, period)
    x = ifs.compose_word(period).fixed_point()
    for d in reversed(preperiod):
        x = ifs.map(d)(x)
    return x


def symbolic_point(ifs: Ifs, preperiod: Sequence[int], period: Sequence[int]) -> SymbolicPoint:
    value = evaluate(ifs, preperiod, period)
    return SymbolicPoint(tuple(preperiod), tuple(period), value)


def admissible_digits(ifs: Ifs, x: Fraction) -> list[int]:
    """All digits whose hull image contains x (closed membership), ascending."""
    digits = [d for d in range(1, ifs.m + 1) if ifs.piece(d).contains(x)]
    # No point lies in three hull images once next-but-one images are disjoint.
    assert len(digits) <= 2, f"point {x} lies in {len(digits)} images"
    return digits


@dataclass(frozen=True)
class ResidualGraph:
    """Closure of a point under digit-stripping.

    ``adjacency`` maps each explored node to its digit-labelled successors,
    z = inverse image of the node under the digit's map. Nodes that were
    discovered but not expanded (resource limits) are in ``unexpanded``;
    ``exhausted`` is True exactly when that set is empty. Out-degree never
    exceeds two.
    """

    root: Fraction
    adjacency: dict[Fraction, dict[int, Fraction]]
    unexpanded: frozenset[Fraction]
    exhausted: bool
    limit_hit: str | None

    @property
    def nodes(self) -> set[Fraction]:
        return set(self.adjacency) | set(self.unexpanded)

    @property
    def edges(self) -> set[tuple[Fraction, int, Fraction]]:
        return {
            (src, digit, dst)
            for src, out in self.adjacency.items()
            for digit, dst in out.items()
        }


def build_residual_graph(
    ifs: Ifs,
    x: Fraction,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ResidualGraph:
    """Breadth-first closure of x under digit-stripping, deduplicated exactly.

    Dead ends (no admissible digit) stay in the graph; pruning them is the
    classifier's job. Limits never raise, they only mark the graph as not
    exhausted.
    """
    if max_nodes < 1 or max_depth < 1:
        raise ValueError("max_nodes and max_depth must be >= 1")
    if not ifs.hull.contains(x):
        raise PointNotInAttractorError(f"{x} lies outside the hull {ifs.hull}")

    adjacency: dict[Fraction, dict[int, Fraction]] = {}
    depth: dict[Fraction, int] = {x: 0}
    queue: deque[Fraction] = deque([x])
    limit_hit: str | None = None

    while queue:
        y = queue.popleft()
        if depth[y] >= max_depth:
            limit_hit = "max_depth"
            continue
        out: dict[int, Fraction] = {}
        blocked = False
        for d in admissible_digits(ifs, y):
            z = ifs.map(d).invert(y)
            if z not in depth:
                if len(depth) >= max_nodes:
                    limit_hit = "max_nodes"
                    blocked = True
                    break
                depth[z] = depth[y] + 1
                queue.append(z)
            out[d] = z
        if blocked:
            continue
        adjacency[y] = out

    unexpanded = frozenset(depth) - frozenset(adjacency)
    return ResidualGraph(
        root=x,
        adjacency=adjacency,
        unexpanded=unexpanded,
        exhausted=not unexpanded,
        limit_hit=None if not unexpanded else limit_hit,
    )


@dataclass(frozen=True)
class Cardinality:
    """How many codings a point has.

    ``kind`` is one of "finite", "countable", "continuum", "unknown";
    ``count`` is set for finite verdicts and ``limit`` names the resource
    limit behind an unknown verdict.
    """

    kind: str
    count: int | None = None
    limit: str | None = None

    @classmethod
    def finite(cls, k: int) -> Cardinality:
        if k < 1:
            raise ValueError("finite coding count must be >= 1")
        return cls("finite", count=k)

    @classmethod
    def countable(cls) -> Cardinality:
        return cls("countable")

    @classmethod
    def continuum(cls) -> Cardinality:
        return cls("continuum")

    @classmethod
    def unknown(cls, limit: str | None) -> Cardinality:
        return cls("unknown", limit=limit)

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"finite({self.count})"
        if self.kind == "countable":
            return "countably-infinite"
        if self.kind == "unknown":
            return f"unknown({self.limit or 'limit'})"
        return self.kind


def _pruned_alive(adjacency: dict, protected: frozenset) -> set:
    """Nodes surviving iterated removal of dead ends.

    Protected nodes (unexpanded frontier) are never removed: their onward
    edges are unknown, so they cannot be proved dead.
    """
    alive = set(adjacency) | set(protected)
    while True:
        dead = {
            y
            for y in alive
            if y not in protected and not any(z in alive for z in adjacency[y].values())
        }
        if not dead:
            return alive
        alive -= dead


def classify_cardinality(graph: ResidualGraph) -> Cardinality:
    """Classify the number of infinite paths from the root.

    Exhausted graphs are pruned of dead branches, then decided by the cycle
    structure reachable from the root: a cycle with a branch inside it forces
    a continuum of paths, a cycle that can exit toward another cycle gives
    countably many, and otherwise the paths are counted exactly (each walk
    into a terminal cycle contributes the single forever-around tail).
    """
    if not graph.exhausted:
        return Cardinality.unknown(graph.limit_hit)
    adjacency = graph.adjacency
    alive = _pruned_alive(adjacency, frozenset())
    if graph.root not in alive:
        raise PointNotInAttractorError(
            f"{graph.root} has no infinite digit path; it is not an attractor point"
        )

    # Restrict to what the root can reach.
    reach: set[Fraction] = set()
    stack = [graph.root]
    while stack:
        y = stack.pop()
        if y in reach:
            continue
        reach.add(y)
        stack.extend(z for z in adjacency[y].values() if z in alive and z not in reach)

    def successors(y: Fraction) -> list[Fraction]:
        return [z for z in adjacency[y].values() if z in reach]

    components = strongly_connected_components(sorted(reach), successors)
    comp_of = {node: i for i, comp in enumerate(components) for node in comp}
    cyclic = {
        i
        for i, comp in enumerate(components)
        if len(comp) > 1 or any(z == comp[0] for z in adjacency[comp[0]].values())
    }

    # Branching inside one cycle component: continuum of paths.
    for i in cyclic:
        for y in components[i]:
            inner = sum(1 for z in adjacency[y].values() if z in reach and comp_of[z] == i)
            if inner >= 2:
                return Cardinality.continuum()

    # An exit edge from a cycle: after pruning, every surviving path leads to
    # some cycle again, so one exit is enough for countably many paths.
    for i in cyclic:
        for y in components[i]:
            if any(z in reach and comp_of[z] != i for z in adjacency[y].values()):
                return Cardinality.countable()

    # Finite: count digit-labelled walks from the root into terminal cycles.
    # Components arrive callees-first, so successor counts are ready.
    walk_count: dict[Fraction, int] = {}
    for i, comp in enumerate(components):
        if i in cyclic:
            for y in comp:
                walk_count[y] = 1
        else:
            (y,) = comp
            walk_count[y] = sum(walk_count[z] for z in adjacency[y].values() if z in reach)
    return Cardinality.finite(walk_count[graph.root])


def classify_point(
    ifs: Ifs,
    x: Fraction,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Cardinality:
    """Build the residual graph of x and classify it."""
    return classify_cardinality(build_residual_graph(ifs, x, max_nodes, max_depth))


def enumerate_codings(
    ifs: Ifs,
    x: Fraction,
    depth: int,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int = DEFAULT_MAX_DEPTH,
    graph: ResidualGraph | None = None,
) -> list[tuple[int, ...]]:
    """All length-``depth`` prefixes of codings of x, lexicographically sorted.

    These are the digit paths from the root that survive dead-branch pruning.
    On a non-exhausted graph the enumeration is restricted to the explored
    region and may miss continuations through unexpanded nodes.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if graph is None:
        graph = build_residual_graph(ifs, x, max_nodes, max_depth)
    adjacency = graph.adjacency
    alive = _pruned_alive(adjacency, graph.unexpanded)
    if graph.root not in alive:
        return []

    words: list[tuple[int, ...]] = []
    stack: list[tuple[Fraction, tuple[int, ...]]] = [(graph.root, ())]
    while stack:
        y, prefix = stack.pop()
        if len(prefix) == depth:
            words.append(prefix)
            continue
        if y not in adjacency:
            continue  # unexpanded frontier: continuation unknown
        for d in sorted(adjacency[y], reverse=True):
            z = adjacency[y][d]
            if z in alive:
                stack.append((z, prefix + (d,)))
    return sorted(words)


@dataclass(frozen=True)
class WitnessRequest:
    """Requested coding count: finite(k), countable, or continuum."""

    kind: str
    count: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("finite", "countable", "continuum"):
            raise ValueError(f"bad witness target kind {self.kind!r}")
        if self.kind == "finite" and (self.count is None or self.count < 1):
            raise ValueError("finite witness target needs a count >= 1")

    @classmethod
    def finite(cls, k: int) -> WitnessRequest:
        return cls("finite", count=k)

    @classmethod
    def countable(cls) -> WitnessRequest:
        return cls("countable")

    @classmethod
    def continuum(cls) -> WitnessRequest:
        return cls("continuum")

    @classmethod
    def parse(cls, text: str) -> WitnessRequest:
        """Parse ``finite:<k>``, ``aleph0`` or ``continuum``."""
        text = text.strip()
        if text == "aleph0":
            return cls("countable")
        if text == "continuum":
            return cls("continuum")
        if text.startswith("finite:"):
            try:
                return cls("finite", count=int(text.split(":", 1)[1]))
            except ValueError as exc:
                raise ValueError(f"bad finite count in target {text!r}") from exc
        raise ValueError(f"bad witness target {text!r} (want finite:<k>, aleph0 or continuum)")

    def matches(self, verdict: Cardinality) -> bool:
        if self.kind == "finite":
            return verdict.kind == "finite" and verdict.count == self.count
        return verdict.kind == self.kind


def _verified_unique_tail(
    ifs: Ifs, preperiod: tuple[int, ...], period: tuple[int, ...], max_nodes: int, max_depth: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    point = symbolic_point(ifs, preperiod, period)
    verdict = classify_point(ifs, point.value, max_nodes, max_depth)
    if verdict != Cardinality.finite(1):
        raise WitnessVerificationError(
            f"tail {point} was expected to have a unique coding, classifier says {verdict}"
        )
    return preperiod, period


def make_witness(
    ifs: Ifs,
    report: ValidationReport,
    request: WitnessRequest,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> SymbolicPoint:
    """Construct a point with the requested number of codings.

    The recipes splice overlap blocks in front of a verified single-coding
    tail; which recipe applies depends on whether an extreme neighbour pair
    overlaps. The result is classified before being returned and a mismatch
    raises WitnessVerificationError, so a returned witness is always sound.
    Impossible requests (countable, or a non power of two, when both extreme
    pairs are disjoint) raise UnreachableTargetError.
    """
    if not report.member:
        raise ValueError("witness construction needs a validated member system")
    case = end_case(ifs, report)
    m = ifs.m

    if request.kind == "countable":
        if case.tag == "no-end-overlap":
            raise UnreachableTargetError(
                "no point has countably many codings when both extreme pairs are disjoint"
            )
        if case.left_overlaps:
            pre: tuple[int, ...] = (1,)
            per: tuple[int, ...] = (m,)
        else:
            pre, per = (m,), (1,)
    elif request.kind == "continuum":
        spec = report.overlaps[0]
        pre, per = (), (spec.index,) + (m,) * spec.u
    else:
        k = request.count
        assert k is not None
        if case.tag == "end-overlap":
            s = k - 1
            if case.left_overlaps and not case.right_overlaps:
                spec = report.overlap_at(1)
                assert spec is not None
                tail = _verified_unique_tail(ifs, (m - 1,), (m,), max_nodes, max_depth)
                head = (1,) + (m,) * (spec.u * s)
            elif case.right_overlaps and not case.left_overlaps:
                spec = report.overlap_at(m - 1)
                assert spec is not None
                tail = _verified_unique_tail(ifs, (2,), (1,), max_nodes, max_depth)
                head = (m,) + (1,) * (spec.v * s)
            else:
                spec = report.overlap_at(1)
                assert spec is not None
                # Anchor the tail at the smallest disjoint middle pair.
                mid = min(report.disjoint_pairs)
                tail = _verified_unique_tail(ifs, (mid,), (m,), max_nodes, max_depth)
                head = (1,) + (m,) * (spec.u * s)
            pre, per = head + tail[0], tail[1]
        else:
            if k & (k - 1):
                raise UnreachableTargetError(
                    f"only powers of two occur when both extreme pairs are disjoint, not {k}"
                )
            s = k.bit_length() - 1
            spec = report.overlaps[0]
            block = (spec.index,) + (m,) * spec.u
            tail = _verified_unique_tail(ifs, (1,), (m,), max_nodes, max_depth)
            pre, per = block * s + tail[0], tail[1]

    point = symbolic_point(ifs, pre, per)
    verdict = classify_point(ifs, point.value, max_nodes, max_depth)
    if not request.matches(verdict):
        raise WitnessVerificationError(
            f"witness {point} requested as {request.kind}"
            f"{'' if request.count is None else f'({request.count})'} "
            f"but classifies as {verdict}"
        )
    return point
