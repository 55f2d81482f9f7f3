"""Shared fixtures: the three hand-checked systems and a random member factory."""

from __future__ import annotations

import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from overlapifs import AffineMap, Ifs, validate

DATA = Path(__file__).parent / "data"


def quad_maps() -> list[AffineMap]:
    """Four maps at scale 1/5; overlaps at both extreme neighbour pairs.

    Hand-checked: hull [0,1], overlaps (1,2) and (3,4) with u=v=1, gap at
    (2,3), common composed maps x/25 + 4/25 and x/25 + 4/5.
    """
    return [
        AffineMap(F(1, 5), F(0)),
        AffineMap(F(1, 5), F(4, 25)),
        AffineMap(F(1, 5), F(16, 25)),
        AffineMap(F(1, 5), F(4, 5)),
    ]


def noend_maps() -> list[AffineMap]:
    """Four maps at scale 1/5 with the single overlap in the middle.

    Hand-checked: f2(f4(0)) = 4/25 + 3/10 = 23/50 = f3(0) and
    f3(f1(1)) = 1/25 + 23/50 = 1/2 = f2(1), so pair (2,3) has u = v = 1 and
    the common composed map x/25 + 23/50; pairs (1,2) and (3,4) are disjoint.
    """
    return [
        AffineMap(F(1, 5), F(0)),
        AffineMap(F(1, 5), F(3, 10)),
        AffineMap(F(1, 5), F(23, 50)),
        AffineMap(F(1, 5), F(4, 5)),
    ]


def uneven_maps() -> list[AffineMap]:
    """Three maps with ratios 1/9, 1/9, 1/3; the overlap needs u=2, v=1.

    Hand-checked: f1(f3(f3(x))) = x/81 + 8/81 = f2(f1(x)), overlap
    [8/81, 1/9], gap between pieces 2 and 3.
    """
    return [
        AffineMap(F(1, 9), F(0)),
        AffineMap(F(1, 9), F(8, 81)),
        AffineMap(F(1, 3), F(2, 3)),
    ]


@pytest.fixture(scope="session")
def quad():
    return Ifs.from_maps(quad_maps())


@pytest.fixture(scope="session")
def quad_report(quad):
    return validate(quad)


@pytest.fixture(scope="session")
def noend():
    return Ifs.from_maps(noend_maps())


@pytest.fixture(scope="session")
def noend_report(noend):
    return validate(noend)


@pytest.fixture(scope="session")
def uneven():
    return Ifs.from_maps(uneven_maps())


@pytest.fixture(scope="session")
def uneven_report(uneven):
    return validate(uneven)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def random_member(rng: random.Random) -> tuple[Ifs, list[int | None]]:
    """Random member built by the fixture recipe: equal ratio, mixed pattern.

    On the hull [0, 1] an overlapping neighbour pair with tail length w must
    advance the offset by exactly ratio - ratio**(w+1) (that realizes the
    composed-image identity for equal ratios), and a disjoint pair advances
    by ratio plus a positive gap. The offsets must end at 1 - ratio so the
    last map fixes 1, which leaves a positive budget to distribute over the
    gaps whenever ratio < 1/m. Returns the system plus the per-pair plan
    (w for an overlap, None for a gap).
    """
    m = rng.choice([3, 4, 5, 6])
    ratio = F(1, m + rng.randint(1, 4))
    while True:
        plan: list[int | None] = [rng.choice([None, 1, 1, 2, 3]) for _ in range(m - 1)]
        if any(w is None for w in plan) and any(w is not None for w in plan):
            break
    overlap_total = sum(ratio - ratio ** (w + 1) for w in plan if w is not None)
    gap_pairs = [i for i, w in enumerate(plan) if w is None]
    budget = (1 - ratio) - overlap_total - len(gap_pairs) * ratio
    assert budget > 0
    weights = [F(rng.randint(1, 9)) for _ in gap_pairs]
    total_weight = sum(weights)
    gaps = dict(zip(gap_pairs, (budget * w / total_weight for w in weights)))
    offsets = [F(0)]
    for i, w in enumerate(plan):
        if w is None:
            offsets.append(offsets[-1] + ratio + gaps[i])
        else:
            offsets.append(offsets[-1] + ratio - ratio ** (w + 1))
    assert offsets[-1] == 1 - ratio
    return Ifs.from_maps([AffineMap(ratio, b) for b in offsets]), plan


def member_instances(seed: int, count: int):
    rng = random.Random(seed)
    return [random_member(rng) for _ in range(count)]


def prefix_count_series(graph, depth: int) -> list[int]:
    """Brute-force oracle: number of coding prefixes of each length 0..depth.

    Counts digit paths in the dead-branch-pruned residual graph by direct
    dynamic programming over path lengths, independently of any component
    analysis. On the pruned graph every path extends, so the series is
    nondecreasing; a stabilized series pins a finite coding count, unbounded
    growth means infinitely many codings, and exponential growth (at least
    2**(n // node count)) signals a continuum.
    """
    assert graph.exhausted
    adjacency = graph.adjacency
    alive = set(adjacency)
    while True:
        dead = {y for y in alive if not any(z in alive for z in adjacency[y].values())}
        if not dead:
            break
        alive -= dead
    if graph.root not in alive:
        return [0] * (depth + 1)
    counts = {y: 1 for y in alive}
    series = [1]
    for _ in range(depth):
        counts = {
            y: sum(counts[z] for z in adjacency[y].values() if z in alive) for y in alive
        }
        series.append(counts[graph.root])
    return series


def oracle_classify(graph, depth: int = 60):
    """Independent three-way verdict from the prefix-count series.

    Returns ("finite", k), ("countable", None) or ("continuum", None).
    """
    series = prefix_count_series(graph, depth)
    nodes = max(1, len(graph.adjacency))
    window = min(depth - 1, nodes + 3)
    if series[depth] == series[depth - window]:
        return ("finite", series[depth])
    if series[depth] >= 2 ** (depth // nodes) and series[depth] >= 4 * series[depth // 2]:
        return ("continuum", None)
    return ("countable", None)
