"""Iterative Tarjan strongly connected components."""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, TypeVar

T = TypeVar("T", bound=Hashable)


def strongly_connected_components(
    nodes: Iterable[T], successors: Callable[[T], Iterable[T]]
) -> list[list[T]]:
    """SCCs of a directed graph, emitted in reverse topological order.

    Iterative so deep graphs do not hit the interpreter recursion limit.
    Successors of every node must themselves be members of ``nodes``.
    """
    index: dict[T, int] = {}
    lowlink: dict[T, int] = {}
    on_stack: set[T] = set()
    stack: list[T] = []
    sccs: list[list[T]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work: list[tuple[T, Iterable[T]]] = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            child = next(it, None)  # type: ignore[arg-type]
            if child is not None:
                w = child
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                elif w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                sccs.append(component)
    return sccs
