"""Coauthorship graph over a candidate set, with a reciprocal-weight distance view.

Vertices are candidate authors indexed by sorted name, so the graph is
invariant to the input order of the candidate list. An edge carries the number
of joint documents (each document counted once); the distance view assigns
every edge the length 1 / weight, so heavier collaboration means a shorter path.
"""
from __future__ import annotations

import math
from heapq import heappop, heappush
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .corpus import Corpus

_REL_TOL = 1e-9  # equal-distance detection for shortest paths


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=0.0)


class CoauthorGraph:
    """Undirected weighted graph; ``adj[u]`` lists (neighbor, weight) sorted by index."""

    def __init__(self, names: Sequence[str], edges: Mapping[tuple[int, int], int]):
        self.names: tuple[str, ...] = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate vertex names")
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        adj: list[list[tuple[int, int]]] = [[] for _ in self.names]
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self loop at vertex {u}")
            if not (0 <= u < len(self.names) and 0 <= v < len(self.names)):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if w < 1:
                raise ValueError(f"edge ({u}, {v}) has weight {w} < 1")
            adj[u].append((v, w))
            adj[v].append((u, w))
        self.adj: tuple[tuple[tuple[int, int], ...], ...] = tuple(
            tuple(sorted(nbrs)) for nbrs in adj
        )

    @property
    def n(self) -> int:
        return len(self.names)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield (u, v, w) with u < v, in index order."""
        for u, nbrs in enumerate(self.adj):
            for v, w in nbrs:
                if u < v:
                    yield u, v, w

    def n_edges(self) -> int:
        return sum(1 for _ in self.edges())

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def strength(self, u: int) -> int:
        return sum(w for _, w in self.adj[u])


def build_graph(corpus: Corpus, candidates: Iterable[str]) -> CoauthorGraph:
    """Connect two candidates iff they share at least one document; the weight
    is the count of their joint documents."""
    names = sorted(set(candidates))
    if not names:
        raise ValueError("empty candidate set")
    index = {n: i for i, n in enumerate(names)}
    weights: dict[tuple[int, int], int] = {}
    for doc in corpus:
        present = sorted({index[a] for a in doc.authors if a in index})
        for u, v in combinations(present, 2):
            weights[(u, v)] = weights.get((u, v), 0) + 1
    return CoauthorGraph(names, weights)


class DistanceView:
    """The same topology with edge lengths; from a graph, length = 1 / weight."""

    def __init__(self, names: Sequence[str], lengths: Mapping[tuple[int, int], float]):
        self.names: tuple[str, ...] = tuple(names)
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        adj: list[list[tuple[int, float]]] = [[] for _ in self.names]
        for (u, v), length in lengths.items():
            if u == v:
                raise ValueError(f"self loop at vertex {u}")
            if not (length > 0 and math.isfinite(length)):
                raise ValueError(f"edge ({u}, {v}) has non-positive length {length}")
            adj[u].append((v, float(length)))
            adj[v].append((u, float(length)))
        self.adj: tuple[tuple[tuple[int, float], ...], ...] = tuple(
            tuple(sorted(nbrs)) for nbrs in adj
        )

    @classmethod
    def from_graph(cls, graph: CoauthorGraph) -> "DistanceView":
        return cls(graph.names, {(u, v): 1.0 / w for u, v, w in graph.edges()})

    @property
    def n(self) -> int:
        return len(self.names)


def _sssp(
    view: DistanceView, source: int
) -> tuple[list[float], list[int], list[int], list[list[int]]]:
    """Dijkstra with path counting.

    Returns (dist, sigma, order, preds): distances, shortest-path counts, the
    settle order, and shortest-path predecessors. Paths tying the current best
    within relative tolerance 1e-9 count as equally short. Unreachable vertices
    keep dist = inf and sigma = 0.
    """
    n = view.n
    dist = [math.inf] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    order: list[int] = []
    done = [False] * n
    dist[source] = 0.0
    sigma[source] = 1
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, v = heappop(heap)
        if done[v]:
            continue
        done[v] = True
        order.append(v)
        for w, length in view.adj[v]:
            nd = dist[v] + length
            if _close(nd, dist[w]):
                sigma[w] += sigma[v]
                preds[w].append(v)
            elif nd < dist[w]:
                dist[w] = nd
                sigma[w] = sigma[v]
                preds[w] = [v]
                heappush(heap, (nd, w))
    return dist, sigma, order, preds


def shortest_paths(
    view: DistanceView, source: str
) -> tuple[dict[str, float], dict[str, int]]:
    """Distances and shortest-path counts from ``source``, keyed by author name."""
    s = view.index[source]
    dist, sigma, _, _ = _sssp(view, s)
    return (
        {name: dist[i] for i, name in enumerate(view.names)},
        {name: sigma[i] for i, name in enumerate(view.names)},
    )


# ---------- edge-list export ----------

def write_graph(graph: CoauthorGraph, path: str | Path) -> None:
    """Lines ``u v w`` by vertex index, with a .names sidecar (one name per line)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in graph.edges():
            fh.write(f"{u} {v} {w}\n")
    with open(path.with_suffix(path.suffix + ".names"), "w", encoding="utf-8") as fh:
        for name in graph.names:
            fh.write(name + "\n")


def read_graph(path: str | Path) -> CoauthorGraph:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".names"), encoding="utf-8") as fh:
        names = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    edges: dict[tuple[int, int], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            u, v, w = line.split()
            edges[(int(u), int(v))] = int(w)
    return CoauthorGraph(names, edges)
