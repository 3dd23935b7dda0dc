"""Simple undirected graphs with dense integer ids, degeneracy peeling, and
edge-list text I/O.

Vertices are 0..n-1; edge ids are 0..m-1 in construction order.  Graphs are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass


class GraphError(ValueError):
    """Invalid graph construction or query."""


class SelfLoop(GraphError):
    def __init__(self, u: int):
        super().__init__(f"self-loop at vertex {u}")
        self.vertex = u


class DuplicateEdge(GraphError):
    def __init__(self, u: int, v: int):
        super().__init__(f"duplicate edge ({u}, {v})")
        self.pair = (u, v)


class VertexOutOfRange(GraphError):
    def __init__(self, v: int, n: int):
        super().__init__(f"vertex {v} out of range for n={n}")
        self.vertex = v


class NoSuchEdge(GraphError):
    def __init__(self, u: int, v: int):
        super().__init__(f"no edge ({u}, {v})")
        self.pair = (u, v)


class EdgeListParseError(GraphError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Graph:
    """Immutable simple undirected graph.

    ``edges[i]`` is the unordered pair for edge id ``i``; ``adj[v]`` lists
    ``(neighbor, edge_id)`` in insertion order.
    """

    __slots__ = ("n", "edges", "adj", "_ids")

    def __init__(self, n: int, edges: list[tuple[int, int]]):
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(edges)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        ids: dict[tuple[int, int], int] = {}
        for eid, (u, v) in enumerate(self.edges):
            adj[u].append((v, eid))
            adj[v].append((u, eid))
            ids[(u, v) if u < v else (v, u)] = eid
        self.adj: tuple[tuple[tuple[int, int], ...], ...] = tuple(tuple(a) for a in adj)
        self._ids = ids

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._ids

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        eid = self._ids.get(key)
        if eid is None:
            raise NoSuchEdge(u, v)
        return eid

    def other_end(self, eid: int, v: int) -> int:
        a, b = self.edges[eid]
        return b if v == a else a

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def from_edge_list(n: int, pairs: list[tuple[int, int]]) -> Graph:
    """Build a Graph, rejecting self-loops, duplicates and bad vertex ids."""
    if n < 0:
        raise GraphError("negative vertex count")
    seen: set[tuple[int, int]] = set()
    for u, v in pairs:
        if not (0 <= u < n):
            raise VertexOutOfRange(u, n)
        if not (0 <= v < n):
            raise VertexOutOfRange(v, n)
        if u == v:
            raise SelfLoop(u)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdge(u, v)
        seen.add(key)
    return Graph(n, list(pairs))


@dataclass(frozen=True)
class PeelOrder:
    """Min-degree-first elimination order.

    ``order[i]`` is the i-th vertex removed; ``back_neighbors[v]`` are the
    neighbors of ``v`` removed after ``v``; ``degeneracy`` is the maximum
    back-degree, which the greedy min-degree peel makes minimal.
    """

    order: tuple[int, ...]
    degeneracy: int
    back_neighbors: tuple[tuple[int, ...], ...]


def peel_order(g: Graph) -> PeelOrder:
    """Peel minimum-degree vertices (lowest id on ties) until none remain."""
    deg = [g.degree(v) for v in range(g.n)]
    removed = [False] * g.n
    heap: list[tuple[int, int]] = [(deg[v], v) for v in range(g.n)]
    heapq.heapify(heap)
    order: list[int] = []
    back: list[tuple[int, ...]] = [()] * g.n
    degeneracy = 0
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        order.append(v)
        nbrs = tuple(w for w, _ in g.adj[v] if not removed[w])
        back[v] = nbrs
        if len(nbrs) > degeneracy:
            degeneracy = len(nbrs)
        for w in nbrs:
            deg[w] -= 1
            heapq.heappush(heap, (deg[w], w))
    return PeelOrder(tuple(order), degeneracy, tuple(back))


def max_degree(g: Graph) -> int:
    return max((g.degree(v) for v in range(g.n)), default=0)


def is_k_degenerate(g: Graph, k: int) -> bool:
    if k < 0:
        raise GraphError("k must be non-negative")
    return peel_order(g).degeneracy <= k


def connected_components(g: Graph) -> list[set[int]]:
    """Partition vertices into maximal connected sets (singletons included)."""
    seen = [False] * g.n
    comps: list[set[int]] = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w, _ in g.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def parse_edge_list(text: str) -> Graph:
    """Parse the edge-list text format.

    First non-comment line is ``n m``; then m lines ``u v`` with 0-based
    vertex ids.  Lines starting with ``#`` are ignored; CRLF is accepted.
    """
    header: tuple[int, int] | None = None
    pairs: list[tuple[int, int]] = []
    data_lines = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise EdgeListParseError("expected header 'n m'", line_no)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise EdgeListParseError("non-integer header", line_no) from None
            if header[0] < 0 or header[1] < 0:
                raise EdgeListParseError("negative n or m", line_no)
            continue
        if len(parts) != 2:
            raise EdgeListParseError("expected edge 'u v'", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError("non-integer vertex id", line_no) from None
        data_lines += 1
        if data_lines > header[1]:
            raise EdgeListParseError("more edges than declared", line_no)
        try:
            pairs.append((u, v))
            if not (0 <= u < header[0]):
                raise VertexOutOfRange(u, header[0])
            if not (0 <= v < header[0]):
                raise VertexOutOfRange(v, header[0])
            if u == v:
                raise SelfLoop(u)
        except GraphError as exc:
            raise EdgeListParseError(str(exc), line_no) from None
    if header is None:
        raise EdgeListParseError("empty input", 0)
    if data_lines != header[1]:
        raise EdgeListParseError(
            f"declared m={header[1]} but found {data_lines} edges", 0
        )
    try:
        return from_edge_list(header[0], pairs)
    except GraphError as exc:
        raise EdgeListParseError(str(exc), 0) from None


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"
