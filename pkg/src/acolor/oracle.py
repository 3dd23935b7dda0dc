"""Exact acyclic chromatic index for small graphs, plus an independent
coloring validator.

The oracle is ground truth: a backtracking search over edges with
incremental bichromatic-cycle pruning and color-symmetry breaking.  The
validator re-implements the acyclicity check with per-pair DFS, structurally
distinct from the union-find verifier in ``coloring``, so the two can
cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coloring import PartialColoring, VerifyReport, is_valid_for
from .graph import Graph, max_degree


class BudgetExhausted(Exception):
    """Internal signal: node budget ran out mid-search."""


@dataclass
class OracleResult:
    """Exact result (a_prime set) or a proven lower bound on timeout."""

    a_prime: int | None
    witness: list[int] | None
    nodes_explored: int
    timed_out: bool
    lower_bound: int


def _edge_order(g: Graph) -> list[int]:
    """BFS edge order from a max-degree vertex, for early constraint
    propagation."""
    if g.m == 0:
        return []
    start = max(range(g.n), key=lambda v: (g.degree(v), -v))
    index = {start: 0}
    queue = [start]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for w, _ in sorted(g.adj[v]):
            if w not in index:
                index[w] = len(index)
                queue.append(w)
    for v in range(g.n):  # disconnected leftovers
        if v not in index:
            index[v] = len(index)
    ordered = sorted(
        range(g.m),
        key=lambda e: (
            min(index[g.edges[e][0]], index[g.edges[e][1]]),
            max(index[g.edges[e][0]], index[g.edges[e][1]]),
        ),
    )
    return ordered


class _Search:
    def __init__(self, g: Graph, budget: int):
        self.g = g
        self.budget = budget
        self.nodes = 0

    def run(self, k: int, order: list[int], symmetry: bool) -> list[int] | None:
        c = PartialColoring(self.g, k)
        found = self._extend(c, order, 0, 0, symmetry)
        if found:
            return [c.color[e] for e in range(self.g.m)]  # type: ignore[list-item]
        return None

    def _extend(
        self, c: PartialColoring, order: list[int], idx: int, used: int, symmetry: bool
    ) -> bool:
        if idx == len(order):
            return True
        eid = order[idx]
        u, v = self.g.edges[eid]
        top = min(c.k, used + 1) if symmetry else c.k
        taken = c.colors_at(u) | c.colors_at(v)
        for color in range(1, top + 1):
            if color in taken:
                continue
            self.nodes += 1
            if self.nodes > self.budget:
                raise BudgetExhausted
            if not is_valid_for(c, eid, color):
                continue
            c.assign(eid, color)
            if self._extend(c, order, idx + 1, max(used, color), symmetry):
                return True
            c.unassign(eid)
        return False


def exact_acyclic_index(
    g: Graph,
    k_max: int | None = None,
    budget: int = 10**8,
    symmetry_breaking: bool = True,
) -> OracleResult:
    """Smallest k <= k_max admitting a proper acyclic edge k-coloring.

    On budget exhaustion the result carries the best lower bound proven
    (every k below it was exhausted) with ``timed_out`` set.  If every
    k <= k_max is exhausted without a coloring, ``a_prime`` is None and
    ``lower_bound`` is k_max + 1.
    """
    delta = max_degree(g)
    if g.m == 0:
        return OracleResult(0, [], 0, False, 0)
    if k_max is None:
        k_max = delta + 2
    order = _edge_order(g)
    search = _Search(g, budget)
    k = max(1, delta)
    while k <= k_max:
        try:
            witness = search.run(k, order, symmetry_breaking)
        except BudgetExhausted:
            return OracleResult(None, None, search.nodes, True, k)
        if witness is not None:
            return OracleResult(k, witness, search.nodes, False, k)
        k += 1
    return OracleResult(None, None, search.nodes, False, k_max + 1)


def validate_coloring(g: Graph, colors, k: int | None = None) -> VerifyReport:
    """Independent properness + acyclicity check (DFS per color pair).

    Accepts a raw per-edge color sequence or a PartialColoring; uncolored
    edges are ignored.  Must agree with ``coloring.verify_acyclic`` on every
    input.
    """
    if isinstance(colors, PartialColoring):
        colors = colors.color
    colors = list(colors)
    clashes: list[tuple[int, int, int, int]] = []
    by_color: dict[int, list[int]] = {}
    colored = 0
    for eid, col in enumerate(colors):
        if col is None:
            continue
        colored += 1
        by_color.setdefault(col, []).append(eid)
    for v in range(g.n):
        incident: dict[int, int] = {}
        for w, eid in g.adj[v]:
            col = colors[eid]
            if col is None:
                continue
            if col in incident:
                clashes.append((v, col, incident[col], eid))
            else:
                incident[col] = eid
    present = sorted(by_color)
    cyclic_pairs: list[tuple[int, int]] = []
    for ia, a in enumerate(present):
        for b in present[ia:]:
            edges = by_color[a] if a == b else by_color[a] + by_color[b]
            if _pair_has_cycle(g, edges):
                cyclic_pairs.append((a, b))
    return VerifyReport(
        proper=not clashes,
        clashes=clashes,
        acyclic=not cyclic_pairs,
        cyclic_pairs=cyclic_pairs,
        colors_used=len(present),
        colored_edges=colored,
        total=colored == g.m,
    )


def _pair_has_cycle(g: Graph, edge_ids: list[int]) -> bool:
    """Cycle detection in the subgraph of the given edges via iterative DFS."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for eid in edge_ids:
        u, v = g.edges[eid]
        adj.setdefault(u, []).append((v, eid))
        adj.setdefault(v, []).append((u, eid))
    visited: set[int] = set()
    for root in adj:
        if root in visited:
            continue
        stack = [(root, -1)]
        visited.add(root)
        while stack:
            v, via = stack.pop()
            for w, eid in adj[v]:
                if eid == via:
                    continue
                if w in visited:
                    return True
                visited.add(w)
                stack.append((w, eid))
    return False
