"""Partial edge colorings over a fixed palette and the section of machinery
built on them: color-set queries, bichromatic path walks, critical-path
detection, validity checks, color exchange, and the union-find acyclicity
verifier.

Colors are 1-based integers 1..K.  A partial coloring leaves some edges
uncolored (None); properness is enforced on every assignment, acyclicity is
checked separately (``is_valid_for`` / ``verify_acyclic``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .graph import Graph, NoSuchEdge


class ColoringError(ValueError):
    pass


class NotACandidate(ColoringError):
    pass


class EdgeNotColored(ColoringError):
    pass


class EdgeAlreadyColored(ColoringError):
    pass


@dataclass(frozen=True)
class Palette:
    """Color set {1..size}; the main algorithm uses size = max_degree + 1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ColoringError("palette size must be >= 1")

    def colors(self) -> range:
        return range(1, self.size + 1)


class PartialColoring:
    """Mutable edge->color map with a per-vertex color index.

    The index maps (vertex, color) -> incident edge id carrying that color,
    which makes color queries and bichromatic walks O(1) per step.  The two
    structures are kept consistent by construction; properness is an
    invariant (no vertex sees a color twice).
    """

    __slots__ = ("g", "k", "color", "_at")

    def __init__(self, g: Graph, k: int):
        if k < 1:
            raise ColoringError("palette size must be >= 1")
        self.g = g
        self.k = k
        self.color: list[int | None] = [None] * g.m
        self._at: list[dict[int, int]] = [dict() for _ in range(g.n)]

    def copy(self) -> "PartialColoring":
        dup = PartialColoring.__new__(PartialColoring)
        dup.g = self.g
        dup.k = self.k
        dup.color = list(self.color)
        dup._at = [dict(d) for d in self._at]
        return dup

    def state_key(self) -> tuple:
        return tuple(self.color)

    def palette(self) -> Palette:
        return Palette(self.k)

    # -- queries ---------------------------------------------------------

    def colors_at(self, u: int) -> set[int]:
        """F_u: colors on colored edges incident to u."""
        return set(self._at[u])

    def edge_at(self, u: int, color: int) -> int | None:
        """The edge at u carrying ``color``, or None."""
        return self._at[u].get(color)

    def degree_colored(self, u: int) -> int:
        return len(self._at[u])

    def seen_across(self, a: int, b: int) -> set[int]:
        """S_ab: colors at b other than the color of edge ab."""
        eid = self.g.edge_id(a, b)
        out = set(self._at[b])
        ce = self.color[eid]
        if ce is not None:
            out.discard(ce)
        return out

    def candidate_colors(self, eid: int) -> set[int]:
        """Colors absent at both endpoints of the uncolored edge ``eid``."""
        if self.color[eid] is not None:
            raise EdgeAlreadyColored(f"edge {eid} already colored")
        u, v = self.g.edges[eid]
        taken = set(self._at[u]) | set(self._at[v])
        return {c for c in range(1, self.k + 1) if c not in taken}

    def colors_used(self) -> int:
        return len({c for c in self.color if c is not None})

    def is_total(self) -> bool:
        return all(c is not None for c in self.color)

    # -- mutation --------------------------------------------------------

    def assign(self, eid: int, color: int) -> None:
        """Color ``eid``; rejects non-candidates.  Acyclicity is not checked
        here — callers use ``is_valid_for`` first."""
        if self.color[eid] is not None:
            raise EdgeAlreadyColored(f"edge {eid} already colored")
        if not (1 <= color <= self.k):
            raise NotACandidate(f"color {color} outside palette 1..{self.k}")
        u, v = self.g.edges[eid]
        if color in self._at[u] or color in self._at[v]:
            raise NotACandidate(f"color {color} already incident to edge {eid}")
        self.color[eid] = color
        self._at[u][color] = eid
        self._at[v][color] = eid

    def unassign(self, eid: int) -> int:
        """Uncolor ``eid``; returns the removed color."""
        c = self.color[eid]
        if c is None:
            raise EdgeNotColored(f"edge {eid} not colored")
        u, v = self.g.edges[eid]
        self.color[eid] = None
        del self._at[u][c]
        del self._at[v][c]
        return c


@dataclass(frozen=True)
class BichromaticPath:
    """A maximal (alpha, beta)-alternating path as a vertex sequence."""

    vertices: tuple[int, ...]
    alpha: int
    beta: int
    maximal: bool = True

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]

    def length(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class BichromaticCycle:
    """Marker for an alternating walk that closed on itself; never arises
    under a valid coloring, but the verifier exercises it."""

    vertices: tuple[int, ...]
    alpha: int
    beta: int


def _walk(c: PartialColoring, start: int, first: int, second: int):
    """Follow the alternating (first, second) walk from ``start``.

    Returns (vertices, last_color, closed); ``closed`` means the walk came
    back to ``start`` (a bichromatic cycle).  Properness bounds the walk: the
    two-color subgraph has max degree 2, so it is a path or a cycle.
    """
    verts = [start]
    prev_eid = -1
    cur = start
    want, other = first, second
    last = None
    for _ in range(c.g.m + 1):
        eid = c._at[cur].get(want)
        if eid is None or eid == prev_eid:
            return verts, last, False
        cur = c.g.other_end(eid, cur)
        verts.append(cur)
        last = want
        want, other = other, want
        prev_eid = eid
        if cur == start:
            return verts, last, True
    raise AssertionError("alternating walk exceeded edge count")  # unreachable


def maximal_bichromatic_path(
    c: PartialColoring, alpha: int, beta: int, v: int
) -> BichromaticPath | BichromaticCycle | None:
    """The unique maximal (alpha, beta) path through ``v`` (Fact 1), absent
    if v has neither color; a BichromaticCycle if the walk closes."""
    if alpha == beta:
        raise ColoringError("alpha and beta must differ")
    has_a = c.edge_at(v, alpha) is not None
    has_b = c.edge_at(v, beta) is not None
    if not has_a and not has_b:
        return None
    down, _, closed = _walk(c, v, alpha, beta) if has_a else ([v], None, False)
    if closed:
        return BichromaticCycle(tuple(down), alpha, beta)
    up, _, closed = _walk(c, v, beta, alpha) if has_b else ([v], None, False)
    if closed:
        return BichromaticCycle(tuple(up), alpha, beta)
    verts = tuple(reversed(down[1:])) + tuple(up)
    return BichromaticPath(vertices=verts, alpha=alpha, beta=beta)


def has_critical_path(
    c: PartialColoring, alpha: int, beta: int, a: int, b: int
) -> bool:
    """True iff the maximal (alpha, beta) path starting at ``a`` via an
    alpha edge ends at ``b`` via an alpha edge (an (alpha, beta, ab)
    critical path; odd length, at least three)."""
    if alpha == beta:
        raise ColoringError("alpha and beta must differ")
    if a == b:
        raise ColoringError("a and b must differ")
    if c.edge_at(a, beta) is not None:
        return False  # a would be interior to its maximal path
    verts, last, closed = _walk(c, a, alpha, beta)
    if closed or last != alpha:
        return False
    return verts[-1] == b


def is_valid_for(c: PartialColoring, eid: int, beta: int) -> bool:
    """Fact 2: candidate ``beta`` is valid for ``eid`` unless some color seen
    across both endpoints admits a critical path between them."""
    if beta not in c.candidate_colors(eid):
        raise NotACandidate(f"color {beta} is not a candidate for edge {eid}")
    a, b = c.g.edges[eid]
    both = c.seen_across(a, b) & c.seen_across(b, a)
    for alpha in sorted(both):
        if has_critical_path(c, alpha, beta, a, b):
            return False
    return True


class ExchangeOutcome(Enum):
    PROPER = "proper"
    NOT_PROPER = "not_proper"


def color_exchange(c: PartialColoring, u: int, i: int, j: int) -> ExchangeOutcome:
    """Swap the colors of edges ui and uj in place when the result is proper
    (Fact 3); otherwise leave the coloring untouched.  Validity is not
    checked here."""
    ei = c.g.edge_id(u, i)
    ej = c.g.edge_id(u, j)
    ci = c.color[ei]
    cj = c.color[ej]
    if ci is None or cj is None:
        raise EdgeNotColored("color_exchange requires both edges colored")
    if ci in c.seen_across(u, j) or cj in c.seen_across(u, i):
        return ExchangeOutcome.NOT_PROPER
    c.unassign(ei)
    c.unassign(ej)
    c.assign(ei, cj)
    c.assign(ej, ci)
    return ExchangeOutcome.PROPER


@dataclass
class VerifyReport:
    """Verdict of the properness + acyclicity check of a (partial) coloring."""

    proper: bool
    clashes: list[tuple[int, int, int, int]]  # (vertex, color, edge, edge)
    acyclic: bool
    cyclic_pairs: list[tuple[int, int]]
    colors_used: int
    colored_edges: int
    total: bool

    @property
    def valid(self) -> bool:
        return self.proper and self.acyclic


def format_coloring(g: Graph, c: PartialColoring) -> str:
    """Coloring output text: a header line then one ``u v color`` line per
    edge in edge-id order (0 marks an uncolored edge)."""
    lines = [f"n {g.n} m {g.m} K {c.k} colors_used {c.colors_used()}"]
    for eid, (u, v) in enumerate(g.edges):
        col = c.color[eid]
        lines.append(f"{u} {v} {col if col is not None else 0}")
    return "\n".join(lines) + "\n"


def format_coloring_json(g: Graph, c: PartialColoring) -> str:
    """Machine-readable variant keyed by edge id."""
    import json

    return json.dumps(
        {
            "n": g.n,
            "m": g.m,
            "k": c.k,
            "colors_used": c.colors_used(),
            "edges": [[u, v] for u, v in g.edges],
            "colors": {str(e): c.color[e] for e in range(g.m)},
        },
        indent=None,
        sort_keys=True,
    )


def parse_coloring(text: str) -> tuple[int, int, int, list[int | None]]:
    """Parse the coloring text format; returns (n, m, k, colors)."""
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ColoringError("empty coloring file")
    head = lines[0].split()
    if len(head) != 8 or head[0] != "n" or head[2] != "m" or head[4] != "K":
        raise ColoringError("bad coloring header")
    n, m, k = int(head[1]), int(head[3]), int(head[5])
    body = lines[1:]
    if len(body) != m:
        raise ColoringError(f"expected {m} edge lines, found {len(body)}")
    colors: list[int | None] = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 3:
            raise ColoringError(f"bad coloring line: {ln!r}")
        col = int(parts[2])
        colors.append(col if col > 0 else None)
    return n, m, k, colors


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        p = self.parent
        r = p.setdefault(x, x)
        while p[r] != r:
            r = p[r]
        while p[x] != r:  # path compression
            p[x], x = r, p[x]
        return r

    def union(self, a: int, b: int) -> bool:
        """Merge; returns False when a and b were already connected."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def verify_acyclic(g: Graph, coloring, k: int | None = None) -> VerifyReport:
    """Check properness and per-color-pair acyclicity by union-find.

    ``coloring`` is a PartialColoring or a raw per-edge sequence (None =
    uncolored); raw sequences may be improper, which the report flags.
    Independent of the path-walking machinery so the two acyclicity
    detectors cross-check each other.
    """
    if isinstance(coloring, PartialColoring):
        colors = coloring.color
        k = coloring.k
    else:
        colors = list(coloring)
    clashes: list[tuple[int, int, int, int]] = []
    seen: list[dict[int, int]] = [dict() for _ in range(g.n)]
    by_color: dict[int, list[int]] = {}
    colored = 0
    for eid, col in enumerate(colors):
        if col is None:
            continue
        colored += 1
        by_color.setdefault(col, []).append(eid)
        for v in g.edges[eid]:
            prior = seen[v].get(col)
            if prior is not None:
                clashes.append((v, col, prior, eid))
            else:
                seen[v][col] = eid
    cyclic_pairs: list[tuple[int, int]] = []
    present = sorted(by_color)
    for ia, a in enumerate(present):
        for b in present[ia:]:
            uf = _UnionFind()
            edges = by_color[a] if a == b else by_color[a] + by_color[b]
            for eid in edges:
                u, v = g.edges[eid]
                if not uf.union(u, v):
                    cyclic_pairs.append((a, b))
                    break
    return VerifyReport(
        proper=not clashes,
        clashes=clashes,
        acyclic=not cyclic_pairs,
        cyclic_pairs=cyclic_pairs,
        colors_used=len(present),
        colored_edges=colored,
        total=colored == g.m,
    )
