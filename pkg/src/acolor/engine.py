"""Constructive acyclic edge coloring of 2-degenerate graphs with at most
max_degree + 1 colors.

The coloring is built by re-inserting edges in the reverse of a removal
order chosen so that every non-trivial insertion happens at the current
low-degree-hierarchy pivot.  Each insertion replays the extension moves in
proof order: candidate trial, pendant-partner recoloring, the swap of the
two pivot-to-hub edges, circular derangement of fan colors, reduction to a
single bichromatic cycle, the pivot shift, and the secondary-pivot endgame.
Every move the argument proves possible is attempted exactly where the
argument uses it, so its preconditions double as runtime assertions: a
violated one means the engine mis-stepped, not that the graph is hard.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .coloring import (
    ExchangeOutcome,
    PartialColoring,
    _walk,
    has_critical_path,
    is_valid_for,
    verify_acyclic,
)
from .graph import Graph, connected_components, format_edge_list, max_degree, peel_order

logger = logging.getLogger("acolor")

PENDANT = "pendant"
PIVOT = "pivot"


class EngineError(Exception):
    pass


class NotTwoDegenerate(EngineError):
    pass


class NoPivot(EngineError):
    pass


class InternalInvariantViolation(EngineError):
    """A lemma-tagged engine assertion failed; indicates an engine bug."""

    def __init__(self, lemma: str, detail: str = ""):
        super().__init__(f"[{lemma}] {detail}" if detail else f"[{lemma}]")
        self.lemma = lemma
        self.detail = detail


class CounterexampleFound(EngineError):
    """The full cascade and the bounded fallback both failed.  Per the
    theorem this must never fire; the payload is a bug report."""

    def __init__(self, message: str, graph_dump: str, trace_dump: str):
        super().__init__(message)
        self.graph_dump = graph_dump
        self.trace_dump = trace_dump


@dataclass
class MoveStep:
    move: str  # assign | unassign | recolor | note
    lemma: str
    edge: tuple[int, int] | None
    color: int | None
    prev: int | None
    ok: bool = True

    def line(self, step: int) -> str:
        e = f"({self.edge[0]},{self.edge[1]})" if self.edge else "(-,-)"
        col = self.color if self.color is not None else "-"
        return (
            f"step={step} move={self.move} lemma={self.lemma} "
            f"edge={e} color={col} ok={self.ok}"
        )


class MoveTrace:
    """Ordered log of primitive recoloring moves; replaying it onto the
    recorded pre-state reproduces the post-state exactly."""

    def __init__(self):
        self.steps: list[MoveStep] = []

    def record(self, move, lemma, edge=None, color=None, prev=None, ok=True):
        self.steps.append(MoveStep(move, lemma, edge, color, prev, ok))

    def replay(self, c: PartialColoring) -> None:
        for s in self.steps:
            if s.edge is None:
                continue
            eid = c.g.edge_id(*s.edge)
            if s.move == "assign":
                c.assign(eid, s.color)
            elif s.move == "unassign":
                c.unassign(eid)
            elif s.move == "recolor":
                c.unassign(eid)
                c.assign(eid, s.color)

    def lines(self) -> list[str]:
        return [s.line(i) for i, s in enumerate(self.steps)]


@dataclass
class EngineStats:
    fallback_activations: int = 0
    invariant_violations: list[str] = field(default_factory=list)
    phases: dict[str, int] = field(default_factory=dict)

    def bump(self, name: str) -> None:
        self.phases[name] = self.phases.get(name, 0) + 1


@dataclass
class PivotContext:
    """The cast of one edge-insertion step around the primary pivot x."""

    x: int
    w0: frozenset[int]
    w1: frozenset[int]
    w2: frozenset[int]
    nprime: tuple[int, ...]  # degree-2 neighbors of x
    ydash: dict[int, int]  # y_i -> its other neighbor
    ndprime: tuple[int, ...]  # the (at most two) other neighbors
    q: int | None  # designated member of ndprime in W1 | W2
    qdash: int | None
    mu: int | None = None  # color of edge xq once normalized
    nu: int | None = None  # color of edge xq'
    y1: int | None = None  # pendant-side endpoint of the edge being inserted


@dataclass
class SecondaryContext:
    """The cast around the secondary pivot p for the endgame."""

    p: int
    pdash: int
    eta: int
    z: tuple[int, ...]
    zdash: dict[int, int]
    branch: int  # color of pp' in the eta-reduced colorings (mu or nu)
    theta: int | None = None
    mu2: int | None = None
    rho: int | None = None


def _select_pivot(verts, degf, nbrs):
    """W0/W1/W2 peeling and pivot choice per the low-degree hierarchy.

    ``verts`` must all have degree >= 2.  Returns (x, q_or_None, w0, w1, w2);
    q is set when the hierarchy has three levels (then q is in W2 and x is a
    W1 neighbor of q).  Raises NoPivot when every vertex has degree 2.
    """
    w0 = frozenset(v for v in verts if degf(v) == 2)
    rest = [v for v in verts if v not in w0]
    if not rest:
        raise NoPivot("all vertices have degree 2 (bare cycles)")
    deg1 = {v: sum(1 for w in nbrs(v) if w not in w0) for v in rest}
    w1 = frozenset(v for v in rest if deg1[v] <= 2)
    if not w1:
        raise InternalInvariantViolation("2-degeneracy", "W1 empty")
    rest2 = [v for v in rest if v not in w1]
    if not rest2:
        return min(w1), None, w0, w1, frozenset()
    deg2 = {
        v: sum(1 for w in nbrs(v) if w not in w0 and w not in w1) for v in rest2
    }
    w2 = frozenset(v for v in rest2 if deg2[v] <= 2)
    if not w2:
        raise InternalInvariantViolation("2-degeneracy", "W2 empty")
    q = min(w2)
    w1_nbrs = [w for w in nbrs(q) if w in w1]
    if not w1_nbrs:
        raise InternalInvariantViolation("pivot", "W2 vertex without W1 neighbor")
    return min(w1_nbrs), q, w0, w1, w2


def select_primary_pivot(g: Graph) -> PivotContext:
    """Pivot context for a whole graph (minimum degree 2 expected; bare
    cycles raise NoPivot)."""
    verts = [v for v in range(g.n) if g.degree(v) >= 1]
    x, qcase, w0, w1, w2 = _select_pivot(
        verts, g.degree, lambda v: (w for w, _ in g.adj[v])
    )
    return _context_for(x, qcase, w0, w1, w2, lambda v: [w for w, _ in g.adj[v]])


def _context_for(x, qcase, w0, w1, w2, nbrs_of) -> PivotContext:
    nbrs = sorted(nbrs_of(x))
    nprime = tuple(w for w in nbrs if w in w0)
    ndprime = tuple(w for w in nbrs if w not in w0)
    if qcase is not None and qcase in ndprime:
        q = qcase
    else:
        eligible = [w for w in ndprime if w in w1 or w in w2]
        q = min(eligible) if eligible else (min(ndprime) if ndprime else None)
    qdash = None
    if q is not None and len(ndprime) == 2:
        qdash = ndprime[0] if ndprime[1] == q else ndprime[1]
    return PivotContext(
        x=x,
        w0=w0,
        w1=w1,
        w2=w2,
        nprime=nprime,
        ydash={},
        ndprime=ndprime,
        q=q,
        qdash=qdash,
    )


def insertion_schedule(g: Graph) -> list[int]:
    """An edge order whose every prefix is 2-degenerate and whose each new
    edge is incident to a vertex of degree <= 2 in the prefix: reverse peel
    order, emitting each vertex's back-edges together."""
    po = peel_order(g)
    if po.degeneracy > 2:
        raise NotTwoDegenerate(f"degeneracy {po.degeneracy} > 2")
    out: list[int] = []
    for v in reversed(po.order):
        out.extend(sorted(g.edge_id(v, w) for w in po.back_neighbors[v]))
    return out


def check_property_a(c: PartialColoring, ctx: PivotContext) -> bool:
    """Every color outside {mu, nu} admits a maximal bichromatic path with
    color mu from q to y1 of length >= 4 avoiding x and the other degree-2
    neighbors of x."""
    one, q, x, y1 = ctx.mu, ctx.q, ctx.x, ctx.y1
    avoid = (set(ctx.nprime) - {y1}) | {x}
    if c.edge_at(q, one) is not None:
        return False  # path would not start at q
    for gamma in range(1, c.k + 1):
        if gamma in (ctx.mu, ctx.nu):
            continue
        if c.edge_at(q, gamma) is None:
            return False
        verts, _, closed = _walk(c, q, gamma, one)
        if closed or verts[-1] != y1 or len(verts) - 1 < 4:
            return False
        if any(v in avoid for v in verts):
            return False
    return True


def check_property_b(c: PartialColoring, ctx: PivotContext, yjdash: int) -> bool:
    """Every color outside {mu, nu} admits a maximal bichromatic path with
    color nu starting at q whose segment up to y'_j has length >= 3 and
    avoids x and the degree-2 neighbors of x."""
    two, q, x = ctx.nu, ctx.q, ctx.x
    avoid = set(ctx.nprime) | {x}
    if c.edge_at(q, two) is not None:
        return False
    for gamma in range(1, c.k + 1):
        if gamma in (ctx.mu, ctx.nu):
            continue
        if c.edge_at(q, gamma) is None:
            return False
        verts, _, closed = _walk(c, q, gamma, two)
        if closed or yjdash not in verts:
            return False
        idx = verts.index(yjdash)
        if idx < 3 or any(v in avoid for v in verts[: idx + 1]):
            return False
    return True


class _Extender:
    """Per-graph mutable engine state: the coloring being built plus the
    present-edge view of the prefix graph."""

    def __init__(self, g: Graph, c: PartialColoring, assert_lemmas: bool,
                 stats: EngineStats, trace: MoveTrace | None):
        self.g = g
        self.c = c
        self.k = c.k
        self.assert_lemmas = assert_lemmas
        self.stats = stats
        self.trace = trace
        self.present = [False] * g.m
        self.deg = [0] * g.n

    # -- traced primitives ------------------------------------------------

    def _assign(self, eid: int, color: int, lemma: str) -> None:
        self.c.assign(eid, color)
        if self.trace is not None:
            self.trace.record("assign", lemma, self.g.edges[eid], color)

    def _unassign(self, eid: int, lemma: str) -> int:
        prev = self.c.unassign(eid)
        if self.trace is not None:
            self.trace.record("unassign", lemma, self.g.edges[eid], None, prev)
        return prev

    def _recolor(self, eid: int, color: int, lemma: str) -> int:
        prev = self.c.unassign(eid)
        self.c.assign(eid, color)
        if self.trace is not None:
            self.trace.record("recolor", lemma, self.g.edges[eid], color, prev)
        return prev

    def _restore(self, snapshot: PartialColoring, lemma: str) -> None:
        diff = [e for e in range(self.g.m) if self.c.color[e] != snapshot.color[e]]
        for e in diff:
            if self.c.color[e] is not None:
                self._unassign(e, lemma)
        for e in diff:
            want = snapshot.color[e]
            if want is not None:
                self._assign(e, want, lemma)

    def _exchange(self, u: int, i: int, j: int, lemma: str) -> ExchangeOutcome:
        ei = self.g.edge_id(u, i)
        ej = self.g.edge_id(u, j)
        ci, cj = self.c.color[ei], self.c.color[ej]
        if ci in self.c.seen_across(u, j) or cj in self.c.seen_across(u, i):
            return ExchangeOutcome.NOT_PROPER
        self._unassign(ei, lemma)
        self._unassign(ej, lemma)
        self._assign(ei, cj, lemma)
        self._assign(ej, ci, lemma)
        return ExchangeOutcome.PROPER

    def _require(self, cond: bool, lemma: str, detail: str = "") -> None:
        if not cond:
            raise InternalInvariantViolation(lemma, detail)

    # -- present-graph helpers --------------------------------------------

    def _insert(self, eid: int) -> None:
        u, v = self.g.edges[eid]
        self.present[eid] = True
        self.deg[u] += 1
        self.deg[v] += 1

    def _present_neighbors(self, v: int):
        for w, eid in self.g.adj[v]:
            if self.present[eid]:
                yield w, eid

    def _partner(self, y: int, x: int) -> tuple[int, int]:
        """The present neighbor of y other than x, with the edge id."""
        for w, eid in self.g.adj[y]:
            if self.present[eid] and w != x:
                return w, eid
        raise InternalInvariantViolation("structure", f"vertex {y} has no partner")

    def _closes(self, v: int, first: int, second: int) -> bool:
        """True iff the alternating (first, second) walk from v returns to v."""
        if self.c.edge_at(v, first) is None:
            return False
        _, _, closed = _walk(self.c, v, first, second)
        return closed

    def _component_of(self, x: int) -> list[int]:
        seen = {x}
        stack = [x]
        while stack:
            v = stack.pop()
            for w, eid in self.g.adj[v]:
                if self.present[eid] and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return sorted(seen)

    # -- component driver --------------------------------------------------

    def color_component(self, comp: list[int]) -> None:
        plan, leftover = self._removal_plan(comp)
        self._color_cycles(leftover)
        for kind, eid, x in reversed(plan):
            self._insert(eid)
            if kind == PENDANT:
                self._extend_pendant(eid)
            else:
                self._extend_pivot_edge(eid, x)

    def _removal_plan(self, comp: list[int]):
        import heapq

        g = self.g
        comp_set = set(comp)
        alive: set[int] = set()
        for v in comp:
            for w, eid in g.adj[v]:
                if w in comp_set:
                    alive.add(eid)
        ldeg = {v: 0 for v in comp}
        for eid in alive:
            u, v = g.edges[eid]
            ldeg[u] += 1
            ldeg[v] += 1
        heap = [v for v in comp if ldeg[v] == 1]
        heapq.heapify(heap)
        plan: list[tuple[str, int, int | None]] = []

        def kill(eid: int) -> None:
            alive.discard(eid)
            for v in g.edges[eid]:
                ldeg[v] -= 1
                if ldeg[v] == 1:
                    heapq.heappush(heap, v)

        while alive:
            v = None
            while heap:
                cand = heapq.heappop(heap)
                if ldeg[cand] == 1:
                    v = cand
                    break
            if v is not None:
                eid = next(e for w, e in g.adj[v] if e in alive)
                plan.append((PENDANT, eid, None))
                kill(eid)
                continue
            if all(d in (0, 2) for d in ldeg.values()):
                break  # disjoint cycles remain
            verts = [u for u in comp if ldeg[u] >= 2]
            x, qcase, _, _, _ = _select_pivot(
                verts,
                lambda u: ldeg[u],
                lambda u: (w for w, e in g.adj[u] if e in alive),
            )
            y1 = min(w for w, e in g.adj[x] if e in alive and ldeg[w] == 2)
            eid = g.edge_id(x, y1)
            plan.append((PIVOT, eid, x))
            kill(eid)
        return plan, sorted(alive)

    def _color_cycles(self, edge_ids: list[int]) -> None:
        """Directly color the disjoint cycles formed by ``edge_ids``:
        alternate two colors with one third color on the closing edge."""
        g = self.g
        remaining = set(edge_ids)
        for eid in edge_ids:
            self._insert(eid)
        while remaining:
            start_eid = min(remaining)
            start = min(g.edges[start_eid])
            cycle_edges = []
            v = start
            prev_eid = -1
            while True:
                nxt = min(
                    (w, e)
                    for w, e in g.adj[v]
                    if e in remaining and e != prev_eid
                )
                cycle_edges.append(nxt[1])
                prev_eid = nxt[1]
                v = nxt[0]
                if v == start:
                    break
            for i, e in enumerate(cycle_edges):
                if i == len(cycle_edges) - 1:
                    color = 3
                else:
                    color = 1 if i % 2 == 0 else 2
                self._assign(e, color, "cycle-direct")
                remaining.discard(e)

    # -- easy insertions ---------------------------------------------------

    def _extend_pendant(self, eid: int) -> None:
        cands = sorted(self.c.candidate_colors(eid))
        self._require(bool(cands), "pendant", "no candidate for pendant edge")
        # a cycle through a degree-1 endpoint is impossible; any candidate works
        if self.assert_lemmas:
            self._require(
                is_valid_for(self.c, eid, cands[0]), "pendant", "candidate invalid"
            )
        self._assign(eid, cands[0], "pendant")

    # -- the extension cascade ----------------------------------------------

    def _extend_pivot_edge(self, eid: int, x: int) -> None:
        u, v = self.g.edges[eid]
        y1 = v if u == x else u
        if self.deg[y1] == 1 or self.deg[x] == 1:
            self._extend_pendant(eid)
            return
        if self._attempt_simple(x, y1):
            return
        self.stats.bump("hard")
        try:
            self._extend_hard(eid, x, y1)
            return
        except InternalInvariantViolation as exc:
            self.stats.invariant_violations.append(exc.lemma)
            logger.warning("invariant violation %s; engaging fallback", exc)
        self.stats.fallback_activations += 1
        self.stats.bump("fallback")
        logger.warning("bounded fallback search engaged at edge %s", self.g.edges[eid])
        # the pivot shift may have moved the uncolored edge; recompute it
        open_edges = [
            f for f in range(self.g.m) if self.present[f] and self.c.color[f] is None
        ]
        if len(open_edges) == 1:
            fu, fv = self.g.edges[open_edges[0]]
            fx, fy = (fu, fv) if fu == x else (fv, fu)
            if self._fallback(fx, fy):
                return
        raise CounterexampleFound(
            f"extension failed at edge {self.g.edges[eid]}",
            format_edge_list(self.g),
            "\n".join(self.trace.lines()) if self.trace else "",
        )

    def _attempt_simple(self, x: int, y1: int) -> bool:
        """Candidate trials under every proper pendant-partner recoloring
        (forward content of the first extension lemmas)."""
        ydash, ey = self._partner(y1, x)
        mu0 = self.c.color[ey]
        if self._try_direct(x, y1):
            return True
        for w in sorted(set(range(1, self.k + 1)) - self.c.colors_at(ydash)):
            self._recolor(ey, w, "pendant-recolor")
            if self._try_direct(x, y1):
                return True
        if self.c.color[ey] != mu0:
            self._recolor(ey, mu0, "pendant-restore")
        return False

    def _try_direct(self, x: int, y1: int) -> bool:
        """Candidate colors first (Fact 2), then each fan color via
        uncoloring its pivot edge and completing (the two-edge move)."""
        e = self.g.edge_id(x, y1)
        for beta in sorted(self.c.candidate_colors(e)):
            if is_valid_for(self.c, e, beta):
                self._assign(e, beta, "Fact 2")
                return True
        fan = []
        for w, eid in self._present_neighbors(x):
            if w != y1 and self.deg[w] == 2 and self.c.color[eid] is not None:
                fan.append((self.c.color[eid], w, eid))
        for gamma, ya, eya in sorted(fan):
            self._unassign(eya, "fan trial")
            if gamma in self.c.candidate_colors(e) and is_valid_for(self.c, e, gamma):
                self._assign(e, gamma, "fan trial")
                if self._color_any(eya, "fan completion"):
                    return True
                self._unassign(e, "fan trial undo")
            self._assign(eya, gamma, "fan trial restore")
        return False

    def _color_any(self, eid: int, lemma: str) -> bool:
        for beta in sorted(self.c.candidate_colors(eid)):
            if is_valid_for(self.c, eid, beta):
                self._assign(eid, beta, lemma)
                return True
        return False

    # -- hard path ----------------------------------------------------------

    def _extend_hard(self, eid: int, x: int, y1: int) -> None:
        ctx = self._build_context(x, y1)
        one, two = ctx.mu, ctx.nu
        snapshot = self.c.copy()  # the normalized base coloring of G - xy1
        if self.assert_lemmas:
            self._audit_base(ctx, y1, "base")

        # swap the colors of xq and xq' (always proper here)
        self.stats.bump("f1_swap")
        out = self._exchange(x, ctx.q, ctx.qdash, "f1 swap")
        self._require(out is ExchangeOutcome.PROPER, "Claim 2", "swap not proper")
        if self.assert_lemmas:
            self._require(check_property_a(self.c, ctx), "Property A", "after swap")

        cycles = self._fan_cycles(ctx)
        if not cycles:
            # the swap alone broke every blocking critical path
            self._require(self._color_any(eid, "Claim 2"), "Claim 2",
                          "swap left no valid candidate")
            return
        self._require(self.k >= 5, "Eq (3)", "bichromatic cycles with a small palette")
        c1 = sorted(g for cls, g, _, _ in cycles if cls == one)
        c2 = sorted(g for cls, g, _, _ in cycles if cls == two)
        self._require(not set(c1) & set(c2), "Eq (4)", "cycle classes intersect")
        if len(c1) >= 2:
            self.derange_bichromatic_fans(ctx, one, c1)
        if len(c2) >= 2:
            self.derange_bichromatic_fans(ctx, two, c2)
        if len(c1) >= 2 or len(c2) >= 2:
            self.stats.bump("derange")
            if self.assert_lemmas:
                self._require(check_property_a(self.c, ctx), "Property A",
                              "after derangement")

        cycles = self._fan_cycles(ctx)
        self._require(len(cycles) <= 2, "Claim 3", "derangement left extra cycles")
        if len(cycles) == 2:
            self.stats.bump("lemma12")
            done = self.reduce_to_single_cycle(ctx, cycles)
            if done:
                return
            cycles = self._fan_cycles(ctx)
        if not cycles:
            self._require(self._color_any(eid, "Claim 3"), "Claim 3",
                          "cycle-free coloring left no valid candidate")
            return
        self._require(len(cycles) == 1, "Lemma 12", "more than one cycle survives")
        if self.assert_lemmas:
            self._require(check_property_a(self.c, ctx), "Property A", "h1")

        # pivot shift: move the uncolored edge to the cycle's fan vertex
        self.stats.bump("shift")
        yj, yjdash = self.shift_pivot(ctx, eid, cycles[0])
        if yj is None:
            return  # extension of the shifted coloring succeeded outright
        ej = self.g.edge_id(x, yj)

        # secondary pivot endgame; retry over eligible secondary pivots
        pivots = self._secondary_candidates(ctx, snapshot)
        last: InternalInvariantViolation | None = None
        for p in pivots:
            before = self.c.copy()
            try:
                self._endgame(ctx, snapshot, p, eid, y1, ej, yj, yjdash)
                return
            except InternalInvariantViolation as exc:
                last = exc
                self._restore(before, "endgame retry")
        raise last if last else InternalInvariantViolation("Lemma 17", "no secondary pivot")

    def _build_context(self, x: int, y1: int) -> PivotContext:
        comp = self._component_of(x)
        verts = [v for v in comp if self.deg[v] >= 2]
        px, qcase, w0, w1, w2 = _select_pivot(
            verts,
            lambda u: self.deg[u],
            lambda u: (w for w, e in self.g.adj[u] if self.present[e]),
        )
        self._require(px == x, "pivot determinism",
                      f"recomputed pivot {px} != recorded {x}")
        ctx = _context_for(
            x, qcase, w0, w1, w2,
            lambda v: [w for w, e in self.g.adj[v] if self.present[e]],
        )
        ctx.y1 = y1
        ctx.ydash = {y: self._partner(y, x)[0] for y in ctx.nprime}
        self._require(len(ctx.ndprime) == 2, "Lemma 3",
                      f"|N''(x)| = {len(ctx.ndprime)}")
        self._require(ctx.q is not None and (ctx.q in ctx.w1 or ctx.q in ctx.w2),
                      "Assumption 1", "no designated q in W1 or W2")
        eq = self.g.edge_id(x, ctx.q)
        eqd = self.g.edge_id(x, ctx.qdash)
        one = self.c.color[eq]
        two = self.c.color[eqd]
        self._require(one is not None and two is not None and one != two,
                      "Lemma 3", "hub edges not distinctly colored")
        ctx.mu, ctx.nu = one, two
        ydash, ey = self._partner(y1, x)
        pend = self.c.color[ey]
        self._require(pend in (one, two), "Lemma 2",
                      "pendant partner color outside the hub colors")
        if pend != one:
            self._require(one not in self.c.colors_at(ydash), "Lemma 4",
                          "cannot normalize pendant partner color")
            self._recolor(ey, one, "Assumption 3")
        cprime = set(range(1, self.k + 1)) - {one, two}
        self._require(self.c.seen_across(x, ctx.q) == cprime, "Eq (1)", "S_xq")
        self._require(self.c.seen_across(x, ctx.qdash) == cprime, "Eq (1)", "S_xq'")
        self._require(self.c.seen_across(y1, ydash) == cprime, "Eq (1)", "S_y1y1'")
        return ctx

    def _fan_cycles(self, ctx: PivotContext):
        """Bichromatic cycles through x: (pendant class color, fan color,
        fan vertex, fan edge), sorted by fan color."""
        out = []
        for w, eid in self._present_neighbors(ctx.x):
            if w == ctx.y1 or self.deg[w] != 2:
                continue
            gamma = self.c.color[eid]
            if gamma is None:
                continue
            _, epend = self._partner(w, ctx.x)
            pend = self.c.color[epend]
            if pend not in (ctx.mu, ctx.nu):
                continue
            if self._closes(w, pend, gamma):
                out.append((pend, gamma, w, eid))
        out.sort(key=lambda t: t[1])
        return out

    def derange_bichromatic_fans(self, ctx: PivotContext, cls: int,
                                 gammas: list[int]) -> None:
        """Circularly shift the fan colors in ``gammas`` among their pivot
        edges; destroys every (cls, gamma) cycle at once."""
        edges = []
        for gamma in gammas:
            eid = self.c.edge_at(ctx.x, gamma)
            self._require(eid is not None, "Claim 3", "fan color missing at x")
            edges.append(eid)
        for eid in edges:
            self._unassign(eid, "derange")
        k = len(gammas)
        for j, eid in enumerate(edges):
            self._assign(eid, gammas[(j + 1) % k], "derange")
        for gamma in gammas:
            eid = self.c.edge_at(ctx.x, gamma)
            w = self.g.other_end(eid, ctx.x)
            self._require(not self._closes(w, cls, gamma), "Claim 3",
                          f"({cls},{gamma}) cycle survived the derangement")

    def reduce_to_single_cycle(self, ctx: PivotContext, cycles) -> bool:
        """Lemma 12: from one cycle in each class to at most one overall.
        Returns True when the move sequence already colored the edge."""
        by_class = {cls: (gamma, w, eid) for cls, gamma, w, eid in cycles}
        one, two = ctx.mu, ctx.nu
        self._require(set(by_class) == {one, two}, "Assumption 4",
                      "expected one cycle in each class")
        gamma, yj, exj = by_class[one]
        theta, yk, exk = by_class[two]
        yjdash, ejp = self._partner(yj, ctx.x)
        self._require(self.c.color[ejp] == one, "Assumption 4", "fan pendant color")
        if two in self.c.colors_at(yjdash):
            # constructive branch of the 2-in-S case
            free = sorted(set(range(1, self.k + 1)) - self.c.colors_at(yjdash))
            self._require(bool(free), "Claim 4", "no color free at y'_j")
            eta4 = free[0]
            self._require(eta4 not in (one, two, gamma), "Claim 4",
                          "free color clashes with the cycle colors")
            self._recolor(ejp, eta4, "Claim 4")
            if self._closes(yj, eta4, gamma):
                el = self.c.edge_at(ctx.x, eta4)
                self._require(el is not None, "Claim 4", "no eta edge at x")
                alpha = sorted(set(range(1, self.k + 1)) - self.c.colors_at(ctx.x))
                self._require(bool(alpha), "Assumption 2", "no color free at x")
                self._recolor(exj, alpha[0], "Claim 4")
                self._require(not self._closes(yj, eta4, alpha[0]), "Claim 4",
                              "recoloring the fan edge formed a cycle")
            return False
        self._require(two not in self.c.colors_at(yjdash), "Claim 4", "2 in S")
        self._recolor(ejp, two, "Lemma 12")
        if self._closes(yj, two, gamma):
            # both cycles now sit in the nu class; derange them away
            self.derange_bichromatic_fans(ctx, two, sorted((gamma, theta)))
            self._require(not self._fan_cycles(ctx), "Lemma 12",
                          "derangement left a cycle")
            e = self.g.edge_id(ctx.x, ctx.y1)
            self._require(self._color_any(e, "Lemma 12"), "Lemma 12",
                          "valid coloring left no candidate")
            return True
        return False

    def shift_pivot(self, ctx: PivotContext, eid: int, cycle) -> tuple:
        """Move the uncolored edge from xy1 to the lone cycle's fan vertex,
        then retry the simple cascade there.  Returns (None, None) when the
        retry colored everything; otherwise (yj, y'_j) with the coloring
        normalized so the shifted pendant partner carries nu."""
        cls, rho, yj, exj = cycle
        x, y1 = ctx.x, ctx.y1
        self._require(rho not in (ctx.mu, ctx.nu), "Observation 3", "rho in {1,2}")
        self._unassign(exj, "shift")
        self._assign(eid, rho, "shift")
        self._require(not self._closes(y1, ctx.mu, rho), "c_j validity",
                      "pivot shift created a cycle")
        if self.assert_lemmas:
            rep = verify_acyclic(self.g, self.c)
            self._require(rep.valid, "c_j validity", "full verify failed")
        yjdash, ejp = self._partner(yj, x)
        if self._attempt_simple(x, yj):
            return None, None
        pend = self.c.color[ejp]
        self._require(pend in (ctx.mu, ctx.nu), "Lemma 2", "shifted pendant color")
        if pend != ctx.nu:
            self._require(ctx.nu not in self.c.colors_at(yjdash), "Assumption 6",
                          "cannot give the shifted pendant color nu")
            self._recolor(ejp, ctx.nu, "Assumption 6")
        cprime = set(range(1, self.k + 1)) - {ctx.mu, ctx.nu}
        self._require(self.c.seen_across(yj, yjdash) == cprime, "Eq (1)", "S_yjyj'")
        return yj, yjdash

    def _secondary_candidates(self, ctx: PivotContext, snapshot: PartialColoring):
        low = ctx.w0 | ctx.w1
        return [
            w
            for w, eid in sorted(self.g.adj[ctx.q])
            if self.present[eid] and w != ctx.x and w in low
        ]

    def _endgame(self, ctx, snapshot, p, e1, y1, ej, yj, yjdash) -> None:
        """Secondary-pivot endgame (the two mirrored deep branches)."""
        x, q, one, two = ctx.x, ctx.q, ctx.mu, ctx.nu
        g = self.g
        eqp = g.edge_id(q, p)
        eta = snapshot.color[eqp]
        self._require(eta == self.c.color[eqp], "Lemma 16", "qp recolored")
        self._require(eta not in (one, two), "Eq (1)", "eta in the hub colors")
        nonlow = [w for w, eid in g.adj[p]
                  if self.present[eid] and w != q and self.deg[w] >= 3]
        self._require(len(nonlow) <= 1, "Lemma 17", "p has two high neighbors")
        if nonlow:
            pdash = nonlow[0]
        else:
            pdash = min(w for w, eid in g.adj[p] if self.present[eid] and w != q)
        zs = tuple(sorted(w for w, eid in g.adj[p]
                          if self.present[eid] and w not in (q, pdash)))
        for z in zs:
            self._require(self.deg[z] == 2, "structure", "z vertex not degree 2")
        forbidden = set(zs) | {p, pdash}
        zdash = {}
        for z in zs:
            zd, _ = self._partner(z, p)
            zdash[z] = zd
            forbidden.add(zd)
        self._require(x not in forbidden, "Lemma 15", "x inside the p cast")
        self._require(not (set(ctx.nprime) & forbidden), "Lemma 15",
                      "a degree-2 neighbor of x inside the p cast")
        s_qp = set(snapshot.colors_at(p)) - {eta}
        self._require({one, two} <= s_qp, "Lemma 17", "{1,2} not seen across qp")
        if self.assert_lemmas:
            self._audit_property_b(ctx, snapshot, eta, yjdash)
        e_one = snapshot.edge_at(p, one)
        e_two = snapshot.edge_at(p, two)
        self._require(self.c.color[e_one] == one and self.c.color[e_two] == two,
                      "Lemma 19", "p's hub-colored edges differ between colorings")
        epp = g.edge_id(p, pdash)
        if epp not in (e_one, e_two):
            self._lemma20_escape(ctx, snapshot, p, zs, eta, e_one, e_two, e1, y1)
            return
        branch = snapshot.color[epp]
        self._require(branch in (one, two), "Lemma 20", "pp' color out of range")
        sctx = SecondaryContext(p=p, pdash=pdash, eta=eta, z=zs, zdash=zdash,
                                branch=branch, rho=self.c.color[e1])
        if branch == two:
            self.stats.bump("endgame_c1")
            self._restore(snapshot, "Assumption 8")
            self.resolve_at_secondary(ctx, sctx, e1, y1, one, two)
        else:
            self.stats.bump("endgame_cj")
            self.resolve_at_secondary(ctx, sctx, ej, yj, two, one)

    def _lemma20_escape(self, ctx, snapshot, p, zs, eta, e_one, e_two, e1, y1):
        """Both hub colors sit on p-to-z edges: exchanging them breaks the
        blocking critical path outright."""
        self.stats.bump("lemma20_escape")
        g = self.g
        za = g.other_end(e_one, p)
        zb = g.other_end(e_two, p)
        self._require(za in zs and zb in zs, "Lemma 20", "hub edges not fan edges")
        self._restore(snapshot, "Lemma 20")
        exk = self.c.edge_at(ctx.x, eta)
        if exk is not None:
            self._unassign(exk, "Lemma 20")
        _, eza = self._partner(za, p)
        _, ezb = self._partner(zb, p)
        self._require(self.c.color[eza] == eta and self.c.color[ezb] == eta,
                      "Lemma 20", "z pendants do not carry eta")
        out = self._exchange(p, za, zb, "Lemma 20")
        self._require(out is ExchangeOutcome.PROPER, "Claim 5", "exchange not proper")
        self._require(not self._closes(za, eta, ctx.nu), "Claim 5", "cycle at za")
        self._require(not self._closes(zb, eta, ctx.mu), "Claim 5", "cycle at zb")
        self._require(not has_critical_path(self.c, ctx.mu, eta, ctx.x, y1),
                      "Claim 6", "critical path survived the exchange")
        self._finish_endgame(ctx, exk, eta, ctx.mu, ctx.nu, e1, y1)

    def resolve_at_secondary(self, ctx, sctx, e_base, y_base, a, b) -> None:
        """The d1/d2/d3 move chain at the secondary pivot: break the
        (a, eta) critical path by local recolorings only, then lift."""
        g = self.g
        p, pdash, eta = sctx.p, sctx.pdash, sctx.eta
        exk = self.c.edge_at(ctx.x, eta)
        if exk is not None:
            self._unassign(exk, "eta reduction")
        epp = g.edge_id(p, pdash)
        self._require(self.c.color[epp] == b, "Assumption 8", "pp' color changed")
        ez1 = self.c.edge_at(p, a)
        self._require(ez1 is not None and ez1 != epp, "Assumption 7",
                      "no fan edge carries the base color at p")
        z1 = g.other_end(ez1, p)
        self._require(z1 in sctx.z, "Assumption 7", "z1 not a fan vertex of p")
        z1dash, ez1p = self._partner(z1, p)
        self._require(self.c.color[ez1p] == eta, "Observation 4",
                      "z1's pendant edge does not carry eta")
        if b in self.c.colors_at(z1dash):
            # constructive branch of the b-in-S case
            self.stats.bump("lemma22_escape")
            free = sorted(set(range(1, self.k + 1)) - self.c.colors_at(z1dash))
            self._require(bool(free), "Lemma 22", "no color free at z1'")
            thetat = free[0]
            self._require(thetat not in (a, b, eta), "Lemma 22", "bad free color")
            self._recolor(ez1p, thetat, "Lemma 22")
            if self._closes(z1, a, thetat):
                mu_free = sorted(set(range(1, self.k + 1)) - self.c.colors_at(p)
                                 - {thetat})
                self._require(bool(mu_free), "Lemma 22", "no color free at p")
                self._recolor(ez1, mu_free[0], "Lemma 22")
                self._require(not self._closes(z1, thetat, mu_free[0]), "Lemma 22",
                              "recoloring pz1 formed a cycle")
            self._require(not has_critical_path(self.c, a, eta, ctx.x, y_base),
                          "Lemma 22", "critical path survived")
            self._finish_endgame(ctx, exk, eta, a, b, e_base, y_base)
            return
        # d1: free pz1 and move z1's pendant onto the pp' color
        self._recolor(ez1p, b, "d1")
        self._unassign(ez1, "d1")
        # a color at p with no blocking critical path ends the endgame early
        for gamma in sorted(set(range(1, self.k + 1)) - self.c.colors_at(p)):
            if is_valid_for(self.c, ez1, gamma):
                self.stats.bump("lemma23_escape")
                self._assign(ez1, gamma, "Lemma 23")
                self._require(not has_critical_path(self.c, a, eta, ctx.x, y_base),
                              "Lemma 23", "critical path survived")
                self._finish_endgame(ctx, exk, eta, a, b, e_base, y_base)
                return
        free_p = set(range(1, self.k + 1)) - self.c.colors_at(p)
        self._require(free_p <= self.c.colors_at(pdash), "Lemma 23",
                      "a free color at p is missing at p'")
        self._require(a in free_p, "Observation 6", "base color not free at p")
        mu2 = sorted(free_p - {a})
        self._require(bool(mu2), "Observation 6", "no second free color at p")
        sctx.mu2 = mu2[0]
        free_pd = sorted(set(range(1, self.k + 1)) - self.c.colors_at(pdash))
        self._require(bool(free_pd), "theta selection", "no color free at p'")
        theta = free_pd[0]
        self._require(theta in self.c.colors_at(p), "theta selection",
                      "theta not present at p")
        self._require(theta not in (a, b, eta, sctx.mu2), "theta selection",
                      "theta clashes with the cast colors")
        sctx.theta = theta
        ez2 = self.c.edge_at(p, theta)
        z2 = g.other_end(ez2, p)
        self._require(z2 in sctx.z and z2 != z1, "theta selection",
                      "theta edge is not a second fan edge")
        z2dash, ez2p = self._partner(z2, p)
        # d2: push theta from pz2 onto pz1
        self._unassign(ez2, "d2")
        self._recolor(ez1, theta, "d2")
        self._require(not self._closes(z1, b, theta), "d2",
                      "theta on pz1 closed a cycle")
        # d3: color pz2 with the base color or the spare free color
        sigma = self.c.color[ez2p]
        if sigma == b:
            self._assign(ez2, a, "Lemma 24")
            self._require(not self._closes(z2, b, a), "Lemma 24", "a-b cycle")
        elif sigma in (a, sctx.mu2):
            other = sctx.mu2 if sigma == a else a
            self._assign(ez2, other, "Lemma 24")
            self._require(not self._closes(z2, sigma, other), "Lemma 24",
                          "1-mu cycle")
        else:
            self._assign(ez2, a, "Lemma 24")
            if self._closes(z2, sigma, a):
                self._unassign(ez2, "Lemma 24")
                self._assign(ez2, sctx.mu2, "Lemma 24")
                self._require(not self._closes(z2, sigma, sctx.mu2), "Lemma 24",
                              "mu-sigma cycle")
        self._require(not has_critical_path(self.c, a, eta, ctx.x, y_base),
                      "Eq (8)", "critical path survived the endgame")
        self._finish_endgame(ctx, exk, eta, a, b, e_base, y_base)

    def _finish_endgame(self, ctx, exk, eta, a, b, e_base, y_base) -> None:
        if exk is not None:
            self._lift(ctx, exk, eta, a, b)
        self._require(self._try_direct(ctx.x, y_base), "Eq (8)",
                      "endgame finish found no valid extension")

    def _lift(self, ctx, exk: int, eta: int, a: int, b: int) -> None:
        """Recolor the fan edge whose color was discarded to reach the
        eta-reduced coloring (the derivability lemma, run forward)."""
        self.stats.bump("lift")
        g = self.g
        yk = g.other_end(exk, ctx.x)
        ykdash, eyk = self._partner(yk, ctx.x)
        self._assign(exk, eta, "Lemma 21")
        theta_h = self.c.color[eyk]
        if not self._closes(yk, theta_h, eta):
            return
        beta_h = theta_h
        if theta_h == b:
            pool = sorted(set(range(1, self.k + 1)) - self.c.colors_at(ykdash)
                          - {b, eta})
            self._require(bool(pool), "Lemma 21", "no recolor for yk's pendant")
            self._recolor(eyk, pool[0], "Lemma 21")
            if not self._closes(yk, pool[0], eta):
                return
            beta_h = pool[0]
        alpha = sorted(set(range(1, self.k + 1)) - self.c.colors_at(ctx.x))
        self._require(bool(alpha), "Lemma 21", "no color free at x")
        self._require(alpha[0] != beta_h, "Lemma 21", "alpha equals beta")
        self._recolor(exk, alpha[0], "Lemma 21")
        self._require(not self._closes(yk, beta_h, alpha[0]), "Lemma 21",
                      "lift recoloring formed a cycle")

    # -- audits (assert-lemmas mode) -----------------------------------------

    def _audit_base(self, ctx: PivotContext, y1: int, tag: str) -> None:
        """Critical-path structure of the normalized base coloring: for every
        non-hub color a blocking critical path exists, avoids the other
        degree-2 neighbors of x, and has length at least five."""
        work = self.c.copy()
        x, one = ctx.x, ctx.mu
        others = set(ctx.nprime) - {y1}
        for gamma in range(1, self.k + 1):
            if gamma in (ctx.mu, ctx.nu):
                continue
            removed = work.edge_at(x, gamma)
            if removed is not None:
                work.unassign(removed)
            verts, last, closed = _walk(work, x, one, gamma)
            self._require(not closed and last == one and verts[-1] == y1,
                          "Lemma 5/7", f"{tag}: no ({one},{gamma}) critical path")
            self._require(len(verts) - 1 >= 5, "Lemma 10",
                          f"{tag}: critical path shorter than five")
            self._require(not (set(verts) & others), "Lemma 9",
                          f"{tag}: critical path touches another fan vertex")
            if removed is not None:
                work.assign(removed, gamma)

    def _audit_property_b(self, ctx, snapshot, eta, yjdash) -> None:
        work = snapshot.copy()
        removed = work.edge_at(ctx.x, eta)
        if removed is not None:
            work.unassign(removed)
        self._require(check_property_b(work, ctx, yjdash), "Lemma 14",
                      "Property B fails for the eta-reduced base coloring")

    # -- bounded fallback -----------------------------------------------------

    def _fallback(self, x: int, y1: int, depth: int = 8,
                  node_cap: int = 20000) -> bool:
        """Depth-limited backtracking over local recoloring moves; per the
        theorem it should never be needed, so activations are logged loudly
        and counted."""
        seen: set[tuple] = set()
        nodes = [0]

        def moves():
            out = []
            for f in range(self.g.m):
                if not self.present[f] or self.c.color[f] is None:
                    continue
                u, v = self.g.edges[f]
                if self.deg[u] != 2 and self.deg[v] != 2:
                    continue
                cur = self.c.color[f]
                taken = self.c.colors_at(u) | self.c.colors_at(v)
                for w in range(1, self.k + 1):
                    if w != cur and w not in taken:
                        out.append(("recolor", f, w))
            xe = [e for _, e in self._present_neighbors(x)
                  if self.c.color[e] is not None]
            for i in range(len(xe)):
                for j in range(i + 1, len(xe)):
                    out.append(("swap", xe[i], xe[j]))
            return out

        def ok_state() -> bool:
            rep = verify_acyclic(self.g, self.c)
            return rep.valid

        def search(d: int) -> bool:
            nodes[0] += 1
            if nodes[0] > node_cap:
                return False
            key = self.c.state_key()
            if key in seen:
                return False
            seen.add(key)
            if self._try_direct(x, y1):
                return True
            if d == 0:
                return False
            for move in moves():
                if move[0] == "recolor":
                    _, f, w = move
                    prev = self._recolor(f, w, "fallback")
                    if ok_state() and search(d - 1):
                        return True
                    self._recolor(f, prev, "fallback undo")
                else:
                    _, fa, fb = move
                    ua, va = self.g.edges[fa]
                    ub, vb = self.g.edges[fb]
                    shared = {ua, va} & {ub, vb}
                    if not shared:
                        continue
                    u = shared.pop()
                    i = va if ua == u else ua
                    j = vb if ub == u else ub
                    if self._exchange(u, i, j, "fallback") is ExchangeOutcome.PROPER:
                        if ok_state() and search(d - 1):
                            return True
                        self._exchange(u, i, j, "fallback undo")
            return False

        return search(depth)


def acyclic_edge_color(
    g: Graph,
    *,
    assert_lemmas: bool = False,
    stats: EngineStats | None = None,
    trace: MoveTrace | None = None,
) -> PartialColoring:
    """Total acyclic edge coloring of a 2-degenerate graph over the palette
    {1..max_degree+1}; disconnected input is colored per component against
    the global palette."""
    po = peel_order(g)
    if po.degeneracy > 2:
        raise NotTwoDegenerate(f"degeneracy {po.degeneracy} > 2")
    k = max(1, max_degree(g) + 1)
    c = PartialColoring(g, k)
    if g.m == 0:
        return c
    ext = _Extender(g, c, assert_lemmas, stats or EngineStats(), trace)
    for comp in connected_components(g):
        if len(comp) > 1:
            ext.color_component(sorted(comp))
    report = verify_acyclic(g, c)
    if not (report.valid and report.total):
        raise InternalInvariantViolation("final verify", "output coloring invalid")
    return c


def extend_edge(
    c: PartialColoring,
    eid: int,
    ctx: PivotContext | None = None,
    *,
    assert_lemmas: bool = False,
    stats: EngineStats | None = None,
) -> MoveTrace:
    """Extend a valid coloring of G - e to all of G, where the prefix graph
    is the set of colored edges plus ``e``.  Returns the move trace."""
    trace = MoveTrace()
    ext = _Extender(c.g, c, assert_lemmas, stats or EngineStats(), trace)
    for f in range(c.g.m):
        if f == eid or c.color[f] is not None:
            ext._insert(f)
    u, v = c.g.edges[eid]
    if ctx is not None:
        x = ctx.x if ctx.x in (u, v) else None
        if x is None:
            raise EngineError("context pivot is not an endpoint of the edge")
        y = v if x == u else u
    else:
        x, y = (u, v) if (ext.deg[u], -u) >= (ext.deg[v], -v) else (v, u)
    if ext.deg[x] == 1 or ext.deg[y] == 1:
        ext._extend_pendant(eid)
    else:
        ext._extend_pivot_edge(eid, x)
    return trace
