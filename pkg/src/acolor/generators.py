"""Deterministic graph generators for tests and benchmarks: cycles, paths,
stars, trees, outerplanar and series-parallel graphs, non-regular subcubic
graphs, K_{2,k}, and general random 2-degenerate graphs.

All randomness flows through a splitmix64 generator pinned by its reference
constants, so any implementation of these generators reproduces identical
corpora from the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Graph, from_edge_list

_M64 = (1 << 64) - 1

FAMILIES = (
    "cycle",
    "path",
    "star",
    "tree",
    "outerplanar",
    "series_parallel",
    "subcubic_nonregular",
    "random_2_degenerate",
    "complete_bipartite_2k",
)


class BadSpec(ValueError):
    pass


class SplitMix64:
    """splitmix64 (Steele et al. reference constants)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _M64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _M64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n); modulo bias is irrelevant here."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return self.next() % n

    def choice(self, seq):
        return seq[self.below(len(seq))]


@dataclass(frozen=True)
class GenSpec:
    """One generator request; deterministic in (family, n, seed, extra)."""

    family: str
    n: int
    seed: int = 0
    extra: tuple[tuple[str, int], ...] = ()

    def extra_dict(self) -> dict[str, int]:
        return dict(self.extra)


_MINIMUM_N = {
    "cycle": 3,
    "path": 2,
    "star": 2,
    "tree": 1,
    "outerplanar": 3,
    "series_parallel": 2,
    "subcubic_nonregular": 2,
    "random_2_degenerate": 1,
    "complete_bipartite_2k": 3,
}


def generate(spec: GenSpec) -> Graph:
    if spec.family not in FAMILIES:
        raise BadSpec(f"unknown family {spec.family!r}")
    if spec.n < _MINIMUM_N[spec.family]:
        raise BadSpec(f"{spec.family} needs n >= {_MINIMUM_N[spec.family]}")
    rng = SplitMix64(spec.seed)
    builder = globals()[f"_gen_{spec.family}"]
    return builder(spec.n, rng, spec.extra_dict())


def _gen_cycle(n: int, rng: SplitMix64, extra: dict) -> Graph:
    return from_edge_list(n, [(i, (i + 1) % n) for i in range(n)])


def _gen_path(n: int, rng: SplitMix64, extra: dict) -> Graph:
    return from_edge_list(n, [(i, i + 1) for i in range(n - 1)])


def _gen_star(n: int, rng: SplitMix64, extra: dict) -> Graph:
    return from_edge_list(n, [(0, i) for i in range(1, n)])


def _gen_tree(n: int, rng: SplitMix64, extra: dict) -> Graph:
    pairs = [(rng.below(i), i) for i in range(1, n)]
    return from_edge_list(n, pairs)


def _gen_outerplanar(n: int, rng: SplitMix64, extra: dict) -> Graph:
    """Random triangulation of an n-gon (maximal outerplanar, 2-degenerate)."""
    pairs = [(i, (i + 1) % n) for i in range(n)]

    def split(lo: int, hi: int) -> None:
        # chord lo..hi is already present; triangulate the chain between
        if hi - lo < 2:
            return
        mid = lo + 1 + rng.below(hi - lo - 1)
        if mid - lo >= 2:
            pairs.append((lo, mid))
        if hi - mid >= 2:
            pairs.append((mid, hi))
        split(lo, mid)
        split(mid, hi)

    split(0, n - 1)
    return from_edge_list(n, pairs)


def _gen_series_parallel(n: int, rng: SplitMix64, extra: dict) -> Graph:
    """Random series/parallel composition over ~n edges.

    Parallel composition is only applied when both sides have at least two
    edges, which keeps the result simple (no side then carries a direct
    terminal-to-terminal edge).
    """
    target_edges = max(1, n)

    def build(m: int) -> tuple[list[tuple[int, int]], int, int, int]:
        # returns (edges, s, t, vertex_count) with s=0, t=vertex_count-1 slots
        if m == 1:
            return [(0, 1)], 0, 1, 2
        m1 = 1 + rng.below(m - 1)
        m2 = m - m1
        parallel_ok = m1 >= 2 and m2 >= 2
        a_edges, a_s, a_t, a_n = build(m1)
        b_edges, b_s, b_t, b_n = build(m2)
        if parallel_ok and rng.below(2) == 0:
            # merge a_s=b_s and a_t=b_t
            remap = {}
            offset = a_n
            for v in range(b_n):
                if v == b_s:
                    remap[v] = a_s
                elif v == b_t:
                    remap[v] = a_t
                else:
                    remap[v] = offset
                    offset += 1
            edges = a_edges + [(remap[u], remap[v]) for u, v in b_edges]
            return edges, a_s, a_t, offset
        # series: merge a_t with b_s
        remap = {}
        offset = a_n
        for v in range(b_n):
            if v == b_s:
                remap[v] = a_t
            else:
                remap[v] = offset
                offset += 1
        edges = a_edges + [(remap[u], remap[v]) for u, v in b_edges]
        return edges, a_s, remap[b_t], offset

    edges, _, _, count = build(target_edges)
    return from_edge_list(count, edges)


def _gen_subcubic_nonregular(n: int, rng: SplitMix64, extra: dict) -> Graph:
    """Connected subcubic graph with at least one vertex of degree <= 2.

    Random degree-capped tree plus extra edges, stopping strictly below
    3n/2 edges so the graph cannot be 3-regular (hence 2-degenerate).
    """
    deg = [0] * n
    pairs: list[tuple[int, int]] = []
    present: set[tuple[int, int]] = set()

    def add(u: int, v: int) -> None:
        pairs.append((u, v))
        present.add((u, v) if u < v else (v, u))
        deg[u] += 1
        deg[v] += 1

    for i in range(1, n):
        open_slots = [v for v in range(i) if deg[v] < 3]
        add(rng.choice(open_slots), i)
    max_edges = (3 * n) // 2 - 1
    for _ in range(2 * n):
        if len(pairs) >= max_edges:
            break
        open_slots = [v for v in range(n) if deg[v] < 3]
        if len(open_slots) < 2:
            break
        u = rng.choice(open_slots)
        v = rng.choice(open_slots)
        key = (u, v) if u < v else (v, u)
        if u == v or key in present:
            continue
        add(u, v)
    return from_edge_list(n, pairs)


def _gen_random_2_degenerate(n: int, rng: SplitMix64, extra: dict) -> Graph:
    """Add vertices one at a time, each joined to at most two uniformly
    chosen earlier vertices; this construction characterizes 2-degenerate
    graphs exactly.  ``extra['max_degree']`` caps degrees (for benches)."""
    cap = extra.get("max_degree", 0)
    deg = [0] * n
    pairs: list[tuple[int, int]] = []
    for i in range(1, n):
        want = 1 if i == 1 else (2 if rng.below(3) < 2 else 1)
        pool = [v for v in range(i) if not cap or deg[v] < cap]
        if not pool:
            continue
        first = rng.choice(pool)
        targets = [first]
        if want == 2 and len(pool) > 1:
            second = rng.choice(pool)
            if second != first:
                targets.append(second)
        for v in targets:
            pairs.append((v, i))
            deg[v] += 1
            deg[i] += 1
    return from_edge_list(n, pairs)


def _gen_complete_bipartite_2k(n: int, rng: SplitMix64, extra: dict) -> Graph:
    # K_{2, n-2}: sides {0,1} and {2..n-1}
    return from_edge_list(n, [(s, i) for s in (0, 1) for i in range(2, n)])


def generate_corpus(count: int, n_lo: int, n_hi: int, seed: int) -> list[Graph]:
    """Mixed-family deterministic corpus; every graph is 2-degenerate."""
    if count < 0 or n_lo > n_hi:
        raise BadSpec("bad corpus parameters")
    rng = SplitMix64(seed)
    graphs: list[Graph] = []
    for i in range(count):
        family = FAMILIES[i % len(FAMILIES)]
        lo = max(n_lo, _MINIMUM_N[family])
        hi = max(n_hi, lo)
        n = lo + rng.below(hi - lo + 1)
        graphs.append(generate(GenSpec(family, n, seed=rng.next())))
    return graphs
