"""Correspondence configurations as directed multigraphs.

A vertex is a camera and an edge ``(u, v)`` is a correspondence seen by camera
``u`` in view 1 and camera ``v`` in view 2.  Loops and repeated edges are
allowed, isolated vertices are not.  Two configurations are the same if the
graphs are isomorphic, possibly after reversing every edge (swapping views).

Vertices are stored 0-based and contiguous.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product

from .solvers import MatchType, match_type_from_multiplicities


@dataclass(frozen=True)
class DirectedMultigraph:
    edges: tuple

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        if any(u < 0 or v < 0 for u, v in edges):
            raise ValueError("vertex labels must be non-negative")
        used = sorted({w for e in edges for w in e})
        if used != list(range(len(used))):
            # relabel to 0..V-1 keeping the order of the given labels
            remap = {w: k for k, w in enumerate(used)}
            edges = tuple((remap[u], remap[v]) for u, v in edges)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_rows(cls, top, bottom) -> "DirectedMultigraph":
        """From the 2 x n table of view-1 and view-2 camera labels."""
        return cls(tuple(zip(top, bottom)))

    @classmethod
    def from_pcs(cls, pcs) -> "DirectedMultigraph":
        return cls(tuple(pc.pair for pc in pcs))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return 1 + max((max(e) for e in self.edges), default=-1)

    def reverse(self) -> "DirectedMultigraph":
        return DirectedMultigraph(tuple((v, u) for u, v in self.edges))

    def multiplicities(self) -> Counter:
        return Counter(self.edges)

    def as_rows(self):
        return [u for u, _ in self.edges], [v for _, v in self.edges]

    @cached_property
    def canonical(self) -> tuple:
        return canonical_form(self)

    def __eq__(self, other):
        return isinstance(other, DirectedMultigraph) and self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)


def _signatures(edges, nv):
    out = [0] * nv
    inn = [0] * nv
    loops = [0] * nv
    for u, v in edges:
        if u == v:
            loops[u] += 1
        else:
            out[u] += 1
            inn[v] += 1
    return [(out[w], inn[w], loops[w]) for w in range(nv)]


def _components(edges, nv):
    parent = list(range(nv))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        parent[find(u)] = find(v)
    groups: dict = {}
    for e in edges:
        groups.setdefault(find(e[0]), []).append(e)
    return list(groups.values())


def _component_form(edges) -> tuple:
    """Lexicographically smallest sorted edge list over signature-respecting labelings."""
    verts = sorted({w for e in edges for w in e})
    local = {w: k for k, w in enumerate(verts)}
    edges = [(local[u], local[v]) for u, v in edges]
    sig = _signatures(edges, len(verts))
    classes: dict = {}
    for w, s in enumerate(sig):
        classes.setdefault(s, []).append(w)
    keys = sorted(classes)
    best = None
    # vertices in smaller signature classes get smaller labels
    for perms in product(*(permutations(classes[k]) for k in keys)):
        label = {}
        nxt = 0
        for block in perms:
            for w in block:
                label[w] = nxt
                nxt += 1
        form = tuple(sorted((label[u], label[v]) for u, v in edges))
        if best is None or form < best:
            best = form
    return (tuple(keys), best)


def _oriented_form(edges, nv) -> tuple:
    return tuple(sorted(_component_form(c) for c in _components(edges, nv)))


def canonical_form(g: DirectedMultigraph) -> tuple:
    """Invariant under vertex relabeling and under reversing every edge."""
    nv = g.n_vertices
    fwd = _oriented_form(g.edges, nv)
    bwd = _oriented_form([(v, u) for u, v in g.edges], nv)
    return min(fwd, bwd)


def _isomorphic(g_edges, h_edges, nv) -> bool:
    """Backtracking vertex map with signature pruning; multiplicities must agree."""
    if len(g_edges) != len(h_edges):
        return False
    gs, hs = _signatures(g_edges, nv), _signatures(h_edges, nv)
    if sorted(gs) != sorted(hs):
        return False
    gm, hm = Counter(g_edges), Counter(h_edges)
    # map the most constrained vertices first
    sig_count = Counter(gs)
    order = sorted(range(nv), key=lambda w: (sig_count[gs[w]], -sum(gs[w])))
    f = {}
    used = set()

    def consistent(a, b):
        if gm[(a, a)] != hm[(b, b)]:
            return False
        for x, y in f.items():
            if gm[(a, x)] != hm[(b, y)] or gm[(x, a)] != hm[(y, b)]:
                return False
        return True

    def extend(k):
        if k == nv:
            return True
        a = order[k]
        for b in range(nv):
            if b in used or hs[b] != gs[a] or not consistent(a, b):
                continue
            f[a] = b
            used.add(b)
            if extend(k + 1):
                return True
            del f[a]
            used.discard(b)
        return False

    return extend(0)


def graphs_equivalent(g: DirectedMultigraph, h: DirectedMultigraph) -> bool:
    """Isomorphic as directed multigraphs, directly or after reversing all edges of ``h``."""
    if g.n_vertices != h.n_vertices or g.n_edges != h.n_edges:
        return False
    nv = g.n_vertices
    if _isomorphic(g.edges, h.edges, nv):
        return True
    return _isomorphic(g.edges, tuple((v, u) for u, v in h.edges), nv)


def _extensions(g: DirectedMultigraph):
    """Add one edge touching at most the existing vertices plus one or two new ones."""
    nv = g.n_vertices
    for u in range(nv + 1):
        for v in range(nv + 1):
            yield DirectedMultigraph(g.edges + ((u, v),))
    yield DirectedMultigraph(g.edges + ((nv, nv + 1),))


def enumerate_configs(n: int) -> list[DirectedMultigraph]:
    """All distinct ``n``-edge configurations, grown one edge at a time."""
    if not 1 <= n <= 7:
        raise ValueError("edge count must be between 1 and 7")
    level = [DirectedMultigraph(())]
    for _ in range(n):
        seen: dict = {}
        for g in level:
            for cand in _extensions(g):
                seen.setdefault(cand.canonical, cand)
        level = [seen[k] for k in sorted(seen)]
    return level


def classify_match_type(g: DirectedMultigraph) -> MatchType:
    return match_type_from_multiplicities(g.multiplicities().values())


def count_by_cameras(graphs) -> dict[int, int]:
    hist = Counter(g.n_vertices for g in graphs)
    return {k: hist[k] for k in range(1, max(hist) + 1)} if hist else {}


def count_by_match_type(graphs) -> dict[MatchType, int]:
    hist = Counter(classify_match_type(g) for g in graphs)
    return {mt: hist.get(mt, 0) for mt in MatchType}
