"""Decomposable (chordal) graph primitives.

Vertices are indices 0..n-1 and vertex sets are plain ints used as bit
masks, which keeps subset and intersection tests cheap in every inner
loop (and, ints being arbitrary precision, works beyond 64 vertices).
Graphs are immutable values; induced subgraphs keep the original vertex
labels so that induced pieces of different host graphs compare by
value.

Recognition is maximum cardinality search with an integrated perfect
elimination check; cliques, junction-tree orderings and separator
multisets are derived from the same search. Exhaustive enumeration walks
edge-set bitmasks in ascending numeric order and filters by chordality.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import CapacityError, DomainError, PreconditionError

#: Sanity cap on vertex counts; masks themselves have no width limit.
MAX_VERTICES = 1024

#: Default cap for exhaustive enumeration (2^21 labelled graphs at n=7).
ENUMERATION_LIMIT = 7


def vset(vertices: Iterable[int]) -> int:
    """Bit mask of a collection of vertex indices."""
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members(mask: int) -> list[int]:
    """Sorted vertex indices packed in a bit mask."""
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask ^= b
    return out


def _full_mask(n: int) -> int:
    return (1 << n) - 1


@lru_cache(maxsize=None)
def _pairs(n: int) -> tuple[tuple[int, int], ...]:
    """Unordered vertex pairs of an n-vertex graph, in ascending (i, j) order.

    Position k in this tuple is bit k of an edge mask.
    """
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _pair_bits(n: int) -> dict[tuple[int, int], int]:
    return {p: 1 << k for k, p in enumerate(_pairs(n))}


@lru_cache(maxsize=1 << 20)
def within_edge_mask(n: int, vmask: int) -> int:
    """Edge mask of the complete graph on the vertices in ``vmask``."""
    bits = _pair_bits(n)
    vs = members(vmask)
    m = 0
    for x, i in enumerate(vs):
        for j in vs[x + 1:]:
            m |= bits[(i, j)]
    return m


def _mcs(n: int, adj, vmask: int):
    """Maximum cardinality search over the vertices in ``vmask``.

    Ties break toward the lowest vertex index. Returns ``(order, ok)``
    where ``order`` is the visit order and ``ok`` is True iff the induced
    graph is chordal; the check verifies, as each vertex is visited, that
    its previously visited neighbours minus the most recent one are all
    adjacent to that most recent one, which for an MCS order holds for
    every vertex exactly when the graph is chordal.
    """
    w = [0] * n
    order: list[int] = []
    append = order.append
    numbered = 0
    un = vmask
    while un:
        best = -1
        bw = -1
        m = un
        while m:
            b = m & -m
            v = b.bit_length() - 1
            if w[v] > bw:
                bw = w[v]
                best = v
            m ^= b
        v = best
        av = adj[v]
        prior = av & numbered
        if prior:
            p = -1
            for u in reversed(order):
                if prior >> u & 1:
                    p = u
                    break
            if prior & ~(adj[p] | (1 << p)):
                return order, False
        append(v)
        bv = 1 << v
        numbered |= bv
        un ^= bv
        m = av & un
        while m:
            b = m & -m
            w[b.bit_length() - 1] += 1
            m ^= b
    return order, True


def _mcs_cliques(n: int, adj, vmask: int) -> list[int]:
    """Maximal cliques of a chordal graph, as masks, in MCS emission order.

    Runs the same search as :func:`_mcs` and grows a running clique,
    emitting it whenever the next visited vertex fails to extend it.
    """
    w = [0] * n
    numbered = 0
    un = vmask
    current = 0
    out: list[int] = []
    while un:
        best = -1
        bw = -1
        m = un
        while m:
            b = m & -m
            v = b.bit_length() - 1
            if w[v] > bw:
                bw = w[v]
                best = v
            m ^= b
        v = best
        av = adj[v]
        bv = 1 << v
        if current == 0:
            current = bv
        elif current & ~av:
            out.append(current)
            current = (av & numbered) | bv
        else:
            current |= bv
        numbered |= bv
        un ^= bv
        m = av & un
        while m:
            b = m & -m
            w[b.bit_length() - 1] += 1
            m ^= b
    if current:
        out.append(current)
    return out


class Graph:
    """Immutable undirected graph on labelled vertices 0..n-1.

    ``vertices`` is the active vertex set (a bit mask); it is all of
    0..n-1 except for induced subgraphs, which keep their host's labels.
    Equality and hashing use ``(n, vertices, edge_mask)``.
    """

    __slots__ = ("n", "vertices", "adj", "edge_mask", "_chordal", "_peo", "_summary")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), vertices: int | None = None):
        if not 1 <= n <= MAX_VERTICES:
            raise DomainError(f"vertex count must be in 1..{MAX_VERTICES}, got {n}")
        full = _full_mask(n)
        if vertices is None:
            vertices = full
        elif vertices & ~full:
            raise DomainError("vertex set outside 0..n-1")
        bits = _pair_bits(n)
        adj = [0] * n
        emask = 0
        for i, j in edges:
            if i == j:
                raise DomainError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise DomainError(f"edge ({i},{j}) out of range for n={n}")
            if not (vertices >> i & 1 and vertices >> j & 1):
                raise DomainError(f"edge ({i},{j}) joins an inactive vertex")
            b = bits[(i, j)]
            if emask & b:
                raise DomainError(f"duplicate edge ({i},{j})")
            emask |= b
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        self.n = n
        self.vertices = vertices
        self.adj = tuple(adj)
        self.edge_mask = emask
        self._chordal: bool | None = None
        self._peo: tuple[int, ...] | None = None
        self._summary = None

    @classmethod
    def _from_parts(cls, n, vertices, adj, edge_mask, peo=None) -> "Graph":
        g = object.__new__(cls)
        g.n = n
        g.vertices = vertices
        g.adj = adj
        g.edge_mask = edge_mask
        g._chordal = True if peo is not None else None
        g._peo = peo
        g._summary = None
        return g

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edge_mask(n, _full_mask(n * (n - 1) // 2))

    @classmethod
    def from_edge_mask(cls, n: int, edge_mask: int, vertices: int | None = None) -> "Graph":
        pairs = _pairs(n)
        if edge_mask >> len(pairs):
            raise DomainError("edge mask has bits beyond the pair range")
        edges = []
        m = edge_mask
        while m:
            b = m & -m
            edges.append(pairs[b.bit_length() - 1])
            m ^= b
        return cls(n, edges, vertices)

    def edges(self) -> list[tuple[int, int]]:
        pairs = _pairs(self.n)
        out = []
        m = self.edge_mask
        while m:
            b = m & -m
            out.append(pairs[b.bit_length() - 1])
            m ^= b
        return out

    def has_edge(self, i: int, j: int) -> bool:
        if not (self.vertices >> i & 1 and self.vertices >> j & 1):
            raise DomainError(f"vertex pair ({i},{j}) not active")
        return bool(self.adj[i] >> j & 1)

    def with_edge_toggled(self, i: int, j: int) -> "Graph":
        if i == j:
            raise DomainError("cannot toggle a self-loop")
        if not (self.vertices >> i & 1 and self.vertices >> j & 1):
            raise DomainError(f"vertex pair ({i},{j}) not active")
        if i > j:
            i, j = j, i
        adj = list(self.adj)
        adj[i] ^= 1 << j
        adj[j] ^= 1 << i
        b = _pair_bits(self.n)[(i, j)]
        return Graph._from_parts(self.n, self.vertices, tuple(adj), self.edge_mask ^ b)

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.vertices == other.vertices
            and self.edge_mask == other.edge_mask
        )

    def __hash__(self):
        return hash((self.n, self.vertices, self.edge_mask))

    def __repr__(self):
        extra = "" if self.vertices == _full_mask(self.n) else f", vertices={members(self.vertices)}"
        return f"Graph(n={self.n}, edges={self.edges()}{extra})"


def _check_subset(a: int, universe: int, what: str) -> None:
    if a & ~universe:
        raise DomainError(f"{what} contains vertices outside the graph: {members(a & ~universe)}")


def is_complete(g: Graph, a: int) -> bool:
    """True iff every pair of vertices in ``a`` is an edge of ``g``."""
    _check_subset(a, g.vertices, "vertex set")
    m = a
    while m:
        b = m & -m
        v = b.bit_length() - 1
        if a & ~(g.adj[v] | b):
            return False
        m ^= b
    return True


def induced_subgraph(g: Graph, a: int) -> Graph:
    """Subgraph induced on ``a``, keeping the original vertex labels."""
    _check_subset(a, g.vertices, "vertex set")
    adj = tuple(g.adj[v] & a if a >> v & 1 else 0 for v in range(g.n))
    emask = g.edge_mask & within_edge_mask(g.n, a)
    return Graph._from_parts(g.n, a, adj, emask)


def is_decomposable(g: Graph) -> bool:
    """True iff ``g`` is chordal; caches a perfect elimination ordering."""
    if g._chordal is None:
        order, ok = _mcs(g.n, g.adj, g.vertices)
        g._chordal = ok
        if ok:
            g._peo = tuple(reversed(order))
    return g._chordal


def elimination_ordering(g: Graph) -> tuple[int, ...]:
    """A perfect elimination ordering of a decomposable graph."""
    _require_decomposable(g)
    return g._peo  # type: ignore[return-value]


def _require_decomposable(g: Graph) -> None:
    if not is_decomposable(g):
        raise PreconditionError("graph is not decomposable")


def cliques(g: Graph) -> tuple[int, ...]:
    """Maximal complete vertex sets of a decomposable graph, as masks."""
    return clique_separators(g)[0]


def clique_separators(g: Graph) -> tuple[tuple[int, ...], Counter]:
    """Cached ``(cliques, separator multiset)`` of a decomposable graph.

    The separator multiset maps each separator mask to its multiplicity;
    it is invariant across junction trees, so one canonical ordering
    suffices.
    """
    if g._summary is None:
        _require_decomposable(g)
        cl = tuple(_mcs_cliques(g.n, g.adj, g.vertices))
        if len(cl) > 1:
            seps = Counter(pluperfect_order(g, 0, _cliques=cl).separators)
        else:
            seps = Counter()
        g._summary = (cl, seps)
    return g._summary


@dataclass(frozen=True)
class PluperfectOrder:
    """Cliques in visitation order with the separators and parents joining them.

    ``separators[k]`` is the intersection of ``cliques[k+1]`` with the
    union of all earlier cliques, and is contained in the earlier clique
    ``cliques[parents[k]]``; linking each clique to its parent yields a
    junction tree. Orderings constructed here always pick an attachable
    clique whose separator has maximal cardinality, so no alternative
    choice could produce a strict superset separator at any step.
    """

    n: int
    cliques: tuple[int, ...]
    separators: tuple[int, ...]
    parents: tuple[int, ...]


def pluperfect_order(g: Graph, first: int | None = None, _cliques=None) -> PluperfectOrder:
    """Order the cliques of ``g`` greedily by largest attachment separator.

    ``first`` indexes into :func:`cliques` and selects the starting
    clique; any clique may start. Ties break toward the earliest clique
    in the base ordering, and the parent is the earliest ordered clique
    containing the separator.
    """
    cl = _cliques if _cliques is not None else cliques(g)
    j = len(cl)
    if first is None:
        first = 0
    if not 0 <= first < j:
        raise DomainError(f"first clique index {first} out of range for {j} cliques")
    order = [cl[first]]
    seps: list[int] = []
    parents: list[int] = []
    remaining = [k for k in range(j) if k != first]
    covered = cl[first]
    while remaining:
        best_k = -1
        best_pos = -1
        best_size = -1
        for pos, k in enumerate(remaining):
            s = cl[k] & covered
            size = s.bit_count()
            if size > best_size and any(s & ~c == 0 for c in order):
                best_size = size
                best_k = k
                best_pos = pos
        if best_k < 0:  # unreachable for a decomposable graph
            raise PreconditionError("no attachable clique; graph is not decomposable")
        del remaining[best_pos]
        c = cl[best_k]
        s = c & covered
        parent = next(i for i, o in enumerate(order) if s & ~o == 0)
        order.append(c)
        seps.append(s)
        parents.append(parent)
        covered |= c
    return PluperfectOrder(g.n, tuple(order), tuple(seps), tuple(parents))


def separator_multiset(order: PluperfectOrder) -> Counter:
    """Multiset of separators of a junction-tree ordering, with multiplicity."""
    return Counter(order.separators)


def is_decomposition(g: Graph, a: int, b: int) -> bool:
    """True iff ``a`` and ``b`` cover the vertices, ``a & b`` is complete,
    and every path from ``a`` minus ``b`` to ``b`` minus ``a`` meets ``a & b``.

    Because ``a | b`` covers every vertex, the separation condition is
    equivalent to there being no edge joining the two set differences.
    """
    _check_subset(a, g.vertices, "first part")
    _check_subset(b, g.vertices, "second part")
    if a | b != g.vertices:
        raise PreconditionError("parts do not cover the vertex set")
    if not is_complete(g, a & b):
        return False
    only_b = b & ~a
    m = a & ~b
    while m:
        bit = m & -m
        if g.adj[bit.bit_length() - 1] & only_b:
            return False
        m ^= bit
    return True


def _is_maximal_within(g: Graph, s: int, part: int) -> bool:
    """No vertex of ``part`` outside ``s`` is adjacent to all of ``s``."""
    m = part & ~s
    while m:
        bit = m & -m
        if s & ~g.adj[bit.bit_length() - 1] == 0:
            return False
        m ^= bit
    return True


def in_U_star(g: Graph, a: int, b: int) -> bool:
    """True iff ``(a, b)`` decomposes ``g`` and ``a & b`` is a clique of the
    subgraph induced on ``a`` (complete and maximal there)."""
    return is_decomposition(g, a, b) and _is_maximal_within(g, a & b, a)


def in_U_plus(g: Graph, a: int, b: int) -> bool:
    """True iff ``(a, b)`` decomposes ``g`` and ``a & b`` is a clique of ``g``
    itself, i.e. maximal within both parts."""
    s = a & b
    return (
        is_decomposition(g, a, b)
        and _is_maximal_within(g, s, a)
        and _is_maximal_within(g, s, b)
    )


def is_connected(g: Graph) -> bool:
    """True iff the active vertices form one connected component."""
    if g.vertices == 0:
        return True
    start = (g.vertices & -g.vertices).bit_length() - 1
    reach = 1 << start
    frontier = reach
    while frontier:
        nxt = 0
        m = frontier
        while m:
            b = m & -m
            nxt |= g.adj[b.bit_length() - 1]
            m ^= b
        frontier = nxt & g.vertices & ~reach
        reach |= frontier
    return reach == g.vertices


def complete_sets_graph(n: int, sets: Iterable[int]) -> Graph:
    """Graph on 0..n-1 whose edges make each given vertex set complete.

    This realises the compact bracket notation for decomposable graphs:
    the maximal elements of ``sets`` (plus leftover singletons) are its
    cliques.
    """
    full = _full_mask(n)
    adj = [0] * n
    emask = 0
    for s in sets:
        if s & ~full:
            raise DomainError("set outside 0..n-1")
        emask |= within_edge_mask(n, s)
        m = s
        while m:
            b = m & -m
            adj[b.bit_length() - 1] |= s & ~b
            m ^= b
    return Graph._from_parts(n, full, tuple(adj), emask)


def _check_enumerable(n: int, limit: int | None) -> None:
    limit = ENUMERATION_LIMIT if limit is None else limit
    if not 1 <= n <= MAX_VERTICES:
        raise DomainError(f"vertex count must be in 1..{MAX_VERTICES}, got {n}")
    if n > limit:
        raise CapacityError(
            f"enumeration over {n} vertices exceeds the limit of {limit}"
        )


def enumerate_decomposable(n: int, limit: int | None = None) -> Iterator[Graph]:
    """Yield every decomposable labelled graph on n vertices exactly once.

    Iterates edge-set bitmasks in ascending numeric order, maintaining the
    adjacency incrementally, and filters by chordality; the order is
    therefore deterministic.
    """
    _check_enumerable(n, limit)
    pairs = _pairs(n)
    npairs = len(pairs)
    full = _full_mask(n)
    adj = [0] * n
    mcs = _mcs
    for mask in range(1 << npairs):
        if mask:
            changed = mask ^ (mask - 1)
            top = changed.bit_length() - 1
            i, j = pairs[top]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
            m = changed ^ (1 << top)
            while m:
                b = m & -m
                i, j = pairs[b.bit_length() - 1]
                adj[i] &= ~(1 << j)
                adj[j] &= ~(1 << i)
                m ^= b
        order, ok = mcs(n, adj, full)
        if ok:
            yield Graph._from_parts(n, full, tuple(adj), mask, tuple(reversed(order)))


def count_decomposable(n: int, limit: int | None = None) -> int:
    """Number of decomposable labelled graphs on n vertices."""
    _check_enumerable(n, limit)
    pairs = _pairs(n)
    npairs = len(pairs)
    full = _full_mask(n)
    adj = [0] * n
    mcs = _mcs
    count = 0
    for mask in range(1 << npairs):
        if mask:
            changed = mask ^ (mask - 1)
            top = changed.bit_length() - 1
            i, j = pairs[top]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
            m = changed ^ (1 << top)
            while m:
                b = m & -m
                i, j = pairs[b.bit_length() - 1]
                adj[i] &= ~(1 << j)
                adj[j] &= ~(1 << i)
                m ^= b
        if mcs(n, adj, full)[1]:
            count += 1
    return count


def graph_to_json(g: Graph) -> str:
    """Serialise a graph to the ``{"n":..., "edges":[[i,j],...]}`` format."""
    return json.dumps({"n": g.n, "edges": [[i, j] for i, j in g.edges()]}, sort_keys=True)


def graph_from_json(text: str) -> Graph:
    """Parse the ``{"n":..., "edges":[[i,j],...]}`` format.

    Edges are unordered within pairs; duplicate pairs are rejected.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"invalid graph JSON: {e}") from e
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise DomainError("graph JSON must have fields 'n' and 'edges'")
    n = obj["n"]
    edges = obj["edges"]
    if not isinstance(n, int):
        raise DomainError("'n' must be an integer")
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e) for e in edges
    ):
        raise DomainError("'edges' must be an array of 2-element arrays of vertex indices")
    return Graph(n, [tuple(e) for e in edges])


def to_dot(g: Graph, hubs: int = 0) -> str:
    """Render a graph in DOT; vertices in ``hubs`` get ``style=filled``."""
    _check_subset(hubs, g.vertices, "hub set")
    lines = ["graph G {"]
    for v in members(g.vertices):
        attr = " [style=filled]" if hubs >> v & 1 else ""
        lines.append(f"  {v}{attr};")
    for i, j in g.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
