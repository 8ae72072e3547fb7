"""Exhaustive verification of structural Markov properties at desk scale.

Conditional independence of the two induced pieces of a covering pair is
an exact algebraic statement about a finite probability table, so it is
tested through log cross-ratios: for a genuinely independent table every
2x2 sub-table has cross-ratio one. The same sweep over covering pairs
serves the three nested conditioning families (all decompositions;
those whose intersection is a clique of the first part; those whose
intersection is a clique of the whole graph), because membership flags
and the induced-piece partition are precomputed per pair.

Also here: the constructive fit of a factorisation law from any positive
density satisfying the clique-in-part property, identity checkers for
the telescoping product over a junction-tree ordering and for the
two-clique ratio, and the rank analysis of the constraint system implied
by the weakest conditioning family.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError
from .graphs import (
    Graph,
    cliques,
    enumerate_decomposable,
    in_U_plus,
    in_U_star,
    is_decomposition,
    members,
    pluperfect_order,
    within_edge_mask,
)
from .laws import (
    CsfLaw,
    DensityTable,
    PotentialTable,
    csf_dimension,
    perturb_density,
)


class PropertyKind(enum.Enum):
    """Which conditioning family backs the independence requirement."""

    SM = "sm"  # all decompositions of the covering pair
    WSM = "wsm"  # intersection is additionally a clique of one part
    EWSM = "ewsm"  # intersection is additionally a clique of the whole graph


@dataclass(frozen=True)
class CrossRatioWitness:
    """Worst 2x2 sub-table found: graphs at (x,y), (x',y'), (x,y'), (x',y)."""

    a: int
    b: int
    graphs: tuple[Graph, Graph, Graph, Graph]
    value: float


@dataclass(frozen=True)
class PropertyReport:
    kind: PropertyKind
    passed: bool
    worst_violation: float
    witness: CrossRatioWitness | None


def conditioning_set(n: int, a: int, b: int, kind: PropertyKind, limit: int | None = None) -> list[Graph]:
    """Decomposable graphs on n vertices in the conditioning set of (a, b).

    For the clique-in-part family the maximality requirement applies to
    the subgraph induced on ``a`` (the first argument).
    """
    pred = {
        PropertyKind.SM: is_decomposition,
        PropertyKind.WSM: in_U_star,
        PropertyKind.EWSM: in_U_plus,
    }[kind]
    return [g for g in enumerate_decomposable(n, limit) if pred(g, a, b)]


def _covering_pairs(n: int) -> list[tuple[int, int]]:
    """Unordered covering pairs {a, b} with both parts proper subsets."""
    full = (1 << n) - 1
    out = []
    for a in range(full):
        need = full & ~a
        x = 0
        while True:
            b = need | x
            if a < b != full:
                out.append((a, b))
            x = (x - a) & a
            if x == 0:
                break
    return out


@dataclass(frozen=True)
class _PairTable:
    a: int
    b: int
    # (graph index, induced-edge-mask on a, on b, intersection maximal in a, in b)
    rows: tuple[tuple[int, int, int, bool, bool], ...]


@lru_cache(maxsize=4)
def _pair_tables(n: int) -> tuple[tuple[Graph, ...], tuple[_PairTable, ...]]:
    graphs = tuple(enumerate_decomposable(n))
    tables = []
    for a, b in _covering_pairs(n):
        wa = within_edge_mask(n, a)
        wb = within_edge_mask(n, b)
        s = a & b
        only_a = a & ~b
        only_b = b & ~a
        rows = []
        for gi, g in enumerate(graphs):
            if not is_decomposition(g, a, b):
                continue
            star_a = _maximal_within(g, s, only_a)
            star_b = _maximal_within(g, s, only_b)
            rows.append((gi, g.edge_mask & wa, g.edge_mask & wb, star_a, star_b))
        tables.append(_PairTable(a, b, tuple(rows)))
    return graphs, tuple(tables)


def _maximal_within(g: Graph, s: int, candidates: int) -> bool:
    m = candidates
    while m:
        bit = m & -m
        if s & ~g.adj[bit.bit_length() - 1] == 0:
            return False
        m ^= bit
    return True


def _row_filters(kind: PropertyKind):
    if kind is PropertyKind.SM:
        return (lambda sa, sb: True,)
    if kind is PropertyKind.WSM:
        # Definition quantifies over ordered pairs, so test both roles.
        return (lambda sa, sb: sa, lambda sa, sb: sb)
    return (lambda sa, sb: sa and sb,)


def _worst_spread(cells: dict[tuple[int, int], tuple[float, int]]):
    """Largest |log cross-ratio| over 2x2 sub-tables of a sparse table.

    ``cells`` maps (row key, column key) to (log probability, graph
    index). For each pair of rows the spread of the column-wise log
    differences equals the worst cross-ratio over that row pair.
    """
    rows: dict[int, dict[int, tuple[float, int]]] = {}
    for (ga, gb), cell in cells.items():
        rows.setdefault(ga, {})[gb] = cell
    keys = list(rows)
    worst = 0.0
    quad = None
    for i1 in range(len(keys)):
        r1 = rows[keys[i1]]
        for i2 in range(i1 + 1, len(keys)):
            r2 = rows[keys[i2]]
            common = r1.keys() & r2.keys()
            if len(common) < 2:
                continue
            dmax = -math.inf
            dmin = math.inf
            cmax = cmin = -1
            for c in common:
                d = r1[c][0] - r2[c][0]
                if d > dmax:
                    dmax = d
                    cmax = c
                if d < dmin:
                    dmin = d
                    cmin = c
            spread = dmax - dmin
            if spread > worst:
                worst = spread
                quad = (r1[cmax][1], r2[cmin][1], r1[cmin][1], r2[cmax][1])
    return worst, quad


def check_property(density: DensityTable, kind: PropertyKind, tol: float = 1e-9) -> PropertyReport:
    """Test the conditional independence required by ``kind`` exhaustively.

    Sweeps every covering pair with both parts proper subsets, restricts
    the density to the pair's conditioning set, and reports the largest
    |log cross-ratio| across all 2x2 sub-tables of the induced-piece
    partition. Graphs with zero probability are left out of the table,
    and pairs whose table has fewer than two distinct rows or columns
    impose nothing.
    """
    graphs, tables = _pair_tables(density.n)
    try:
        logp = [math.log(density.prob(g)) if density.prob(g) > 0.0 else None for g in graphs]
    except KeyError as e:
        raise DomainError("density does not cover the decomposable graphs of its size") from e
    worst = 0.0
    witness = None
    for t in tables:
        for keep in _row_filters(kind):
            cells: dict[tuple[int, int], tuple[float, int]] = {}
            for gi, ga, gb, sa, sb in t.rows:
                if not keep(sa, sb):
                    continue
                lp = logp[gi]
                if lp is None:
                    continue
                cells[(ga, gb)] = (lp, gi)
            value, quad = _worst_spread(cells)
            if value > worst:
                worst = value
                witness = CrossRatioWitness(t.a, t.b, tuple(graphs[i] for i in quad), value)
    return PropertyReport(kind, worst <= tol, worst, witness)


def _log_prob_fn(density: DensityTable):
    def logpi(edge_mask: int) -> float:
        p = density.prob_of_mask(edge_mask)
        if p <= 0.0:
            raise DomainError("density must be strictly positive here")
        return math.log(p)

    return logpi


def fit_csf_from_density(density: DensityTable) -> CsfLaw:
    """Reconstruct factorisation potentials from a strictly positive density.

    The clique potential of a set is the probability of the graph that is
    complete on that set and empty elsewhere. The separator potential of
    a set S (|S| <= n-2) is the ratio prob(<R1>)prob(<R2>)/prob(<R1,R2>)
    for the canonical choice R1, R2 = S plus the two smallest outside
    vertices; for densities satisfying the clique-in-part independence
    property that ratio does not depend on the choice, and the resulting
    law reproduces the density with proportionality constant one.
    """
    n = density.n
    for g, p in density.items():
        if p <= 0.0:
            raise DomainError(f"full support required, but {g!r} has zero probability")
    logpi = _log_prob_fn(density)
    phi_over = {}
    for mask in range(1 << n):
        phi_over[mask] = logpi(within_edge_mask(n, mask))
    psi_over = {}
    full = (1 << n) - 1
    for mask in range(1 << n):
        rest = members(full & ~mask)
        if len(rest) < 2:
            continue
        r1 = mask | 1 << rest[0]
        r2 = mask | 1 << rest[1]
        w1 = within_edge_mask(n, r1)
        w2 = within_edge_mask(n, r2)
        psi_over[mask] = logpi(w1) + logpi(w2) - logpi(w1 | w2)
    return CsfLaw(n, PotentialTable(overrides=phi_over), PotentialTable(overrides=psi_over))


def verify_lemma1_identity(density: DensityTable, g: Graph) -> float:
    """Worst deviation of the junction-tree product identity on ``g``.

    For every ordering produced by every starting clique, and every
    proper superset R of each step's separator inside that step's parent
    clique, checks the step-wise cross-over identity
    prob(<R>) prob(<C_1..C_j>) = prob(<C_1..C_{j-1}>) prob(<R, C_j>)
    and the assembled product formula for prob(g); returns the largest
    absolute deviation on the log scale.
    """
    n = density.n
    logpi = _log_prob_fn(density)
    cl = cliques(g)
    if g.edge_mask not in density._by_mask:
        raise DomainError("graph is not covered by the density")
    logd = logpi(g.edge_mask)
    worst = 0.0
    for first in range(len(cl)):
        order = pluperfect_order(g, first)
        base = 0.0
        for c in order.cliques:
            base += logpi(within_edge_mask(n, c))
        lo = hi = 0.0
        prefix = within_edge_mask(n, order.cliques[0])
        for j in range(1, len(order.cliques)):
            c = order.cliques[j]
            s = order.separators[j - 1]
            parent = order.cliques[order.parents[j - 1]]
            wc = within_edge_mask(n, c)
            log_c = logpi(wc)
            prefix_next = prefix | wc
            log_prefix = logpi(prefix)
            log_prefix_next = logpi(prefix_next)
            factors = []
            free = parent & ~s
            x = free
            while x:  # nonempty subsets of parent minus separator
                r = s | x
                wr = within_edge_mask(n, r)
                log_r = logpi(wr)
                log_rc = logpi(wr | wc)
                factors.append(log_rc - log_r - log_c)
                crossover = abs(log_r + log_prefix_next - log_prefix - log_rc)
                if crossover > worst:
                    worst = crossover
                x = (x - 1) & free
            lo += min(factors)
            hi += max(factors)
            prefix = prefix_next
        worst = max(worst, abs(base + hi - logd), abs(base + lo - logd))
    return worst


def verify_lemma2_ratio(density: DensityTable, s: int) -> float:
    """Spread of log[prob(<R1,R2>)/(prob(<R1>)prob(<R2>))] over all pairs
    of strict supersets of ``s`` intersecting exactly in ``s``.

    Zero spread (up to rounding) is what lets that ratio define a
    separator potential depending on ``s`` alone.
    """
    n = density.n
    full = (1 << n) - 1
    comp = full & ~s
    if comp.bit_count() < 2:
        raise DomainError("needs at least two vertices outside the separator")
    logpi = _log_prob_fn(density)
    lo = math.inf
    hi = -math.inf
    x = comp
    while x:
        rest = comp & ~x
        y = rest
        while y:
            if x < y:
                w1 = within_edge_mask(n, s | x)
                w2 = within_edge_mask(n, s | y)
                ratio = logpi(w1 | w2) - logpi(w1) - logpi(w2)
                if ratio < lo:
                    lo = ratio
                if ratio > hi:
                    hi = ratio
            y = (y - 1) & rest
        x = (x - 1) & comp
    return hi - lo


# ---------------------------------------------------------------------------
# Constraint-system analysis for the weakest conditioning family


@lru_cache(maxsize=4)
def _ewsm_constraint_rows(n: int) -> tuple[dict[int, int], ...]:
    """Anchored cross-ratio equality constraints on log-probabilities.

    One row per free cell of each conditioning table of the
    clique-in-whole-graph family: coefficient +1 on (x, y) and on the
    anchor (x0, y0), -1 on (x, y0) and (x0, y). Every such table is a
    full grid, so all referenced cells exist.
    """
    graphs, tables = _pair_tables(n)
    rows: list[dict[int, int]] = []
    for t in tables:
        cells: dict[tuple[int, int], int] = {}
        for gi, ga, gb, sa, sb in t.rows:
            if sa and sb:
                cells[(ga, gb)] = gi
        row_keys = sorted({ga for ga, _ in cells})
        col_keys = sorted({gb for _, gb in cells})
        if len(row_keys) < 2 or len(col_keys) < 2:
            continue
        x0, y0 = row_keys[0], col_keys[0]
        for x in row_keys[1:]:
            for y in col_keys[1:]:
                row: dict[int, int] = {}
                for idx, coef in (
                    (cells[(x, y)], 1),
                    (cells[(x0, y0)], 1),
                    (cells[(x, y0)], -1),
                    (cells[(x0, y)], -1),
                ):
                    row[idx] = row.get(idx, 0) + coef
                rows.append(row)
    return tuple(rows)


def _exact_rank(rows, ncols: int) -> int:
    mat = [[Fraction(r.get(c, 0)) for c in range(ncols)] for r in rows]
    rank = 0
    col = 0
    nrows = len(mat)
    while rank < nrows and col < ncols:
        pivot = next((r for r in range(rank, nrows) if mat[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        prow = mat[rank]
        inv = 1 / prow[col]
        for r in range(rank + 1, nrows):
            factor = mat[r][col] * inv
            if factor:
                mrow = mat[r]
                for c in range(col, ncols):
                    mrow[c] -= factor * prow[c]
        rank += 1
        col += 1
    return rank


@dataclass(frozen=True)
class EwsmDimensionAnalysis:
    n: int
    num_constraints_bound: int
    rank: int
    free_dimension_bound: int
    csf_dimension: int


def ewsm_dimension_analysis(n: int = 4, force: bool = False) -> EwsmDimensionAnalysis:
    """Exact rank of the constraint system of the weakest conditioning family.

    At n=4 there are 6 two-vertex intersections, each contributing a 3x3
    table and so at most 4 independent constraints: a bound of 24 over
    the 60-dimensional simplex of laws on the 61 decomposable graphs,
    leaving free dimension at least 36 against a factorisation-law
    dimension of 21. Other sizes are permitted with ``force=True``.
    """
    if n != 4 and not force:
        raise DomainError("the dimension analysis is defined at n=4; pass force=True to generalise")
    rows = _ewsm_constraint_rows(n)
    graphs, _ = _pair_tables(n)
    rank = _exact_rank(rows, len(graphs))
    return EwsmDimensionAnalysis(
        n=n,
        num_constraints_bound=len(rows),
        rank=rank,
        free_dimension_bound=len(graphs) - 1 - rank,
        csf_dimension=csf_dimension(n),
    )


def ewsm_constraint_column_support(n: int = 4) -> set[int]:
    """Indices (enumeration order) of graphs touched by some constraint row."""
    used: set[int] = set()
    for row in _ewsm_constraint_rows(n):
        used.update(k for k, v in row.items() if v != 0)
    return used


def ewsm_not_wsm_density(n: int = 4) -> DensityTable:
    """A density satisfying the clique-in-whole-graph independence family
    but violating the clique-in-part family.

    Bumps the probability of the first graph (enumeration order) whose
    coordinate is absent from every constraint row of the weaker family:
    cross-ratios are scale-invariant, so the weaker family still holds
    exactly, while the bump lands in some larger conditioning table and
    breaks it. The construction is verified before returning.
    """
    graphs, _ = _pair_tables(n)
    used = ewsm_constraint_column_support(n)
    uniform = DensityTable(n, {g: 1.0 / len(graphs) for g in graphs})
    for gi, g in enumerate(graphs):
        if gi in used:
            continue
        candidate = perturb_density(uniform, g, 2.0)
        if not check_property(candidate, PropertyKind.WSM).passed and check_property(
            candidate, PropertyKind.EWSM
        ).passed:
            return candidate
    raise DomainError(f"no separating density exists at n={n}")
