"""Metropolis-Hastings sampling from factorisation laws.

Moves toggle a uniformly chosen vertex pair; candidates that break
decomposability, or that some infinite separator potential puts outside
the law's support, are rejected and the chain holds, so detailed balance
holds with respect to the normalised law restricted to its support.
Candidate decomposability is checked by a full maximum cardinality
search per proposal; log-densities are memoised by edge mask.

Randomness comes from a counter-based generator keyed by (seed, chain
index), so independent chains are reproducible regardless of how they
are scheduled.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .graphs import Graph, _pairs, clique_separators, is_decomposable
from .laws import INF, CsfLaw, log_density_unnorm

#: Stop memoising log-densities beyond this many distinct graphs.
_CACHE_LIMIT = 500_000

_MASK64 = (1 << 64) - 1


def _generator(seed: int, chain_index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, chain_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _BufferedRandom:
    """Block-buffered pair indices and uniforms from one generator."""

    __slots__ = ("_rng", "_npairs", "_block", "_ints", "_ii", "_unis", "_ui")

    def __init__(self, rng: np.random.Generator, npairs: int, block: int = 8192):
        self._rng = rng
        self._npairs = npairs
        self._block = block
        self._ints = ()
        self._ii = 0
        self._unis = ()
        self._ui = 0

    def integers(self, npairs: int) -> int:
        if self._ii >= len(self._ints):
            self._ints = self._rng.integers(0, self._npairs, size=self._block).tolist()
            self._ii = 0
        v = self._ints[self._ii]
        self._ii += 1
        return v

    def random(self) -> float:
        if self._ui >= len(self._unis):
            self._unis = self._rng.random(size=self._block).tolist()
            self._ui = 0
        v = self._unis[self._ui]
        self._ui += 1
        return v


@dataclass
class ChainState:
    """Current graph with its cached log-density and move counters."""

    graph: Graph
    log_density: float
    step_count: int = 0
    accept_count: int = 0


@dataclass(frozen=True)
class SampleRecord:
    step: int
    graph: Graph
    log_density: float
    num_cliques: int
    max_clique: int
    separator_sizes: tuple[int, ...]


@dataclass(frozen=True)
class SampleSummary:
    n: int
    steps: int
    thin: int
    seed: int
    chain_index: int
    records: tuple[SampleRecord, ...]
    acceptance_rate: float


def default_init(law: CsfLaw) -> Graph:
    """Complete graph when the law carries hard separator constraints
    (a single clique has no separators, so it is always supported),
    otherwise the empty graph."""
    hard = law.psi.hubs is not None or any(v == INF for v in law.psi.overrides.values())
    return Graph.complete(law.n) if hard else Graph.empty(law.n)


def initial_state(law: CsfLaw, init: Graph | None = None) -> ChainState:
    g = default_init(law) if init is None else init
    if g.n != law.n:
        raise DomainError(f"initial graph on {g.n} vertices under a law for {law.n}")
    if not is_decomposable(g):
        raise DomainError("initial graph is not decomposable")
    ld = log_density_unnorm(law, g)
    if ld == -INF:
        raise DomainError("initial graph is outside the law's support")
    return ChainState(g, ld)


def propose_edge_flip(state: ChainState, rand) -> Graph | None:
    """Toggle a uniformly chosen vertex pair; None if that breaks
    decomposability. The pair choice is symmetric between a graph and
    any single-toggle neighbour."""
    g = state.graph
    pairs = _pairs(g.n)
    i, j = pairs[int(rand.integers(len(pairs)))]
    cand = g.with_edge_toggled(i, j)
    return cand if is_decomposable(cand) else None


def mh_step(state: ChainState, law: CsfLaw, rand, cache: dict | None = None, validate: bool = False) -> ChainState:
    """One Metropolis step; out-of-support candidates count as rejections."""
    cand = propose_edge_flip(state, rand)
    state.step_count += 1
    if cand is not None:
        ld = cache.get(cand.edge_mask) if cache is not None else None
        if ld is None:
            ld = log_density_unnorm(law, cand)
            if cache is not None and len(cache) < _CACHE_LIMIT:
                cache[cand.edge_mask] = ld
        if ld > -INF:
            delta = ld - state.log_density
            if delta >= 0.0 or rand.random() < math.exp(delta):
                state.graph = cand
                state.log_density = ld
                state.accept_count += 1
    if validate:
        assert is_decomposable(state.graph)
        recomputed = log_density_unnorm(law, state.graph)
        assert abs(recomputed - state.log_density) <= 1e-9
    return state


def _record(step: int, state: ChainState) -> SampleRecord:
    cl, seps = clique_separators(state.graph)
    sizes = sorted(s.bit_count() for s, mult in seps.items() for _ in range(mult))
    return SampleRecord(
        step=step,
        graph=state.graph,
        log_density=state.log_density,
        num_cliques=len(cl),
        max_clique=max(c.bit_count() for c in cl),
        separator_sizes=tuple(sizes),
    )


def run_chain(
    law: CsfLaw,
    init: Graph | None = None,
    steps: int = 10_000,
    thin: int = 100,
    seed: int = 0,
    chain_index: int = 0,
    validate: bool = False,
) -> SampleSummary:
    """Run one chain, retaining the initial state and every thin-th state.

    Deterministic given (seed, chain_index); chains with distinct indices
    use independent streams.
    """
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    if thin < 1:
        raise DomainError("thin must be at least 1")
    state = initial_state(law, init)
    rand = _BufferedRandom(_generator(seed, chain_index), len(_pairs(law.n)))
    cache: dict[int, float] = {state.graph.edge_mask: state.log_density}
    records = [_record(0, state)]
    for step in range(1, steps + 1):
        mh_step(state, law, rand, cache, validate)
        if step % thin == 0:
            records.append(_record(step, state))
    rate = state.accept_count / state.step_count if state.step_count else 0.0
    return SampleSummary(
        n=law.n,
        steps=steps,
        thin=thin,
        seed=seed,
        chain_index=chain_index,
        records=tuple(records),
        acceptance_rate=rate,
    )


def visit_counts(
    law: CsfLaw,
    init: Graph | None = None,
    steps: int = 100_000,
    seed: int = 0,
    chain_index: int = 0,
) -> Counter:
    """Edge-mask visit counts over the states after each of ``steps`` steps."""
    state = initial_state(law, init)
    rand = _BufferedRandom(_generator(seed, chain_index), len(_pairs(law.n)))
    cache: dict[int, float] = {state.graph.edge_mask: state.log_density}
    counts: Counter = Counter()
    for _ in range(steps):
        mh_step(state, law, rand, cache)
        counts[state.graph.edge_mask] += 1
    return counts
