"""Clique-separator factorisation laws over decomposable graphs.

A law assigns each decomposable graph an unnormalised density equal to
the product of a potential per clique divided by a potential per
separator (with separator multiplicity). Potentials live in log domain;
separator potentials may be +inf, which zeroes out every graph using
that separator and is how hard constraints such as the hub model are
expressed.

Potential tables are sparse: a size rule provides the default
log-potential, explicit per-set overrides take precedence, and an
optional hub mask sends every hub-free set to +inf. An optional additive
set-function hook supports exact reparameterisations and conjugate
updates without materialising 2^n entries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import DomainError, EmptySupportError
from .graphs import (
    Graph,
    clique_separators,
    enumerate_decomposable,
    members,
    vset,
)

INF = math.inf


@dataclass(frozen=True)
class ExpLinearRule:
    """Log-potential -rate * |A|."""

    rate: float

    def log_potential(self, size: int) -> float:
        return -self.rate * size


@dataclass(frozen=True)
class ConstRule:
    """Constant log-potential, independent of set size."""

    value: float = 0.0

    def log_potential(self, size: int) -> float:
        return self.value


@dataclass(frozen=True)
class QuadraticRule:
    """Log-potential coef * |A|(|A|-1)/2, one unit per vertex pair."""

    coef: float

    def log_potential(self, size: int) -> float:
        return self.coef * (size * (size - 1) // 2)


SizeRule = ExpLinearRule | ConstRule | QuadraticRule


class PotentialTable:
    """Log-potentials indexed by vertex-set mask.

    Lookup order: explicit override, else +inf if the set misses every
    hub, else the size rule. ``extra`` is added on top of finite values.
    Treat instances as immutable.
    """

    __slots__ = ("rule", "overrides", "hubs", "extra")

    def __init__(
        self,
        rule: SizeRule | None = None,
        overrides: Mapping[int, float] | None = None,
        hubs: int | None = None,
        extra: Callable[[int], float] | None = None,
    ):
        self.rule = ConstRule(0.0) if rule is None else rule
        self.overrides = dict(overrides) if overrides else {}
        for mask, value in self.overrides.items():
            if math.isnan(value) or value == -INF:
                raise DomainError(f"log-potential for {members(mask)} must be finite or +inf")
        self.hubs = hubs
        self.extra = extra

    def log_potential(self, mask: int) -> float:
        base = self.overrides.get(mask)
        if base is None:
            if self.hubs is not None and mask & self.hubs == 0:
                return INF
            base = self.rule.log_potential(mask.bit_count())
        if base == INF:
            return INF
        if self.extra is not None:
            e = self.extra(mask)
            if not math.isfinite(e):
                raise DomainError(f"non-finite additive log term for {members(mask)}")
            base += e
        return base

    def with_extra(self, fn: Callable[[int], float]) -> "PotentialTable":
        """New table adding ``fn(mask)`` to every finite log-potential."""
        old = self.extra
        combined = fn if old is None else (lambda mask, _o=old, _f=fn: _o(mask) + _f(mask))
        return PotentialTable(self.rule, self.overrides, self.hubs, combined)


@dataclass(frozen=True)
class CsfLaw:
    """Unnormalised clique-separator factorisation law on n-vertex graphs."""

    n: int
    phi: PotentialTable
    psi: PotentialTable


def t_statistic(g: Graph, a: int) -> int:
    """1 if ``a`` is a clique of ``g``, minus its multiplicity if it is a
    separator, 0 otherwise."""
    cl, seps = clique_separators(g)
    if a in seps:
        return -seps[a]
    return 1 if a in cl else 0


def t_plus(g: Graph, a: int) -> int:
    return max(t_statistic(g, a), 0)


def t_minus(g: Graph, a: int) -> int:
    return min(t_statistic(g, a), 0)


def log_density_unnorm(law: CsfLaw, g: Graph) -> float:
    """Sum of clique log-potentials minus multiplicity-weighted separator
    log-potentials; -inf iff some separator potential is +inf."""
    if g.n != law.n:
        raise DomainError(f"graph on {g.n} vertices under a law for {law.n}")
    cl, seps = clique_separators(g)
    total = 0.0
    for c in cl:
        lp = law.phi.log_potential(c)
        if lp == INF:
            raise DomainError(f"clique potential for {members(c)} is infinite")
        total += lp
    for s, mult in seps.items():
        lp = law.psi.log_potential(s)
        if lp == INF:
            return -INF
        total -= mult * lp
    return total


def uniform_csf(n: int) -> CsfLaw:
    """All potentials 1: the uniform law over decomposable graphs."""
    return CsfLaw(n, PotentialTable(), PotentialTable())


def erdos_renyi_csf(n: int, p: float) -> CsfLaw:
    """Edge-density law with both potentials (p/(1-p))^(|A|(|A|-1)/2).

    Normalised over the decomposable graphs this equals independent
    edges with probability p, conditioned on decomposability.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"edge probability must be in (0,1), got {p}")
    rule = QuadraticRule(math.log(p / (1.0 - p)))
    return CsfLaw(n, PotentialTable(rule), PotentialTable(rule))


def hub_law(n: int, hubs: int | Iterable[int], clique_rate: float = 4.0, separator_rate: float = 0.5) -> CsfLaw:
    """Communication-network law: separators must contain a designated hub.

    Clique potentials are exp(-clique_rate * |C|) for every clique;
    separator potentials are exp(-separator_rate * |S|) when S contains a
    hub and +inf otherwise. The empty separator contains no hub, so every
    supported graph is connected.
    """
    hub_mask = hubs if isinstance(hubs, int) else vset(hubs)
    if hub_mask >> n:
        raise DomainError("hub set outside 0..n-1")
    return CsfLaw(
        n,
        PotentialTable(ExpLinearRule(clique_rate)),
        PotentialTable(ExpLinearRule(separator_rate), hubs=hub_mask),
    )


def csf_dimension(n: int) -> int:
    """Dimension of the space of clique-separator factorisation laws."""
    if n < 2:
        raise DomainError("dimension formulas need at least 2 vertices")
    return 2 * 2**n - 2 * n - 3


def cef_dimension(n: int) -> int:
    """Dimension of the subfamily with one shared potential per set."""
    if n < 2:
        raise DomainError("dimension formulas need at least 2 vertices")
    return 2**n - n - 1


def standardize(law: CsfLaw) -> CsfLaw:
    """Equivalent law with unit empty-separator and singleton-clique potentials.

    Rescales both tables by exp(alpha + sum of per-vertex weights), a
    direction along which every normalised density is invariant, chosen
    so the empty-set separator potential and every singleton clique
    potential become exactly 1.
    """
    log_psi_empty = law.psi.log_potential(0)
    if not math.isfinite(log_psi_empty):
        raise DomainError("standardisation needs a finite empty-separator potential")
    alpha = -log_psi_empty
    beta = []
    for v in range(law.n):
        lp = law.phi.log_potential(1 << v)
        if not math.isfinite(lp):
            raise DomainError("standardisation needs finite singleton clique potentials")
        beta.append(-lp - alpha)
    if alpha == 0.0 and not any(beta):
        return law

    def adjust(mask: int, _a=alpha, _b=tuple(beta)) -> float:
        total = _a
        m = mask
        while m:
            bit = m & -m
            total += _b[bit.bit_length() - 1]
            m ^= bit
        return total

    return CsfLaw(law.n, law.phi.with_extra(adjust), law.psi.with_extra(adjust))


class DensityTable:
    """Explicit probabilities over every decomposable graph on n vertices."""

    __slots__ = ("n", "probs", "_by_mask")

    def __init__(self, n: int, probs: Mapping[Graph, float]):
        self.n = n
        self.probs = dict(probs)
        self._by_mask = {g.edge_mask: p for g, p in self.probs.items()}

    def prob(self, g: Graph) -> float:
        return self.probs[g]

    def prob_of_mask(self, edge_mask: int) -> float:
        return self._by_mask[edge_mask]

    def log_prob_of_mask(self, edge_mask: int) -> float:
        p = self._by_mask[edge_mask]
        return math.log(p) if p > 0.0 else -INF

    def items(self):
        return self.probs.items()

    def __len__(self):
        return len(self.probs)


def normalize_by_enumeration(law: CsfLaw, limit: int | None = None) -> DensityTable:
    """Exact normalisation of a law over the enumerated decomposable graphs.

    Weights are exponentiated against the largest finite log-density and
    summed smallest-first with compensated summation, so the constant is
    reproducible across platforms.
    """
    logs: list[tuple[Graph, float]] = []
    best = -INF
    for g in enumerate_decomposable(law.n, limit):
        ld = log_density_unnorm(law, g)
        logs.append((g, ld))
        if ld > best:
            best = ld
    if best == -INF:
        raise EmptySupportError("law puts zero mass on every decomposable graph")
    weights = [(g, math.exp(ld - best) if ld > -INF else 0.0) for g, ld in logs]
    z = math.fsum(sorted(w for _, w in weights))
    return DensityTable(law.n, {g: w / z for g, w in weights})


def perturb_density(density: DensityTable, g: Graph, factor: float) -> DensityTable:
    """Multiply one graph's probability by ``factor`` and renormalise."""
    if g not in density.probs:
        raise DomainError("graph is not in the density's support set")
    if factor <= 0.0:
        raise DomainError("perturbation factor must be positive")
    probs = dict(density.probs)
    probs[g] *= factor
    z = math.fsum(sorted(probs.values()))
    return DensityTable(density.n, {h: p / z for h, p in probs.items()})


# ---------------------------------------------------------------------------
# Serialisation


def _mask_key(mask: int) -> str:
    return ",".join(str(v) for v in members(mask))


def _key_mask(key: str, n: int) -> int:
    if key == "":
        return 0
    try:
        verts = [int(tok) for tok in key.split(",")]
    except ValueError as e:
        raise DomainError(f"invalid vertex-set key {key!r}") from e
    if any(not 0 <= v < n for v in verts) or len(set(verts)) != len(verts):
        raise DomainError(f"invalid vertex-set key {key!r} for n={n}")
    return vset(verts)


def _rule_to_obj(rule: SizeRule) -> dict:
    if isinstance(rule, ExpLinearRule):
        return {"type": "exp_linear", "rate": rule.rate}
    if isinstance(rule, ConstRule):
        return {"type": "const", "value": rule.value}
    if isinstance(rule, QuadraticRule):
        return {"type": "quadratic", "coef": rule.coef}
    raise DomainError(f"unknown rule {rule!r}")


def _rule_from_obj(obj) -> SizeRule:
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("rule must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "exp_linear":
        return ExpLinearRule(float(obj["rate"]))
    if kind == "const":
        return ConstRule(float(obj.get("value", 0.0)))
    if kind == "quadratic":
        return QuadraticRule(float(obj["coef"]))
    raise DomainError(f"unknown rule type {kind!r}")


def _table_to_obj(table: PotentialTable) -> dict:
    if table.extra is not None:
        raise DomainError(
            "table carries a non-serialisable additive term; export a density instead"
        )
    obj = {
        "rule": _rule_to_obj(table.rule),
        "overrides": {
            _mask_key(m): ("inf" if v == INF else v) for m, v in sorted(table.overrides.items())
        },
    }
    if table.hubs is not None:
        obj["hub_constraint"] = {"hubs": members(table.hubs), "no_hub": "inf"}
    return obj


def _table_from_obj(obj, n: int) -> PotentialTable:
    if not isinstance(obj, dict):
        raise DomainError("potential table must be an object")
    rule = _rule_from_obj(obj.get("rule", {"type": "const", "value": 0.0}))
    overrides = {}
    for key, value in obj.get("overrides", {}).items():
        if value == "inf":
            value = INF
        overrides[_key_mask(key, n)] = float(value)
    hubs = None
    hc = obj.get("hub_constraint")
    if hc is not None:
        if hc.get("no_hub") != "inf":
            raise DomainError("hub_constraint must declare no_hub as 'inf'")
        hubs = vset(hc["hubs"])
        if hubs >> n:
            raise DomainError("hub set outside 0..n-1")
    return PotentialTable(rule, overrides, hubs)


def law_to_json(law: CsfLaw) -> str:
    return json.dumps(
        {"n": law.n, "phi": _table_to_obj(law.phi), "psi": _table_to_obj(law.psi)},
        sort_keys=True,
    )


def law_from_json(text: str) -> CsfLaw:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"invalid law JSON: {e}") from e
    if not isinstance(obj, dict) or "n" not in obj:
        raise DomainError("law JSON must have fields 'n', 'phi' and 'psi'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise DomainError("'n' must be a positive integer")
    return CsfLaw(n, _table_from_obj(obj.get("phi", {}), n), _table_from_obj(obj.get("psi", {}), n))


def density_to_json(density: DensityTable) -> str:
    entries = sorted(density.items(), key=lambda item: item[0].edge_mask)
    return json.dumps(
        {
            "n": density.n,
            "entries": [{"edges": [[i, j] for i, j in g.edges()], "p": p} for g, p in entries],
        }
    )


def density_from_json(text: str, limit: int | None = None) -> DensityTable:
    """Parse a density table, checking it covers exactly the decomposable
    graphs of its size; probabilities are renormalised exactly."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainError(f"invalid density JSON: {e}") from e
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise DomainError("density JSON must have fields 'n' and 'entries'")
    n = obj["n"]
    probs: dict[Graph, float] = {}
    for entry in obj["entries"]:
        g = Graph(n, [tuple(e) for e in entry["edges"]])
        p = float(entry["p"])
        if p < 0.0 or not math.isfinite(p):
            raise DomainError("probabilities must be finite and nonnegative")
        if g in probs:
            raise DomainError(f"duplicate entry for {g!r}")
        probs[g] = p
    expected = {g for g in enumerate_decomposable(n, limit)}
    if set(probs) != expected:
        raise DomainError(
            f"entries must cover exactly the {len(expected)} decomposable graphs on {n} vertices"
        )
    z = math.fsum(sorted(probs.values()))
    if not math.isfinite(z) or abs(z - 1.0) > 1e-6:
        raise DomainError(f"probabilities sum to {z}, not 1")
    return DensityTable(n, {g: p / z for g, p in probs.items()})
