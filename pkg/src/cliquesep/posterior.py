"""Conjugate posterior updating under decomposable marginal likelihoods.

When the data distribution factorises over cliques and separators of the
graph, multiplying each potential by the marginal evidence of its vertex
set turns a prior factorisation law into the posterior one, with the
support unchanged. The concrete likelihood here scores binary data
columns by Dirichlet-multinomial evidence, which is exact, closed-form
and factorises as required.
"""

from __future__ import annotations

import csv
import math
from typing import Sequence

from .errors import DomainError
from .laws import CsfLaw
from .graphs import members


class BernoulliDirichletScore:
    """Log marginal evidence of binary columns under a symmetric Dirichlet.

    For a vertex set A, the 2^|A|-cell contingency table of the columns
    in A is scored with a symmetric Dirichlet(alpha per cell) prior. The
    empty set scores zero, and results are cached per subset.
    """

    def __init__(self, data: Sequence[Sequence[int]], alpha: float = 1.0):
        rows = [list(r) for r in data]
        if not rows:
            raise DomainError("data must have at least one row")
        if alpha <= 0.0 or not math.isfinite(alpha):
            raise DomainError(f"concentration must be positive, got {alpha}")
        ncols = len(rows[0])
        if ncols < 1:
            raise DomainError("data must have at least one column")
        packed = []
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise DomainError(f"row {r} has {len(row)} values, expected {ncols}")
            mask = 0
            for c, value in enumerate(row):
                if value not in (0, 1):
                    raise DomainError(f"row {r} column {c}: values must be 0 or 1")
                mask |= value << c
            packed.append(mask)
        self.n = ncols
        self.alpha = float(alpha)
        self.num_rows = len(packed)
        self._rows = packed
        self._cache: dict[int, float] = {0: 0.0}

    def log_marginal(self, mask: int) -> float:
        cached = self._cache.get(mask)
        if cached is not None:
            return cached
        if mask >> self.n:
            raise DomainError("vertex set outside the data columns")
        positions = members(mask)
        counts: dict[int, int] = {}
        for row in self._rows:
            cell = 0
            for k, v in enumerate(positions):
                cell |= (row >> v & 1) << k
            counts[cell] = counts.get(cell, 0) + 1
        alpha = self.alpha
        ncells = float(2 ** len(positions))
        value = math.lgamma(ncells * alpha) - math.lgamma(ncells * alpha + self.num_rows)
        base = math.lgamma(alpha)
        for c in counts.values():
            value += math.lgamma(alpha + c) - base
        self._cache[mask] = value
        return value


def bernoulli_dirichlet_score(data: Sequence[Sequence[int]], alpha: float = 1.0) -> BernoulliDirichletScore:
    """Build the Dirichlet-multinomial evidence evaluator for binary data."""
    return BernoulliDirichletScore(data, alpha)


def posterior_law(prior: CsfLaw, score) -> CsfLaw:
    """Posterior factorisation law: every potential is multiplied by the
    marginal evidence of its vertex set; infinite separator potentials
    (hard constraints) are preserved, so the support is unchanged."""
    fn = score.log_marginal
    return CsfLaw(prior.n, prior.phi.with_extra(fn), prior.psi.with_extra(fn))


def load_binary_csv(path: str, skip_header: bool = False) -> list[list[int]]:
    """Read 0/1 data, one observation per row, columns indexed 0..n-1."""
    rows: list[list[int]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if skip_header and i == 0:
                continue
            if not row:
                continue
            try:
                rows.append([int(tok) for tok in row])
            except ValueError as e:
                raise DomainError(f"line {i + 1}: values must be integers") from e
    if not rows:
        raise DomainError(f"no data rows in {path}")
    return rows
