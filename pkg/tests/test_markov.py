import math

import pytest

from cliquesep import (
    DensityTable,
    DomainError,
    Graph,
    check_property,
    clique_separators,
    complete_sets_graph,
    conditioning_set,
    enumerate_decomposable,
    ewsm_dimension_analysis,
    ewsm_not_wsm_density,
    fit_csf_from_density,
    hub_law,
    induced_subgraph,
    is_connected,
    log_density_unnorm,
    normalize_by_enumeration,
    perturb_density,
    uniform_csf,
    verify_lemma1_identity,
    verify_lemma2_ratio,
    vset,
)
from cliquesep.markov import PropertyKind, ewsm_constraint_column_support
from conftest import random_cef, random_csf

TOL = 1e-9


def wsm_density(n, seed):
    return normalize_by_enumeration(random_csf(n, seed=seed))


# ---------------------------------------------------------------------------
# Property checking


def test_uniform_passes_everything():
    d = normalize_by_enumeration(uniform_csf(4))
    for kind in PropertyKind:
        report = check_property(d, kind)
        assert report.passed and report.worst_violation == 0.0
        assert report.witness is None


@pytest.mark.parametrize("seed", range(5))
def test_factorisation_laws_pass_wsm_and_ewsm(seed):
    d = wsm_density(4, seed)
    for kind in (PropertyKind.WSM, PropertyKind.EWSM):
        report = check_property(d, kind, TOL)
        assert report.passed, (kind, report.worst_violation)


def test_shared_potential_laws_pass_all_three():
    for seed in range(3):
        d = normalize_by_enumeration(random_cef(4, seed=seed))
        for kind in PropertyKind:
            assert check_property(d, kind, TOL).passed, (seed, kind)


def test_generic_factorisation_law_fails_sm():
    d = wsm_density(4, seed=7)
    report = check_property(d, PropertyKind.SM, TOL)
    assert not report.passed
    assert report.worst_violation > 0.1
    assert report.witness is not None


def test_single_coordinate_perturbation_fails_wsm():
    d = wsm_density(4, seed=3)
    single_edge = next(g for g in enumerate_decomposable(4) if g.edge_mask.bit_count() == 1)
    bumped = perturb_density(d, single_edge, 2.0)
    report = check_property(bumped, PropertyKind.WSM, TOL)
    assert not report.passed
    assert report.worst_violation >= 0.1
    # the worst cross-ratio is exactly the bump factor on the log scale
    assert report.worst_violation == pytest.approx(math.log(2.0), abs=1e-9)


def test_witness_quadruple_reproduces_the_violation():
    d = perturb_density(wsm_density(4, seed=3), Graph.empty(4), 3.0)
    report = check_property(d, PropertyKind.SM)
    w = report.witness
    assert w is not None
    g1, g2, g3, g4 = w.graphs
    value = abs(
        math.log(d.prob(g1)) + math.log(d.prob(g2)) - math.log(d.prob(g3)) - math.log(d.prob(g4))
    )
    assert value == pytest.approx(report.worst_violation, rel=1e-12)
    # the quadruple lies in the claimed conditioning set
    for g in w.graphs:
        assert g in conditioning_set(4, w.a, w.b, PropertyKind.SM)


def test_check_property_requires_full_coverage():
    graphs = list(enumerate_decomposable(4))
    partial = DensityTable(4, {g: 1.0 / 10 for g in graphs[:10]})
    with pytest.raises(DomainError):
        check_property(partial, PropertyKind.WSM)


def test_zero_mass_graphs_are_ignored_not_fatal():
    # hub support: mass only on graphs whose separators contain vertex 0
    d = normalize_by_enumeration(hub_law(4, vset([0]), 1.0, 0.5))
    report = check_property(d, PropertyKind.WSM, TOL)
    assert report.worst_violation >= 0.0  # runs to completion


# ---------------------------------------------------------------------------
# Conditioning-set combinatorics (five-vertex covering pair)


def test_five_vertex_pair_counts():
    a = vset([0, 1, 3, 4])
    b = vset([1, 2, 3])
    star = conditioning_set(5, a, b, PropertyKind.WSM)
    wa = {induced_subgraph(g, a) for g in star}
    wb = {induced_subgraph(g, b) for g in star}
    assert len(star) == 64
    assert len(wa) == 16
    assert len(wb) == 4

    whole = conditioning_set(5, a, b, PropertyKind.SM)
    # All 32 edge patterns on the left part contain the required edge, but
    # two of them are chordless 4-cycles and cannot occur inside a
    # decomposable host, leaving 30 distinct induced pieces.
    assert len({induced_subgraph(g, a) for g in whole}) == 30
    assert len(whole) == 120

    assert set(star) <= set(whole)
    plus = conditioning_set(5, a, b, PropertyKind.EWSM)
    assert set(plus) <= set(star)


# ---------------------------------------------------------------------------
# Constructive fit


def test_fit_uniform_three_vertices():
    d = normalize_by_enumeration(uniform_csf(3))
    law = fit_csf_from_density(d)
    for mask in range(8):
        assert law.phi.log_potential(mask) == pytest.approx(math.log(1 / 8), rel=1e-12)
    for v in range(3):
        assert law.psi.log_potential(1 << v) == pytest.approx(math.log(1 / 8), rel=1e-12)
    path = complete_sets_graph(3, [vset([0, 1]), vset([1, 2])])
    assert math.exp(log_density_unnorm(law, path)) == pytest.approx(1 / 8, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_fit_reconstructs_density(seed):
    d = wsm_density(4, seed=seed + 100)
    law = fit_csf_from_density(d)
    redone = normalize_by_enumeration(law)
    worst = max(abs(redone.prob(g) - p) / p for g, p in d.items())
    assert worst < 1e-9


def test_fit_has_proportionality_constant_one():
    d = wsm_density(4, seed=42)
    law = fit_csf_from_density(d)
    for g, p in d.items():
        assert math.exp(log_density_unnorm(law, g)) == pytest.approx(p, rel=1e-9)


def test_fit_requires_full_support():
    d = normalize_by_enumeration(hub_law(4, vset([0])))
    with pytest.raises(DomainError):
        fit_csf_from_density(d)


# ---------------------------------------------------------------------------
# Identity checks


def test_product_identity_single_clique():
    d = wsm_density(4, seed=5)
    assert verify_lemma1_identity(d, Graph.complete(4)) < 1e-12


def test_product_identity_two_cliques():
    d = wsm_density(4, seed=6)
    g = complete_sets_graph(4, [vset([0, 1, 2]), vset([2, 3])])
    assert verify_lemma1_identity(d, g) < 1e-10


@pytest.mark.parametrize("seed", range(2))
def test_product_identity_all_graphs(seed):
    d = wsm_density(4, seed=seed + 12)
    for g in enumerate_decomposable(4):
        assert verify_lemma1_identity(d, g) < TOL, g


def test_ratio_invariance():
    d = wsm_density(4, seed=17)
    assert verify_lemma2_ratio(d, vset([0])) < TOL
    d3 = wsm_density(3, seed=17)
    assert verify_lemma2_ratio(d3, 0) < TOL


def test_ratio_invariance_breaks_off_family():
    d = wsm_density(4, seed=17)
    single_edge = next(g for g in enumerate_decomposable(4) if g.edge_mask.bit_count() == 1)
    bumped = perturb_density(d, single_edge, 2.0)
    worst = max(verify_lemma2_ratio(bumped, s) for s in range(16) if (15 & ~s).bit_count() >= 2)
    assert worst > TOL


def test_ratio_invariance_domain():
    d = wsm_density(3, seed=1)
    with pytest.raises(DomainError):
        verify_lemma2_ratio(d, vset([0, 1]))


# ---------------------------------------------------------------------------
# Constraint-system analysis


def test_dimension_analysis_at_four_vertices():
    analysis = ewsm_dimension_analysis(4)
    assert analysis.num_constraints_bound == 24
    assert analysis.rank <= 24
    assert analysis.free_dimension_bound == 60 - analysis.rank
    assert analysis.free_dimension_bound >= 36
    assert analysis.csf_dimension == 21


def test_dimension_analysis_other_sizes_need_force():
    with pytest.raises(DomainError):
        ewsm_dimension_analysis(3)
    analysis = ewsm_dimension_analysis(3, force=True)
    assert analysis.csf_dimension == 7


def test_every_factorisation_density_satisfies_the_constraints():
    rows = __import__("cliquesep.markov", fromlist=["_ewsm_constraint_rows"])._ewsm_constraint_rows(4)
    graphs = list(enumerate_decomposable(4))
    for seed in range(3):
        d = wsm_density(4, seed=seed + 50)
        logs = [math.log(d.prob(g)) for g in graphs]
        for row in rows:
            assert abs(sum(coef * logs[i] for i, coef in row.items())) < 1e-9


def test_constraints_ignore_connected_graphs_with_few_cliques():
    used = ewsm_constraint_column_support(4)
    graphs = list(enumerate_decomposable(4))
    for idx, g in enumerate(graphs):
        cl, _ = clique_separators(g)
        if is_connected(g) and len(cl) <= 2:
            assert idx not in used, g


def test_separating_density_exists():
    d = ewsm_not_wsm_density(4)
    assert check_property(d, PropertyKind.EWSM, TOL).passed
    report = check_property(d, PropertyKind.WSM, TOL)
    assert not report.passed
    assert report.worst_violation > 1e-3


def test_property_monotonicity_on_random_laws():
    # conditioning sets nest, so passing a stronger property implies the weaker
    for seed in range(3):
        d = normalize_by_enumeration(random_cef(4, seed=seed + 71))
        results = {kind: check_property(d, kind, TOL).passed for kind in PropertyKind}
        if results[PropertyKind.SM]:
            assert results[PropertyKind.WSM]
        if results[PropertyKind.WSM]:
            assert results[PropertyKind.EWSM]
