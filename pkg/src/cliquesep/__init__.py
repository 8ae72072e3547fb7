"""Clique-separator factorisation laws over decomposable graphs.

Core surface: chordal-graph primitives and exhaustive enumeration
(:mod:`cliquesep.graphs`), factorisation laws and exact normalisation
(:mod:`cliquesep.laws`), structural Markov property checking and the
constructive fit (:mod:`cliquesep.markov`), edge-flip Metropolis
sampling (:mod:`cliquesep.sampler`), and conjugate posterior updating
(:mod:`cliquesep.posterior`).
"""

from .errors import CapacityError, DomainError, EmptySupportError, PreconditionError
from .graphs import (
    ENUMERATION_LIMIT,
    Graph,
    PluperfectOrder,
    cliques,
    clique_separators,
    complete_sets_graph,
    count_decomposable,
    enumerate_decomposable,
    graph_from_json,
    graph_to_json,
    in_U_plus,
    in_U_star,
    induced_subgraph,
    is_complete,
    is_connected,
    is_decomposable,
    is_decomposition,
    members,
    pluperfect_order,
    separator_multiset,
    to_dot,
    vset,
)
from .laws import (
    ConstRule,
    CsfLaw,
    DensityTable,
    ExpLinearRule,
    PotentialTable,
    QuadraticRule,
    cef_dimension,
    csf_dimension,
    density_from_json,
    density_to_json,
    erdos_renyi_csf,
    hub_law,
    law_from_json,
    law_to_json,
    log_density_unnorm,
    normalize_by_enumeration,
    perturb_density,
    standardize,
    t_minus,
    t_plus,
    t_statistic,
    uniform_csf,
)
from .markov import (
    CrossRatioWitness,
    EwsmDimensionAnalysis,
    PropertyKind,
    PropertyReport,
    check_property,
    conditioning_set,
    ewsm_dimension_analysis,
    ewsm_not_wsm_density,
    fit_csf_from_density,
    verify_lemma1_identity,
    verify_lemma2_ratio,
)
from .posterior import (
    BernoulliDirichletScore,
    bernoulli_dirichlet_score,
    load_binary_csv,
    posterior_law,
)
from .sampler import (
    ChainState,
    SampleRecord,
    SampleSummary,
    default_init,
    initial_state,
    mh_step,
    propose_edge_flip,
    run_chain,
    visit_counts,
)

__version__ = "0.1.0"
