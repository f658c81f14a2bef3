"""Independence structure of discrete multi-attribute utility functions."""

from .decompose import (
    DecompositionError,
    DecompositionReport,
    InteractionTerm,
    decompose_avoiding,
    decompose_over_cliques,
    interaction_terms,
    residual,
)
from .estimator import CliqueDecomposer
from .expectation import (
    ActionSet,
    BayesNet,
    ContainmentReport,
    ExplicitDistribution,
    ZeroProbabilityEvidence,
    choose_action,
    clique_marginal_projection,
    containment_report,
    eu_brute,
    eu_factored,
    joint_probability,
    marginal,
)
from .graph import (
    GraphoidReport,
    UndirectedGraph,
    build_perfect_map,
    check_graphoid_axioms,
    maximal_cliques,
    separates,
)
from .independence import (
    CaiQuery,
    UIWitness,
    conditional_utility,
    test_additive_partition,
    test_cai,
    test_cai_extended,
    test_gai,
    test_utility_independence,
)
from .model import (
    AdditiveDecomposition,
    GuardExceeded,
    ModelError,
    ToleranceConfig,
    UtilityTable,
    VariableSpace,
    affine_transform,
    evaluate_decomposition,
    evaluate_dense,
    merge_factors,
    state_index,
)

__version__ = "0.1.0"
