"""Finite measured groupoids, their convolution algebras and Haagerup-type witnesses."""
from .groupoid import (FiniteGroupoid, GroupoidError, bisection_partition, build_action_groupoid,
                       build_equivalence, build_group, cyclic_group, generated_subgroupoid,
                       measures, subgroupoid, validate)
from .convolution import ArrowFunction, FibreOperator, convolve, i_norm, involute, regular_rep
from .funkit import (coefficient, extend_by_zero, gns, is_cnd, is_positive_definite,
                     properness_profile, random_pd, schoenberg)
from .vnalg import (CpMap, VnElement, cond_expectation, cp_from_pd, complete_positivity_probe,
                    modular_conjugation, modular_flow, module_inner, pd_from_cp, state_phi, trace,
                    verify_stinespring)
from .treeing import (GraphingError, cayley_consistency, haagerup_from_treeing, is_treeing, orient,
                      tree_metric)
from .amenability import (amenability_witness_check, coefficient_of_regular, rho_operator,
                          xi_from_pd)

__all__ = [
    "FiniteGroupoid",
    "GroupoidError",
    "bisection_partition",
    "build_action_groupoid",
    "build_equivalence",
    "build_group",
    "cyclic_group",
    "generated_subgroupoid",
    "measures",
    "subgroupoid",
    "validate",
    "ArrowFunction",
    "FibreOperator",
    "convolve",
    "i_norm",
    "involute",
    "regular_rep",
    "coefficient",
    "extend_by_zero",
    "gns",
    "is_cnd",
    "is_positive_definite",
    "properness_profile",
    "random_pd",
    "schoenberg",
    "CpMap",
    "VnElement",
    "cond_expectation",
    "cp_from_pd",
    "complete_positivity_probe",
    "modular_conjugation",
    "modular_flow",
    "module_inner",
    "pd_from_cp",
    "state_phi",
    "trace",
    "verify_stinespring",
    "GraphingError",
    "cayley_consistency",
    "haagerup_from_treeing",
    "is_treeing",
    "orient",
    "tree_metric",
    "amenability_witness_check",
    "coefficient_of_regular",
    "rho_operator",
    "xi_from_pd",
]

__version__ = "0.1.0"
