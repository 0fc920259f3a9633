"""Structure-informed detection of functional brain subnetworks.

A structural connectivity graph is turned into a heat-diffusion influence
graph, thresholded into candidate components, and each candidate is tested
against multi-subject functional correlations with a combined permutation
test. Baselines, a penalised precision estimator and a seeded simulation
laboratory are included for comparison.
"""

from .detect import CandidateSet, candidates, component_profile, threshold
from .diffusion import InfluenceGraph, diffuse, suggest_gamma
from .errors import (ConfigError, ConvergenceError, InputError,
                     NeuroHotnetError, NumericalError, ParameterError,
                     StructureError)
from .graph import (NodeSet, WeightedGraph, connected_components,
                    normalize_symmetric, read_matrix, weighted_degrees,
                    write_matrix)
from .inference import (SubjectSample, TestResult, component_statistic,
                        fisher_z, null_statistics, pearson, permutation_test,
                        permutation_tests, select, ttest_variant)
from .baselines import naive_detect, pair_pvalues
from .precision import (PrecisionEstimate, glasso, penalty_from_influence,
                        pooled_covariance, population_glasso,
                        siggm_with_diffusion)
from .simlab import (SimConfig, SimResult, generate_subjects, generate_truth,
                     nearest_correlation, recovery_rate, run_study1,
                     run_study2)

__all__ = [
    "candidates",
    "CandidateSet",
    "component_profile",
    "component_statistic",
    "ConfigError",
    "connected_components",
    "ConvergenceError",
    "diffuse",
    "fisher_z",
    "generate_subjects",
    "generate_truth",
    "glasso",
    "InfluenceGraph",
    "InputError",
    "naive_detect",
    "nearest_correlation",
    "NeuroHotnetError",
    "NodeSet",
    "normalize_symmetric",
    "null_statistics",
    "NumericalError",
    "pair_pvalues",
    "ParameterError",
    "pearson",
    "penalty_from_influence",
    "permutation_test",
    "permutation_tests",
    "pooled_covariance",
    "population_glasso",
    "PrecisionEstimate",
    "read_matrix",
    "recovery_rate",
    "run_study1",
    "run_study2",
    "select",
    "siggm_with_diffusion",
    "SimConfig",
    "SimResult",
    "StructureError",
    "SubjectSample",
    "suggest_gamma",
    "TestResult",
    "threshold",
    "ttest_variant",
    "weighted_degrees",
    "WeightedGraph",
    "write_matrix",
]

__version__ = "0.1.0"
