"""Global treatment effects from observational network data.

Graph identification, interference features, the OLS plug-in estimator with
its sandwich variance, and the simulation study that checks them.
"""
from .errors import (ConfigError, GraphError, IdentifiabilityError, NetfxError, NoClosedFormError,
                     SingularDesignError)
from .graph import (Dag, ProjectedGraph, ancestors, causal_nodes, children, d_separated, descendants,
                    enumerate_valid_adjustment_sets, forbidden_nodes, is_valid_adjustment, latent_projection,
                    parents, parse_dag, read_dag, stack_generic)
from .interference import (CustomFeature, DependencyGraph, FeatureSpec, FracTreatedParents,
                           FracTreatedParentsOfParents, InteractionNetwork, ThresholdTreatedParents,
                           compute_features, degree_scaling_slope, dependency_graph, max_degree, parents_set,
                           read_network, second_order_set, write_network)
from .sem import (Dataset, ErdosRenyi, FamilyPartition, Lattice2d, SemConfig, gen_erdos_renyi, gen_family,
                  gen_lattice2d, mc_tau_oracle, simulate, simulation_graph, preset_sem, true_tau)
from .estimator import (EstimateReport, RegressorSpec, Weights, adjust_and_estimate, build_design,
                        closed_form_weights, confidence_interval, estimate_tau, mc_weights, ols_fit,
                        sandwich_variance)
from .study import MetricsTable, StudyConfig, load_study_config, normality_diagnostic, preset, run_study
from .panel import PanelSchema, ingest_panel, mask_study_graph, run_observational, synthetic_panel

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GraphError", "IdentifiabilityError", "NetfxError", "NoClosedFormError",
    "SingularDesignError", "Dag", "ProjectedGraph", "ancestors", "causal_nodes", "children",
    "d_separated", "descendants", "enumerate_valid_adjustment_sets", "forbidden_nodes",
    "is_valid_adjustment", "latent_projection", "parents", "parse_dag", "read_dag",
    "stack_generic", "CustomFeature", "DependencyGraph", "FeatureSpec", "FracTreatedParents",
    "FracTreatedParentsOfParents", "InteractionNetwork", "ThresholdTreatedParents",
    "compute_features", "degree_scaling_slope", "dependency_graph", "max_degree", "parents_set",
    "read_network", "second_order_set", "write_network", "Dataset", "ErdosRenyi",
    "FamilyPartition", "Lattice2d", "SemConfig", "gen_erdos_renyi", "gen_family", "gen_lattice2d",
    "mc_tau_oracle", "simulate", "simulation_graph", "preset_sem", "true_tau", "EstimateReport",
    "RegressorSpec", "Weights", "adjust_and_estimate", "build_design", "closed_form_weights",
    "confidence_interval", "estimate_tau", "mc_weights", "ols_fit", "sandwich_variance",
    "MetricsTable", "StudyConfig", "load_study_config", "normality_diagnostic", "preset", "run_study",
    "PanelSchema", "ingest_panel", "mask_study_graph", "run_observational", "synthetic_panel",
]
