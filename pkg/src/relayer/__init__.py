"""relayer: reconstruct a layered conceptual architecture from an
eroded code model and migrate the model toward it with
behavior-preserving transformations."""

from ._kernel import ACTIVE_IMPL as kernel_impl
from .graph import (DependencyEdge, DependencyGraph, cbo_weight, to_dot,
                    unit_dependency_graph)
from .lab import (FixtureSpec, InjectionPlan, build_mvc_fixture,
                  exhaustive_oracle, inject_violations,
                  reconstruction_experiment, refactoring_experiment)
from .model import (CodeModel, Member, Parameter, Reference, Unit, load_model,
                    make_model, serialize, validate)
from .quality import (FitnessConfig, LayeredAssignment, QualityScore,
                      ViolationReport, assess_edges, classify_resolvability,
                      detect_violations, evaluate_quality, make_assignment,
                      order_layers)
from .reconstruct import (ReconstructionConfig, ReflexionModel, greedy_seed,
                          hill_climb, reconstruct)
from .refactor import (IdentityLedger, MigrationConfig, MigrationLog,
                       Transformation, exclude_parameter, generate_candidates,
                       migrate, move_member, select_fittest)

__version__ = "0.1.0"

__all__ = [
    "CodeModel", "DependencyEdge", "DependencyGraph", "FitnessConfig",
    "FixtureSpec", "IdentityLedger", "InjectionPlan", "LayeredAssignment",
    "Member", "MigrationConfig", "MigrationLog", "Parameter", "QualityScore",
    "ReconstructionConfig", "Reference", "ReflexionModel", "Transformation",
    "Unit", "ViolationReport", "assess_edges", "build_mvc_fixture",
    "cbo_weight", "classify_resolvability", "detect_violations",
    "evaluate_quality", "exclude_parameter", "exhaustive_oracle",
    "generate_candidates", "greedy_seed", "hill_climb", "inject_violations",
    "kernel_impl", "load_model", "make_assignment", "make_model", "migrate",
    "move_member", "order_layers", "reconstruct", "reconstruction_experiment",
    "refactoring_experiment", "select_fittest", "serialize", "to_dot",
    "unit_dependency_graph", "validate",
]
