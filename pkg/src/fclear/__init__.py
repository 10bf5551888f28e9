"""Clearing workbench for financial networks with debts and credit default swaps."""

from .depgraph import (
    DependencyGraph,
    SystemClass,
    build_dependency_graph,
    classify_system,
)
from .errors import FClearError
from .gadgets import (
    SystemBuilder,
    add_and,
    add_branching,
    add_const_cutoff_k,
    add_cutoff,
    add_gate,
    add_lossy_binary_pair,
    add_modified_branching,
    add_not,
    add_or,
    add_unhappy_penalty,
)
from .model import (
    DEFAULT_TOL,
    ClearingState,
    FinancialSystem,
    build_system,
    check_clearing,
    evaluate_state,
    update_step,
)
from .objectives import centrality, distance, evaluate_objective, preference_counts
from .reductions import (
    CompiledReduction,
    Graph,
    bounded_weight_transform,
    build_showcase,
    compile_decision,
    compile_objective,
    compile_pareto_suboptimal,
    compile_representative,
    graph_oracle,
    parse_graph,
)
from .solver import (
    Driver,
    ParetoVerdict,
    SolutionSet,
    SolveStatus,
    enumerate_binary_solutions,
    enumerate_default_sets,
    iterate_to_fixpoint,
    pareto_compare,
    solution_space_summary,
)

__version__ = "0.1.0"
