"""Multicut relaxations, rounding algorithms, and cut/CSP reductions.

The package is organized around a weighted supply graph plus a directed
demand graph.  `core` holds the instance model and demand-graph structure
analysis, `lp` a generic linear-program container and solver, `distlp` the
distance relaxation with brute-force oracles, `labellp` the reachability
label relaxation and its exchange with the distance form, `rounding` the
derandomized threshold rounding for directed instances, `uml` the
undirected pipeline via uniform metric labeling, `csp` the predicate
family encoding with both reductions, and `cli`/`serialize`/`generate`
the command-line surface.
"""

from .core import (
    DemandAnalysis,
    DemandGraph,
    MatchingExtensionWitness,
    MulticutInstance,
    SupplyEdge,
    SupplyGraph,
    ValidationReport,
    analyze_demand,
    decompose_bipartite,
    find_induced_matching,
    find_matching_extension,
    make_instance,
    validate_instance,
)
from .distlp import (
    CutSolution,
    GapReport,
    brute_force_opt,
    build_distance_lp,
    flow_cut_gap,
    shortest_paths,
    solve_distance_lp,
    verify_cut,
)
from .labellp import (
    LabelSolution,
    build_label_lp,
    distlp_to_label,
    label_to_distlp,
    transport_labels,
)
from .rounding import (
    RoundingOutcome,
    ball_cut,
    compute_ball_distance,
    cut_probability_profile,
    derandomized_round,
    extract_matching_extension,
)
from .uml import (
    UMLInstance,
    enumerate_mis,
    reduce_to_uml,
    round_labeling,
    solve_tk2,
    solve_uml_lp,
)
from .csp import (
    BasicSolution,
    CSPInstance,
    CSPTuple,
    PredicateFamily,
    basic_to_label,
    brute_force_csp,
    build_basic_lp,
    build_predicate_family,
    csp_to_multicut,
    label_to_basic,
    multicut_to_csp,
    preprocess_supply,
    undirected_gadget,
)
from .generate import gen_instance
from .lp import LinearProgram, LPResult, check_point, solve_lp

__all__ = [name for name in dir() if not name.startswith("_")]
