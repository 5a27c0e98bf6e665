"""Multi-population congestion games with heterogeneous information.

Models nonatomic routing games where sub-populations know only part of the
network, computes information-constrained user equilibria, classifies
network topologies (LI / SLI / rings / circuit games), and detects or
searches for the Braess paradox and its informational variants.
"""

from .game_core import (
    DEFAULT_BIG_M,
    CostFunction,
    Edge,
    GameError,
    GameSpec,
    InfoType,
    Network,
    Outcome,
    Population,
    TypeCost,
    Violation,
    edge_loads,
    eval_cost,
    social_cost,
    strategy_cost,
    type_cost,
    validate_game,
)
from .pathsets import (
    DEFAULT_PATH_CAP,
    PathExplosionError,
    StrategySet,
    build_strategy_sets,
    enumerate_paths,
    relevant_edges,
)
from .topology import (
    ImmunityCertificate,
    ImmunityVerdict,
    SetSystem,
    check_circuit_axioms,
    coincident_blocks,
    has_pigou_embedding,
    immunity_certificate,
    is_circuit_game,
    is_li,
    is_ring,
    is_simple,
    is_sli,
    is_tree,
)
from .equilibrium import (
    EquilibriumResult,
    SolverOptions,
    beckmann_potential,
    best_response_trace,
    brute_force_icue,
    equilibrium_gap,
    solve_icue,
)
from .paradox import (
    Expansion,
    ParadoxVerdict,
    VerdictWithheld,
    check_not_all_worse,
    detect_bp,
    detect_ibp,
    detect_ibpsc,
    expand_information,
    replay_witness,
    search_paradox,
)
from .scenarios import SCENARIO_IDS, Scenario, builtin_scenario
from .serialize import (
    GameFormatError,
    export_csv,
    export_dot,
    game_from_dict,
    game_to_dict,
    load_game,
    save_game,
)

__version__ = "0.1.0"
