"""Sabotage-game workbench: solvers, model checkers and a play service."""

from .graph import (
    EdgeSet,
    GameState,
    Graph,
    GraphFormatError,
    has_path,
    out_edges,
    parse_graph,
    serialize_graph,
)
from .structures import (
    SKIP,
    Agent,
    OwnedState,
    Play,
    StructureKind,
    enumerate_plays,
    initial_state,
    is_terminal,
    legal_actions,
    step,
    successors,
)
from .sml import build_gamma, build_rho, eval_sml, model_of, parse_sml
from .formulas import FormulaSyntaxError, UnsupportedFormulaError, normalize_path, parse_formula
from .checker import (
    CheckVerdict,
    ResourceBudgetError,
    StrategyTable,
    brute_force_check,
    check_state,
    eval_path,
    label,
    variant_formula,
    verify_witness,
)
from .epistemic import EpistemicRelation, check_epistemic, check_imp, related, relations_from_config
from .mincut import (
    CutReport,
    disconnected,
    dynamic_min_cut,
    edge_disjoint_paths,
    global_min_cut,
    static_min_cut,
)

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "CheckVerdict",
    "CutReport",
    "EdgeSet",
    "EpistemicRelation",
    "FormulaSyntaxError",
    "GameState",
    "Graph",
    "GraphFormatError",
    "OwnedState",
    "Play",
    "ResourceBudgetError",
    "SKIP",
    "StrategyTable",
    "StructureKind",
    "UnsupportedFormulaError",
    "brute_force_check",
    "build_gamma",
    "build_rho",
    "check_epistemic",
    "check_imp",
    "check_state",
    "disconnected",
    "dynamic_min_cut",
    "edge_disjoint_paths",
    "enumerate_plays",
    "eval_path",
    "eval_sml",
    "global_min_cut",
    "has_path",
    "initial_state",
    "is_terminal",
    "label",
    "legal_actions",
    "model_of",
    "normalize_path",
    "out_edges",
    "parse_formula",
    "parse_graph",
    "parse_sml",
    "related",
    "relations_from_config",
    "serialize_graph",
    "static_min_cut",
    "step",
    "successors",
    "variant_formula",
    "verify_witness",
]
