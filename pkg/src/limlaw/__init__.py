"""Exact logical limit laws for convex linear orders, layered permutations,
and compositions: structures, first-order model checking, back-and-forth
game deciders, and the class-level state machine with exact limits."""

from .structures import (
    BULLET,
    BuildStep,
    CompositionStructure,
    ConvexLinearOrder,
    FracturedOrder,
    LayeredPermutation,
    PartSequence,
    StructureView,
    as_relational,
    convex_to_layered,
    decompose,
    enumerate_shapes,
    expand_composition,
    fractured_to_convex,
    hat,
    layered_to_convex,
    oplus,
    replay,
    sample_uniform,
)
from .logic import (
    SIGNATURES,
    Signature,
    evaluate,
    format_formula,
    free_variables,
    parse,
    quantifier_depth,
    translate_composition,
    translate_layered,
    translate_to_convex,
)
from .efgame import (
    BudgetExceededError,
    GameConfig,
    GameSolver,
    MarkedSegment,
    duplicator_wins,
    equiv_k,
    fast_equiv_convex,
    fast_equiv_shapes,
    reduce_representative,
    whole_segment,
)
from .limitchain import (
    Chain,
    ChainState,
    Distribution,
    EstimateResult,
    InternalVerificationError,
    LimitAnalysis,
    PeriodicChainError,
    analyze_limit,
    build_chain,
    build_sentence_chain,
    chain_from_json,
    chain_to_dot,
    chain_to_json,
    chain_walk,
    check_fully_aperiodic,
    distribution_after,
    estimate_probability,
    limit_probability,
    limiting_distribution,
    transition_matrix,
    verify_chain_states,
)
from .stepauto import StepAutomaton, compile_sentence
from .battery import BATTERY, BatterySentence

__all__ = [name for name in dir() if not name.startswith("_")]
