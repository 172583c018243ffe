"""Typed unification ID/LP grammars: feature graphs, precedence checking, a
one-pass chart parser with precedence stores, and a brute-force oracle."""

from .avm import parse_avm, serialize_avm
from .chart import (
    ACCEPTED,
    ACCEPTED_PENDING,
    REJECTED,
    Chart,
    Edge,
    Outcome,
    ParseOptions,
    Parser,
    ParseTree,
    advance_dot,
    check_lp_store,
    dump,
    edge_subsumed,
    extract_parses,
    initialize,
    recognize,
    run,
    union_stores,
)
from .errors import GrammarError, UnificationFailure
from .fgraph import (
    FeatureGraph,
    GraphPair,
    Restrictor,
    copy,
    dif,
    equivalent,
    restrict,
    subgraph,
    subsumes,
    type_infer,
    unify,
    well_typed,
)
from .grammar import Grammar, IdRule, default_restrictor, load_grammar, lp_closure
from .hierarchy import (
    ApproprDecl,
    ApproprSpec,
    SubtypeDecl,
    TypeHierarchy,
    TypeSystem,
    approp,
    join,
    type_subsumes,
    validate_hierarchy,
)
from .lp import (
    LpRule,
    LpVerdict,
    Sequence,
    applies,
    expand,
    lp_acceptable,
    permute,
    precede_check,
    verdict,
    weakly_applies,
)
from .oracle import Bounds, DerivationTree, enumerate_language, oracle_recognize

__version__ = "0.1.0"
