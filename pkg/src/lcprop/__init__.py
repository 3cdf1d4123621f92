"""Unification-grammar toolkit: feature dags, left-corner reachability
tables with per-path restrictors, and a top-down filtered chart parser."""

from .dag import (
    EMPTY,
    ConstEq,
    FeatureDag,
    PathEq,
    constraints_of,
    dag,
    embed,
    extract,
    from_constraints,
    restrict,
    subsumes,
    unify,
)
from .grammar import Grammar, GrammarError, Rule, load_grammar, load_grammar_file, rule_to_dag
from .parser import ParseResult, UnknownToken, parse, stats_compare
from .precompile import (
    NonterminationGuard,
    ReachabilityTable,
    RestrictorLedger,
    close_path,
    compile_table,
    detect,
    insert_entry,
    promote,
    propagate_step,
)

__all__ = [
    "EMPTY", "ConstEq", "FeatureDag", "PathEq", "constraints_of", "dag", "embed",
    "extract", "from_constraints", "restrict", "subsumes", "unify",
    "Grammar", "GrammarError", "Rule", "load_grammar", "load_grammar_file", "rule_to_dag",
    "ParseResult", "UnknownToken", "parse", "stats_compare",
    "NonterminationGuard", "ReachabilityTable", "RestrictorLedger", "close_path",
    "compile_table", "detect", "insert_entry", "promote", "propagate_step",
]
