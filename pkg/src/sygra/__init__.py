"""Symbolic graph transformation and static conflict analysis.

The package rewrites attributed graphs whose attribute values are
linear-integer variables constrained by a formula, and statically
classifies rule pairs as conflicting or non-conflicting by enumerating
critical overlaps and checking parallel dependence and direct
confluence of the induced derivations.
"""

from .category import (
    ComplementResult,
    Cospan,
    GluingViolation,
    Span,
    cospan,
    pullback,
    pushout,
    pushout_complement,
    span,
)
from .conflicts import (
    CLASSIFICATIONS,
    ConflictAnalysisError,
    ConfluenceOutcome,
    DependenceResult,
    OverlapCandidate,
    OverlapReport,
    PairReport,
    check_direct_confluence,
    classify_pair,
    embeds,
    enumerate_overlaps,
    is_parallel_dependent,
)
from .egraph import EGraph, EGraphError, EGraphMorphism, SORTS
from .formula import (
    FALSE,
    TRUE,
    Formula,
    FormulaError,
    FormulaSyntaxError,
    format_formula,
    free_vars,
    parse_formula,
    substitute,
)
from .matching import active_kernel_name, are_isomorphic, enumerate_isomorphisms, find_morphisms
from .oracle import OracleReport, run_oracle
from .ruleio import (
    ParseError,
    ReportDocument,
    RuleSetDocument,
    format_ruleset,
    format_ruleset_json,
    load_ruleset,
    parse_ruleset,
    parse_ruleset_json,
    report_from_pairs,
    report_to_json,
)
from .solver import Solver, SolverConfig, SolverStats
from .symbolic import (
    Derivation,
    Inconsistent,
    Rule,
    SymbolicGraph,
    SymbolicGraphError,
    SymbolicMatch,
    apply_narrowing,
    apply_symbolic,
    constant_name,
    find_narrowing_matches,
    find_symbolic_matches,
    make_rule,
)
from .version import VERSION as __version__

__all__ = [
    "CLASSIFICATIONS",
    "ComplementResult",
    "ConflictAnalysisError",
    "ConfluenceOutcome",
    "Cospan",
    "DependenceResult",
    "Derivation",
    "EGraph",
    "EGraphError",
    "EGraphMorphism",
    "FALSE",
    "Formula",
    "FormulaError",
    "FormulaSyntaxError",
    "GluingViolation",
    "Inconsistent",
    "OracleReport",
    "OverlapCandidate",
    "OverlapReport",
    "PairReport",
    "ParseError",
    "ReportDocument",
    "Rule",
    "RuleSetDocument",
    "SORTS",
    "Solver",
    "SolverConfig",
    "SolverStats",
    "Span",
    "SymbolicGraph",
    "SymbolicGraphError",
    "SymbolicMatch",
    "TRUE",
    "active_kernel_name",
    "apply_narrowing",
    "apply_symbolic",
    "are_isomorphic",
    "check_direct_confluence",
    "classify_pair",
    "constant_name",
    "cospan",
    "embeds",
    "enumerate_isomorphisms",
    "enumerate_overlaps",
    "find_morphisms",
    "find_narrowing_matches",
    "find_symbolic_matches",
    "format_formula",
    "format_ruleset",
    "format_ruleset_json",
    "free_vars",
    "is_parallel_dependent",
    "load_ruleset",
    "make_rule",
    "parse_formula",
    "parse_ruleset",
    "parse_ruleset_json",
    "pullback",
    "pushout",
    "pushout_complement",
    "report_from_pairs",
    "report_to_json",
    "run_oracle",
    "span",
    "substitute",
    "__version__",
]
