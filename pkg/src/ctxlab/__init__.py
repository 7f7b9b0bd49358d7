"""Logical Bell inequalities and contextuality of empirical models, in exact arithmetic."""
from .contextuality import (ContextualityClass, NoncontextualDecomposition, classify,
                            find_noncontextual_decomposition, global_sections)
from .core import (DomainError, EmpiricalModel, LimitExceeded, MeasurementCover, SupportModel,
                   bell_scenario_cover)
from .inequalities import (CorrelationInequality, InvalidInequality, LogicalBellInequality,
                           RationalInequality, canonical_support_inequality, correlation_to_logical,
                           evaluate_logical, expectation_vector, logical_to_correlation,
                           rational_to_logical)
from .logic import FormulaMultiset, TaggedFormula, Term, max_satisfiable, parse_formula
from .polytope import complete_logical_bell_set, correlation_polytope, noncontextual_polytope
from .zoo import zoo

__version__ = "0.1.0"

__all__ = [
    "ContextualityClass", "CorrelationInequality", "DomainError", "EmpiricalModel", "FormulaMultiset",
    "InvalidInequality", "LimitExceeded", "LogicalBellInequality", "MeasurementCover",
    "NoncontextualDecomposition", "RationalInequality", "SupportModel", "TaggedFormula", "Term",
    "bell_scenario_cover", "canonical_support_inequality", "classify", "complete_logical_bell_set",
    "correlation_polytope", "correlation_to_logical", "evaluate_logical", "expectation_vector",
    "find_noncontextual_decomposition", "global_sections", "logical_to_correlation", "max_satisfiable",
    "noncontextual_polytope", "parse_formula", "rational_to_logical", "zoo",
]
