"""Formula trees, parsing, and quantitative monitoring."""

from .formula import (
    COMPARATORS,
    Always,
    And,
    Eventually,
    FALSE,
    FalseLiteral,
    Formula,
    Interval,
    Not,
    Or,
    Predicate,
    TRUE,
    TrueLiteral,
    Until,
    format_formula,
)
from .parser import ParseError, parse_formula
from .monitor import (
    MonitorError,
    Trace,
    boolean_sat,
    normalize_robustness,
    robustness,
    robustness_signal,
)

__all__ = [
    "COMPARATORS",
    "Always",
    "And",
    "Eventually",
    "FALSE",
    "FalseLiteral",
    "Formula",
    "Interval",
    "MonitorError",
    "Not",
    "Or",
    "ParseError",
    "Predicate",
    "TRUE",
    "Trace",
    "TrueLiteral",
    "Until",
    "boolean_sat",
    "format_formula",
    "normalize_robustness",
    "parse_formula",
    "robustness",
    "robustness_signal",
]
