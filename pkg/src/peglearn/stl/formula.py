"""Temporal-logic formula trees over named, discretely sampled signals.

A formula is an immutable tree built from comparison predicates, boolean
connectives, and the bounded temporal operators always / eventually / until.
Time bounds are integer sample indices; the upper bound may be left open
("end"), meaning end of whatever trace the formula is evaluated on.
"""

from dataclasses import dataclass
from typing import Union

COMPARATORS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class Interval:
    """Closed integer window [lo, hi]; hi=None stands for end of trace."""

    lo: int
    hi: int | None

    def __post_init__(self) -> None:
        if not isinstance(self.lo, int) or isinstance(self.lo, bool):
            raise ValueError(f"interval lower bound must be an integer, got {self.lo!r}")
        if self.lo < 0:
            raise ValueError(f"interval lower bound must be >= 0, got {self.lo}")
        if self.hi is not None:
            if not isinstance(self.hi, int) or isinstance(self.hi, bool):
                raise ValueError(f"interval upper bound must be an integer or None, got {self.hi!r}")
            if self.hi < self.lo:
                raise ValueError(f"malformed interval [{self.lo},{self.hi}]: lower bound exceeds upper bound")

    def __str__(self) -> str:
        hi = "end" if self.hi is None else str(self.hi)
        return f"[{self.lo},{hi}]"


@dataclass(frozen=True)
class Predicate:
    """Atomic comparison `signal cmp threshold`."""

    signal: str
    op: str
    threshold: float

    def __post_init__(self) -> None:
        if not self.signal or not isinstance(self.signal, str):
            raise ValueError(f"predicate needs a signal name, got {self.signal!r}")
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparison operator {self.op!r}; expected one of {COMPARATORS}")
        object.__setattr__(self, "threshold", float(self.threshold))


@dataclass(frozen=True)
class TrueLiteral:
    pass


@dataclass(frozen=True)
class FalseLiteral:
    pass


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Always:
    interval: Interval
    child: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: Interval
    child: "Formula"


@dataclass(frozen=True)
class Until:
    interval: Interval
    left: "Formula"
    right: "Formula"


Formula = Union[
    Predicate, TrueLiteral, FalseLiteral, Not, And, Or, Always, Eventually, Until
]

TRUE = TrueLiteral()
FALSE = FalseLiteral()


def _fmt_number(x: float) -> str:
    # Integral thresholds print without a trailing .0; everything else uses
    # repr, which round-trips float64 exactly.
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _atomic(f: Formula) -> bool:
    return isinstance(f, (Predicate, TrueLiteral, FalseLiteral))


def _wrap(f: Formula) -> str:
    s = format_formula(f)
    return s if _atomic(f) else f"({s})"


def format_formula(f: Formula) -> str:
    """Render a formula in canonical syntax (G/F/U, &, |, !).

    The output re-parses to a structurally identical tree.
    """
    if isinstance(f, Predicate):
        return f"{f.signal} {f.op} {_fmt_number(f.threshold)}"
    if isinstance(f, TrueLiteral):
        return "true"
    if isinstance(f, FalseLiteral):
        return "false"
    if isinstance(f, Not):
        return f"!({format_formula(f.child)})"
    if isinstance(f, And):
        return f"{_wrap(f.left)} & {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left)} | {_wrap(f.right)}"
    if isinstance(f, Always):
        return f"G{f.interval}({format_formula(f.child)})"
    if isinstance(f, Eventually):
        return f"F{f.interval}({format_formula(f.child)})"
    if isinstance(f, Until):
        return f"{_wrap(f.left)} U{f.interval} {_wrap(f.right)}"
    raise TypeError(f"not a formula: {f!r}")
