"""Naive reference evaluator: the textbook recursive definition, no sharing.

Kept deliberately independent of the production monitor (no numpy arrays,
no memoization, single-timestep recursion) so that agreement between the
two is meaningful. Used by the conformance tests only.
"""

import math

from peglearn.stl import (
    Always,
    And,
    Eventually,
    FalseLiteral,
    Not,
    Or,
    Predicate,
    TrueLiteral,
    Until,
)


def _clip(interval, t, length):
    lo = t + interval.lo
    hi = length - 1 if interval.hi is None else min(t + interval.hi, length - 1)
    return list(range(lo, hi + 1))


def naive_robustness(f, trace, t):
    """Recursive-definition robustness of f on trace at time t."""
    L = trace.length
    if isinstance(f, Predicate):
        x = trace.signal(f.signal)[t]
        return x - f.threshold if f.op in (">", ">=") else f.threshold - x
    if isinstance(f, TrueLiteral):
        return math.inf
    if isinstance(f, FalseLiteral):
        return -math.inf
    if isinstance(f, Not):
        return -naive_robustness(f.child, trace, t)
    if isinstance(f, And):
        return min(naive_robustness(f.left, trace, t), naive_robustness(f.right, trace, t))
    if isinstance(f, Or):
        return max(naive_robustness(f.left, trace, t), naive_robustness(f.right, trace, t))
    if isinstance(f, Always):
        window = _clip(f.interval, t, L)
        if not window:
            return math.inf
        return min(naive_robustness(f.child, trace, tau) for tau in window)
    if isinstance(f, Eventually):
        window = _clip(f.interval, t, L)
        if not window:
            return -math.inf
        return max(naive_robustness(f.child, trace, tau) for tau in window)
    if isinstance(f, Until):
        window = _clip(f.interval, t, L)
        best = -math.inf
        for tau1 in window:
            right = naive_robustness(f.right, trace, tau1)
            if tau1 > t:
                held = min(naive_robustness(f.left, trace, tau2) for tau2 in range(t, tau1))
            else:
                held = math.inf  # empty inner window
            best = max(best, min(right, held))
        return best
    raise TypeError(f"not a formula: {f!r}")
