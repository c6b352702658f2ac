"""Shared random generators for the property-style test sweeps."""

import numpy as np

from peglearn.stl import (
    Always,
    And,
    Eventually,
    FALSE,
    Interval,
    Not,
    Or,
    Predicate,
    TRUE,
    Trace,
    Until,
)

_OPS = (">", ">=", "<", "<=")


def gen_trace(rng, signal_names, max_length=20):
    """Random trace with dyadic samples so min/max ties occur and stay exact."""
    length = int(rng.integers(1, max_length + 1))
    return Trace(
        {name: rng.integers(-8, 9, size=length) / 2.0 for name in signal_names}
    )


def gen_interval(rng, span=5):
    lo = int(rng.integers(0, 4))
    if rng.random() < 0.2:
        return Interval(lo, None)
    return Interval(lo, lo + int(rng.integers(0, span)))


def gen_formula(rng, signal_names, depth):
    """Random formula of at most the given operator depth."""
    if depth <= 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.04:
            return TRUE
        if roll < 0.08:
            return FALSE
        name = signal_names[int(rng.integers(len(signal_names)))]
        op = _OPS[int(rng.integers(4))]
        threshold = int(rng.integers(-6, 7)) / 2.0
        return Predicate(name, op, threshold)
    kind = int(rng.integers(6))
    if kind == 0:
        return Not(gen_formula(rng, signal_names, depth - 1))
    if kind == 1:
        return And(gen_formula(rng, signal_names, depth - 1), gen_formula(rng, signal_names, depth - 1))
    if kind == 2:
        return Or(gen_formula(rng, signal_names, depth - 1), gen_formula(rng, signal_names, depth - 1))
    if kind == 3:
        return Always(gen_interval(rng), gen_formula(rng, signal_names, depth - 1))
    if kind == 4:
        return Eventually(gen_interval(rng), gen_formula(rng, signal_names, depth - 1))
    return Until(
        gen_interval(rng),
        gen_formula(rng, signal_names, depth - 1),
        gen_formula(rng, signal_names, depth - 1),
    )


def gen_dag(rng, n, max_weight=2.0):
    """Random DAG adjacency: random node order, upper-triangular edges."""
    perm = rng.permutation(n)
    adj = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.4:
                adj[perm[a], perm[b]] = rng.uniform(0.05, max_weight)
    return adj
