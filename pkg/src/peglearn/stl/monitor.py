"""Quantitative monitoring of formulas over finite traces.

Robustness follows the usual max/min semantics on the reals extended with
+/-inf: a non-negative value means the formula holds (margin), a negative
value means it fails (deficit). Windows are clipped to the trace; a window
that clips to nothing is vacuous (min over it is +inf, max is -inf) except
at the top level, where it is reported as an error.
"""

import math

import numpy as np

from .formula import (
    Always,
    And,
    Eventually,
    Formula,
    FalseLiteral,
    Interval,
    Not,
    Or,
    Predicate,
    TrueLiteral,
    Until,
)


class MonitorError(ValueError):
    """Evaluation error: unknown signal, bad time index, empty top window."""


class Trace:
    """Named signals sampled at integer timesteps 0..length-1.

    All signals must be present, equally long (length >= 1), and finite.
    Arrays are stored read-only; a Trace never changes after construction.
    """

    def __init__(self, signals: dict):
        if not signals:
            raise MonitorError("a trace needs at least one signal")
        arrays = {}
        length = None
        for name, values in signals.items():
            arr = np.asarray(values, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise MonitorError(f"signal {name!r} must be a non-empty 1-d sequence")
            if not np.isfinite(arr).all():
                raise MonitorError(f"signal {name!r} contains non-finite samples")
            if length is None:
                length = arr.size
            elif arr.size != length:
                raise MonitorError(
                    f"signal {name!r} has {arr.size} samples, expected {length} (all signals must align)"
                )
            arr.flags.writeable = False
            arrays[name] = arr
        self._signals = arrays
        self.length = int(length)

    @property
    def signal_names(self) -> tuple:
        return tuple(self._signals)

    def signal(self, name: str) -> np.ndarray:
        try:
            return self._signals[name]
        except KeyError:
            raise MonitorError(f"signal {name!r} absent from trace (has: {sorted(self._signals)})") from None

    def __len__(self) -> int:
        return self.length


def _window(interval: Interval, t: int, length: int) -> range:
    """Indices of (t + interval) clipped to [0, length-1]; may be empty."""
    lo = t + interval.lo
    hi = length - 1 if interval.hi is None else min(t + interval.hi, length - 1)
    return range(lo, hi + 1)


def _eval(f: Formula, trace: Trace, memo: dict) -> np.ndarray:
    """Robustness of f at every timestep, computed bottom-up with sharing."""
    cached = memo.get(f)
    if cached is not None:
        return cached
    L = trace.length
    if isinstance(f, Predicate):
        sig = trace.signal(f.signal)
        out = sig - f.threshold if f.op in (">", ">=") else f.threshold - sig
    elif isinstance(f, TrueLiteral):
        out = np.full(L, math.inf)
    elif isinstance(f, FalseLiteral):
        out = np.full(L, -math.inf)
    elif isinstance(f, Not):
        out = -_eval(f.child, trace, memo)
    elif isinstance(f, And):
        out = np.minimum(_eval(f.left, trace, memo), _eval(f.right, trace, memo))
    elif isinstance(f, Or):
        out = np.maximum(_eval(f.left, trace, memo), _eval(f.right, trace, memo))
    elif isinstance(f, (Always, Eventually)):
        child = _eval(f.child, trace, memo)
        vacuous = math.inf if isinstance(f, Always) else -math.inf
        fold = np.min if isinstance(f, Always) else np.max
        out = np.empty(L)
        for t in range(L):
            w = _window(f.interval, t, L)
            out[t] = fold(child[w.start : w.stop]) if len(w) else vacuous
    elif isinstance(f, Until):
        left = _eval(f.left, trace, memo)
        right = _eval(f.right, trace, memo)
        out = np.empty(L)
        for t in range(L):
            w = _window(f.interval, t, L)
            best = -math.inf
            held = math.inf  # min of left over [t, tau); starts empty = vacuously +inf
            nxt = t
            for tau in w:
                while nxt < tau:
                    held = min(held, left[nxt])
                    nxt += 1
                best = max(best, min(right[tau], held))
            out[t] = best
    else:
        raise TypeError(f"not a formula: {f!r}")
    out = np.asarray(out, dtype=float)
    out.flags.writeable = False
    memo[f] = out
    return out


def robustness_signal(f: Formula, trace: Trace) -> np.ndarray:
    """Robustness of f at every timestep of the trace (read-only array)."""
    return _eval(f, trace, {})


def robustness(f: Formula, trace: Trace, t: int = 0) -> float:
    """Robustness of f on the trace at timestep t.

    Raises MonitorError if t is out of range or the formula's own window
    clips to nothing at t (a vacuous verdict at the top level is almost
    always a modelling mistake, so it is refused rather than defaulted).
    """
    if not 0 <= t < trace.length:
        raise MonitorError(f"timestep {t} out of range for trace of length {trace.length}")
    if isinstance(f, (Always, Eventually, Until)) and len(_window(f.interval, t, trace.length)) == 0:
        raise MonitorError(
            f"window {f.interval} at t={t} is empty for trace of length {trace.length}"
        )
    return float(robustness_signal(f, trace)[t])


def boolean_sat(f: Formula, trace: Trace, t: int = 0) -> bool:
    """Boolean verdict; zero robustness counts as satisfied."""
    return robustness(f, trace, t) >= 0


def normalize_robustness(value: float, scale: float = 1.0) -> float:
    """Squash a robustness value into (-1, 1) with tanh(value / scale).

    Monotone, sign-preserving, and maps +/-inf to +/-1. scale must be > 0.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if math.isinf(value):
        return math.copysign(1.0, value)
    return math.tanh(value / scale)
