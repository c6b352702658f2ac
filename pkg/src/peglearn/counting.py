"""Closed-form search-space sizes cross-checked by brute-force enumeration.

Two spaces matter for ranking specifications: chains ("a > b = c" style
orderings over n items) and directed acyclic graphs over n nodes. Each has
a closed form and an independent enumerator; the DAG closed form is an
approximation that undercounts the cyclic assignments it subtracts, so the
two routes are expected to disagree from n = 4 upward. The report makes
that agreement (or divergence) explicit instead of hiding it.
"""

import itertools
from dataclasses import dataclass

_ACYCLIC = 0
_FWD = 1
_REV = 2


@dataclass(frozen=True)
class CountReport:
    """One space size, by formula and (optionally) by enumeration."""

    kind: str
    n: int
    formula_value: int
    enumerated_value: int | None
    agree: bool | None

    def as_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "formula_value": self.formula_value,
            "enumerated_value": self.enumerated_value,
            "agree": self.agree,
        }


def ordering_count_formula(n: int, ops: int = 2) -> int:
    """n! * (ops^(n-1) - 1) + 1 distinct chains over n items.

    Chains interleave the n items with n-1 operators drawn from an
    `ops`-symbol alphabet (here: > and =); the n! all-equality chains
    describe the same ordering, hence the collapse to a single +1.
    Exact big-integer arithmetic.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if ops < 1:
        raise ValueError(f"ops must be >= 1, got {ops}")
    import math

    return math.factorial(n) * (ops ** (n - 1) - 1) + 1


def ordering_count_enumerate(n: int) -> int:
    """Count the chains by listing them; guard keeps the blow-up sane.

    A chain is a permutation of the items plus a >/= choice between
    neighbors; chains made of nothing but = are identified with each other
    (any item order spells the same statement). Chains containing at least
    one > are distinct objects in this space even when they denote the same
    weak ordering, matching the closed form's search-space semantics.
    """
    if not 1 <= n <= 7:
        raise ValueError(f"n must be in [1, 7] for enumeration, got {n}")
    seen = set()
    for perm in itertools.permutations(range(n)):
        for ops_choice in itertools.product(">=", repeat=n - 1):
            if all(op == "=" for op in ops_choice):
                seen.add("all-equal")
            else:
                seen.add((perm, ops_choice))
    return len(seen)


def digraph_count_formula(n: int) -> int:
    """3^(n(n-1)/2) - 2^(n+1) + n^2 + n + 2, exact big integers.

    Starts from all {none, ->, <-} assignments to unordered pairs and
    subtracts a closed-form estimate of the cyclic ones; that estimate is
    only an estimate, so compare with dag_count_enumerate before trusting
    it (they already part ways at n = 4: 719 vs the true 543).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 3 ** (n * (n - 1) // 2) - 2 ** (n + 1) + n * n + n + 2


def _is_acyclic(n, edges) -> bool:
    # Kahn's algorithm on a successor-list graph
    indegree = [0] * n
    succs = [[] for _ in range(n)]
    for i, j in edges:
        succs[i].append(j)
        indegree[j] += 1
    ready = [v for v in range(n) if indegree[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for s in succs[v]:
            indegree[s] -= 1
            if indegree[s] == 0:
                ready.append(s)
    return seen == n


def dag_count_enumerate(n: int) -> int:
    """Count DAGs over n labeled nodes by brute force (n <= 5).

    Assign {none, ->, <-} to every unordered pair and keep the acyclic
    assignments. 3^(n(n-1)/2) candidates, so the guard is tight.
    """
    if not 1 <= n <= 5:
        raise ValueError(f"n must be in [1, 5] for enumeration, got {n}")
    pairs = list(itertools.combinations(range(n), 2))
    count = 0
    for assignment in itertools.product((_ACYCLIC, _FWD, _REV), repeat=len(pairs)):
        edges = [
            (i, j) if direction == _FWD else (j, i)
            for (i, j), direction in zip(pairs, assignment)
            if direction != _ACYCLIC
        ]
        if _is_acyclic(n, edges):
            count += 1
    return count


def count_report(kind: str, n: int, enumerate_too: bool = False) -> CountReport:
    """Build a CountReport for `kind` in {"orderings", "dags"}."""
    if kind == "orderings":
        formula = ordering_count_formula(n)
        enumerated = ordering_count_enumerate(n) if enumerate_too else None
    elif kind == "dags":
        formula = digraph_count_formula(n)
        enumerated = dag_count_enumerate(n) if enumerate_too else None
    else:
        raise ValueError(f"kind must be 'orderings' or 'dags', got {kind!r}")
    agree = None if enumerated is None else formula == enumerated
    return CountReport(kind, n, formula, enumerated, agree)
