"""Performance-graph learning over rated demonstrations.

Per demonstration, specifications are sorted by rating and every
sufficiently large pairwise gap becomes a directed edge from the better-
rated spec to the worse-rated one (weight = the gap). The per-demo graphs
are averaged edgewise, opposing edges are cancelled against each other, and
sub-threshold residue is dropped, leaving a DAG of specification priorities.
Spec weights count non-ancestors, so roots weigh most; demonstration scores
are rating rows dotted with those weights.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .demos import RatingMatrix

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.05  # meant for ratings normalized to [-1, 1]


class GraphCycleError(ValueError):
    """A directed cycle where a DAG was required; carries the evidence."""

    def __init__(self, message, adjacency=None, cycle=None):
        super().__init__(message)
        self.adjacency = None if adjacency is None else np.asarray(adjacency)
        self.cycle = None if cycle is None else list(cycle)


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Dense adjacency: adj[i, j] > 0 is the weight of edge i -> j.

    A zero entry means no edge. Weights are finite and non-negative; the
    diagonal is zero.
    """

    adj: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.isfinite(adj).all():
            raise ValueError("adjacency contains non-finite weights")
        if (adj < 0).any():
            raise ValueError("edge weights must be non-negative")
        if np.diagonal(adj).any():
            raise ValueError("self-loops are not allowed")
        object.__setattr__(self, "adj", adj)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def edges(self):
        """(i, j, weight) triples in deterministic (i, j) order."""
        rows, cols = np.nonzero(self.adj)
        return [(int(i), int(j), float(self.adj[i, j])) for i, j in zip(rows, cols)]


@dataclass(frozen=True, eq=False)
class PerformanceDag(WeightedDigraph):
    """A WeightedDigraph that is acyclic with at most one edge per pair."""

    def __post_init__(self):
        super().__post_init__()
        both = (self.adj > 0) & (self.adj.T > 0)
        if both.any():
            i, j = np.argwhere(both)[0]
            raise ValueError(f"edges in both directions between {int(i)} and {int(j)}")
        cycle = find_cycle(self.adj > 0)
        if cycle is not None:
            raise GraphCycleError(f"adjacency contains a cycle: {cycle}", self.adj, cycle)


def find_cycle(adj_bool) -> list | None:
    """Return one directed cycle as a node list [v0, ..., v0], or None."""
    adj = np.asarray(adj_bool, dtype=bool)
    n = adj.shape[0]
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, 0)]
        color[root] = 1
        while stack:
            node, nxt = stack[-1]
            succs = np.nonzero(adj[node])[0]
            if nxt < len(succs):
                stack[-1] = (node, nxt + 1)
                succ = int(succs[nxt])
                if color[succ] == 0:
                    color[succ] = 1
                    parent[succ] = node
                    stack.append((succ, 0))
                elif color[succ] == 1:
                    cycle = [succ, node]
                    walk = node
                    while walk != succ:
                        walk = parent[walk]
                        cycle.append(walk)
                    cycle.reverse()  # [succ, ..., node, succ] in edge order
                    return cycle[1:] + [cycle[1]]
            else:
                color[node] = 2
                stack.pop()
    return None


# ---------------------------------------------------------------- learning

def _local_adj_batch(rows: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-row pairwise-gap adjacency, batched: returns (m, n, n).

    Each row is sorted non-increasingly (stable, so rating ties keep input
    order); for sorted positions k < j the gap v_k - v_j >= epsilon becomes
    the weight of the edge (spec at k) -> (spec at j). Each ordered pair is
    produced exactly once, so writing the weight is assignment, never
    accumulation.
    """
    m, n = rows.shape
    order = np.argsort(-rows, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(rows, order, axis=1)
    gaps = sorted_vals[:, :, None] - sorted_vals[:, None, :]
    keep = (gaps >= epsilon) & np.triu(np.ones((n, n), dtype=bool), k=1)
    locals_ = np.zeros((m, n, n))
    rows_idx = np.arange(m)[:, None, None]
    locals_[rows_idx, order[:, :, None], order[:, None, :]] = np.where(keep, gaps, 0.0)
    return locals_


def local_graph(ratings_row, epsilon: float = DEFAULT_EPSILON) -> PerformanceDag:
    """Pairwise-gap DAG of one demonstration's rating row."""
    row = np.asarray(ratings_row, dtype=float)
    if row.ndim != 1 or row.size == 0:
        raise ValueError(f"rating row must be a non-empty vector, got shape {row.shape}")
    if not np.isfinite(row).all():
        raise ValueError("rating row contains non-finite values")
    _check_epsilon(epsilon)
    return PerformanceDag(_local_adj_batch(row[None, :], epsilon)[0])


def _check_epsilon(epsilon):
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ValueError(f"epsilon must be a finite non-negative number, got {epsilon}")


def aggregate(local_graphs) -> WeightedDigraph:
    """Edgewise arithmetic mean of local graphs (may be bidirectional)."""
    graphs = [
        g.adj if isinstance(g, WeightedDigraph) else np.asarray(g, dtype=float)
        for g in local_graphs
    ]
    if not graphs:
        raise ValueError("need at least one local graph to aggregate")
    sizes = {a.shape for a in graphs}
    if len(sizes) != 1:
        raise ValueError(f"local graphs disagree on size: {sorted(sizes)}")
    return WeightedDigraph(np.stack(graphs).mean(axis=0))


def reduce_to_dag(graph, epsilon: float = DEFAULT_EPSILON, on_cycle: str = "repair") -> PerformanceDag:
    """Cancel opposing edges and drop sub-epsilon residue.

    out[i, j] = max(0, g[i, j] - g[j, i]), then entries below epsilon are
    zeroed. Aggregates of local graphs cannot come out cyclic (around any
    k-cycle the thresholded gaps sum to less than k*epsilon, but a cycle
    would need every edge at >= epsilon), yet arbitrary digraphs can; a
    cycle check runs regardless. on_cycle="repair" removes the lightest
    edge of each cycle found and logs the offending matrix as a warning;
    on_cycle="raise" raises GraphCycleError carrying matrix and cycle.
    """
    _check_epsilon(epsilon)
    if on_cycle not in ("repair", "raise"):
        raise ValueError(f"on_cycle must be 'repair' or 'raise', got {on_cycle!r}")
    g = graph.adj if isinstance(graph, WeightedDigraph) else WeightedDigraph(graph).adj
    reduced = np.maximum(0.0, g - g.T)
    reduced[reduced < epsilon] = 0.0
    while True:
        cycle = find_cycle(reduced > 0)
        if cycle is None:
            break
        if on_cycle == "raise":
            raise GraphCycleError(
                f"reduction left a cycle {cycle}", adjacency=g, cycle=cycle
            )
        edges = list(zip(cycle[:-1], cycle[1:]))
        lightest = min(edges, key=lambda e: (reduced[e[0], e[1]], e))
        logger.warning(
            "reduction produced cycle %s from input %s; dropping lightest edge %s",
            cycle,
            g.tolist(),
            lightest,
        )
        reduced[lightest[0], lightest[1]] = 0.0
    return PerformanceDag(reduced)


def learn_performance_dag(
    ratings,
    epsilon: float = DEFAULT_EPSILON,
    reduce_epsilon: float | None = None,
    on_cycle: str = "repair",
) -> PerformanceDag:
    """Full pipeline: local graphs, mean aggregation, reduction to a DAG.

    The same epsilon serves both the local-gap threshold and the reduction
    threshold unless reduce_epsilon overrides the latter.
    """
    Z = ratings.values if isinstance(ratings, RatingMatrix) else np.asarray(ratings, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 1 or Z.shape[1] < 1:
        raise ValueError(f"ratings must be a non-empty 2-d matrix, got shape {Z.shape}")
    if not np.isfinite(Z).all():
        raise ValueError("ratings contain non-finite values")
    _check_epsilon(epsilon)
    mean_adj = _local_adj_batch(Z, epsilon).mean(axis=0)
    return reduce_to_dag(
        WeightedDigraph(mean_adj),
        epsilon if reduce_epsilon is None else reduce_epsilon,
        on_cycle=on_cycle,
    )


peglearn = learn_performance_dag  # short name matching the CLI verb


# ----------------------------------------------------------------- weights

@dataclass(frozen=True, eq=False)
class WeightVector:
    """Per-spec weights; raw weights live in [1, n], softmaxed in [0, 1]."""

    values: np.ndarray
    softmaxed: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"weights must be a non-empty vector, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("weights contain non-finite values")
        n = values.size
        if self.softmaxed:
            if (values < 0).any() or (values > 1).any() or abs(values.sum() - 1.0) > 1e-9:
                raise ValueError("softmaxed weights must lie in [0, 1] and sum to 1")
        else:
            if (values < 1).any() or (values > n).any():
                raise ValueError(f"weights must lie in [1, {n}], got {values.tolist()}")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def _reachability(adj_bool: np.ndarray) -> np.ndarray:
    """Boolean transitive closure (Floyd-Warshall)."""
    reach = np.asarray(adj_bool, dtype=bool).copy()
    for k in range(reach.shape[0]):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def ancestor_counts(dag) -> np.ndarray:
    """Number of (transitive) ancestors of each node."""
    adj = dag.adj if isinstance(dag, WeightedDigraph) else np.asarray(dag, dtype=float)
    return _reachability(adj > 0).sum(axis=0)


def spec_weights(dag, softmax: bool = False) -> WeightVector:
    """Weight each spec as n minus its ancestor count (roots weigh n).

    Ancestors are counted through full transitive reachability, not just
    direct parents. Requires an acyclic graph.
    """
    if not isinstance(dag, PerformanceDag):
        dag = PerformanceDag(dag if not isinstance(dag, WeightedDigraph) else dag.adj)
    n = dag.n
    w = (n - ancestor_counts(dag)).astype(float)
    if not softmax:
        return WeightVector(w)
    e = np.exp(w - w.max())
    return WeightVector(e / e.sum(), softmaxed=True)


# ----------------------------------------------------------------- ranking

@dataclass(frozen=True, eq=False)
class Ranking:
    """Demo scores plus the stable non-increasing order over demo indices."""

    scores: np.ndarray
    order: tuple

    def ranks(self) -> np.ndarray:
        """1-based rank of each demo (position in the sorted order)."""
        ranks = np.empty(len(self.order), dtype=int)
        for position, demo_index in enumerate(self.order, start=1):
            ranks[demo_index] = position
        return ranks


def cumulative_scores(ratings, weights) -> Ranking:
    """Score demos as ratings . weights and sort non-increasingly.

    Ties keep demo-index order (stable). weights may be a WeightVector or a
    plain vector, in which case it must satisfy the raw-weight invariant.
    """
    Z = ratings.values if isinstance(ratings, RatingMatrix) else np.asarray(ratings, dtype=float)
    if Z.ndim != 2:
        raise ValueError(f"ratings must be 2-d, got shape {Z.shape}")
    w = weights if isinstance(weights, WeightVector) else WeightVector(weights)
    if len(w) != Z.shape[1]:
        raise ValueError(f"{len(w)} weights for {Z.shape[1]} specs")
    scores = Z @ w.values
    order = tuple(int(i) for i in np.argsort(-scores, kind="stable"))
    return Ranking(scores, order)


def dense_ranks(values, descending: bool = True) -> np.ndarray:
    """Dense 1-based ranks; equal values share a rank, ranks are 1..k."""
    vals = np.asarray(values, dtype=float)
    uniq = np.unique(vals)  # ascending
    if descending:
        uniq = uniq[::-1]
    lookup = {v: r for r, v in enumerate(uniq.tolist(), start=1)}
    return np.array([lookup[v] for v in vals.tolist()], dtype=int)


def ordering_from_weights(weights) -> np.ndarray:
    """Dense rank vector over specs; the heaviest spec gets rank 1."""
    w = weights.values if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"weights must be a non-empty vector, got shape {w.shape}")
    return dense_ranks(w, descending=True)


def topological_order(dag) -> list:
    """Kahn's algorithm, smallest index first among ready nodes."""
    adj = (dag.adj if isinstance(dag, WeightedDigraph) else np.asarray(dag, dtype=float)) > 0
    n = adj.shape[0]
    indegree = adj.sum(axis=0).astype(int)
    remaining = set(range(n))
    order = []
    while remaining:
        ready = sorted(i for i in remaining if indegree[i] == 0)
        if not ready:
            raise GraphCycleError(f"graph is not acyclic; stuck with {sorted(remaining)}", adj)
        node = ready[0]
        order.append(node)
        remaining.discard(node)
        indegree -= adj[node].astype(int)
    return order


# ------------------------------------------------------------------ export

def export_dot(dag: WeightedDigraph, spec_names, header=()) -> str:
    """Graphviz text with 4-decimal edge labels, deterministic order."""
    names = list(spec_names)
    if len(names) != dag.n:
        raise ValueError(f"{len(names)} names for {dag.n} nodes")

    def quote(name):
        return '"' + str(name).replace('"', '\\"') + '"'

    lines = [f"// {h}" for h in header]
    lines.append("digraph performance {")
    for name in names:
        lines.append(f"  {quote(name)};")
    for i, j, weight in dag.edges():
        lines.append(f"  {quote(names[i])} -> {quote(names[j])} [label=\"{weight:.4f}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(dag: WeightedDigraph, spec_names, provenance=None) -> str:
    """Adjacency JSON; floats use repr via json, so a reload is exact."""
    names = list(spec_names)
    if len(names) != dag.n:
        raise ValueError(f"{len(names)} names for {dag.n} nodes")
    doc = {"spec_names": names, "adjacency": [[float(v) for v in row] for row in dag.adj]}
    if provenance:
        doc["provenance"] = provenance
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def graph_from_json(text: str):
    """Inverse of graph_to_json: returns (PerformanceDag, spec_names)."""
    doc = json.loads(text)
    try:
        names = tuple(doc["spec_names"])
        adj = np.asarray(doc["adjacency"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed graph JSON: {exc}") from None
    dag = PerformanceDag(adj)
    if len(names) != dag.n:
        raise ValueError(f"{len(names)} names for {dag.n} nodes")
    return dag, names


def save_weights_csv(weights, spec_names, path, header=()) -> None:
    """Write spec weights as CSV rows of spec,weight,rank.

    Ranks are dense (heaviest spec = 1, ties share). A ``# weights=raw`` or
    ``# weights=softmax`` directive records which flavor the file holds so a
    reload can rebuild the right WeightVector.
    """
    names = tuple(spec_names)
    if len(names) != len(weights):
        raise ValueError(f"{len(names)} names for {len(weights)} weights")
    for name in names:
        if "," in name or "\n" in name:
            raise ValueError(f"spec name {name!r} cannot be written as CSV")
    ranks = ordering_from_weights(weights)
    lines = [f"# {h}" for h in header]
    lines.append(f"# weights={'softmax' if weights.softmaxed else 'raw'}")
    lines.append("spec,weight,rank")
    for name, value, rank in zip(names, weights.values, ranks):
        lines.append(f"{name},{float(value)!r},{int(rank)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_weights_csv(path):
    """Inverse of save_weights_csv: returns (WeightVector, spec_names)."""
    softmaxed = False
    header_seen = False
    rows = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# weights="):
                flavor = line.split("=", 1)[1].strip()
                if flavor not in ("raw", "softmax"):
                    raise ValueError(f"{path}:{lineno}: unknown weights flavor {flavor!r}")
                softmaxed = flavor == "softmax"
            continue
        if not header_seen:
            if line != "spec,weight,rank":
                raise ValueError(
                    f"{path}:{lineno}: expected header 'spec,weight,rank', got {line!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            rows.append((parts[0], float(parts[1]), int(parts[2])))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric weight or rank") from None
    if not rows:
        raise ValueError(f"{path}: no weight rows found")
    names = tuple(r[0] for r in rows)
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate spec names")
    weights = WeightVector(np.array([r[1] for r in rows]), softmaxed=softmaxed)
    stored = np.array([r[2] for r in rows], dtype=int)
    if not np.array_equal(stored, ordering_from_weights(weights)):
        raise ValueError(f"{path}: rank column inconsistent with the weights")
    return weights, names
