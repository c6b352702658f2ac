"""peglearn: performance-graph learning from rated demonstrations.

Demonstrations are scored against temporal-logic specs (stl, demos), the
rating matrix is distilled into a DAG of spec priorities with cumulative
demo scores (graphs), and the ranking feeds reward inference and tabular
RL in a stochastic gridworld (gridworld). Baselines, counting oracles for
the search spaces, and a CLI round out the package.
"""

from .baselines import hamming_distance, kmeans, kmsvm_ordering, linear_svm_train, random_ordering
from .counting import (
    count_report,
    dag_count_enumerate,
    digraph_count_formula,
    ordering_count_enumerate,
    ordering_count_formula,
)
from .demos import (
    Demonstration,
    PartialOrder,
    RatingError,
    RatingMatrix,
    SpecSet,
    build_rating_matrix,
    demo_partial_order,
    load_rating_matrix_csv,
    load_trajectory,
    save_rating_matrix_csv,
    save_trajectory,
)
from .graphs import (
    DEFAULT_EPSILON,
    GraphCycleError,
    PerformanceDag,
    Ranking,
    WeightedDigraph,
    WeightVector,
    aggregate,
    ancestor_counts,
    cumulative_scores,
    dense_ranks,
    export_dot,
    find_cycle,
    graph_from_json,
    graph_to_json,
    learn_performance_dag,
    load_weights_csv,
    local_graph,
    ordering_from_weights,
    reduce_to_dag,
    save_weights_csv,
    spec_weights,
    topological_order,
)
from .gridworld import (
    GridEnv,
    GridPipelineResult,
    QLearnConfig,
    QTables,
    RewardTable,
    Rollout,
    bfs_path,
    bfs_shortest_path_len,
    double_q_learn,
    evaluate_policy,
    greedy_policy,
    grid_pipeline,
    grid_specs,
    infer_state_rewards,
    load_policy_csv,
    rollout_to_demo,
    save_policy_csv,
    save_reward_csv,
    signals_from_rollout,
    synth_demos,
)
from .stl import ParseError, Trace, format_formula, parse_formula, robustness

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_EPSILON",
    "Demonstration",
    "GraphCycleError",
    "GridEnv",
    "GridPipelineResult",
    "ParseError",
    "PartialOrder",
    "PerformanceDag",
    "QLearnConfig",
    "QTables",
    "Ranking",
    "RatingError",
    "RatingMatrix",
    "RewardTable",
    "Rollout",
    "SpecSet",
    "Trace",
    "WeightVector",
    "WeightedDigraph",
    "aggregate",
    "ancestor_counts",
    "bfs_path",
    "bfs_shortest_path_len",
    "build_rating_matrix",
    "count_report",
    "cumulative_scores",
    "dag_count_enumerate",
    "demo_partial_order",
    "dense_ranks",
    "digraph_count_formula",
    "double_q_learn",
    "evaluate_policy",
    "export_dot",
    "find_cycle",
    "format_formula",
    "graph_from_json",
    "graph_to_json",
    "greedy_policy",
    "grid_pipeline",
    "grid_specs",
    "hamming_distance",
    "infer_state_rewards",
    "kmeans",
    "kmsvm_ordering",
    "learn_performance_dag",
    "linear_svm_train",
    "load_policy_csv",
    "load_rating_matrix_csv",
    "load_trajectory",
    "load_weights_csv",
    "local_graph",
    "ordering_count_enumerate",
    "ordering_count_formula",
    "ordering_from_weights",
    "parse_formula",
    "random_ordering",
    "reduce_to_dag",
    "robustness",
    "rollout_to_demo",
    "save_policy_csv",
    "save_rating_matrix_csv",
    "save_reward_csv",
    "save_trajectory",
    "save_weights_csv",
    "signals_from_rollout",
    "spec_weights",
    "synth_demos",
    "topological_order",
    "__version__",
]
