"""Command-line front end for the demonstration-ranking pipeline.

Subcommands cover the whole workflow: rate traces against temporal-logic
specs (eval), learn the spec-priority DAG and weights (learn), score and
rank demonstrations (rank), run the clustering/random baselines (baseline),
compare two rank vectors (compare), sanity-check the combinatorial search
spaces (count), and drive the gridworld end to end (grid).

Runs are deterministic: the same argv writes byte-identical output files.
Every artifact starts with a provenance header naming the tool version,
subcommand, seed, and epsilon so results stay traceable. Progress notes go
to stderr, never into output files.

Exit codes: 0 success, 1 usage errors, 2 invalid input, 3 internal
invariant violations (the evidence is dumped as a JSON fixture).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import hamming_distance, kmsvm_ordering, random_ordering
from .counting import count_report
from .demos import (
    SpecSet,
    build_rating_matrix,
    load_rating_matrix_csv,
    load_trajectory,
    save_rating_matrix_csv,
    save_trajectory,
)
from .graphs import (
    DEFAULT_EPSILON,
    GraphCycleError,
    cumulative_scores,
    export_dot,
    graph_from_json,
    graph_to_json,
    learn_performance_dag,
    load_weights_csv,
    save_weights_csv,
    spec_weights,
    topological_order,
)
from .gridworld import (
    GridEnv,
    QLearnConfig,
    evaluate_policy,
    grid_pipeline,
    grid_specs,
    load_policy_csv,
    save_policy_csv,
    save_reward_csv,
    synth_demos,
)
from .stl import format_formula

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

CYCLE_FIXTURE_NAME = "cycle_fixture.json"


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; 2 is taken by input
    # validation here, so usage problems are re-routed through UsageError.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------- provenance


def _provenance_lines(subcommand, seed=None, epsilon=None):
    """The four header lines stamped into every output artifact."""
    return [
        f"peglearn {__version__}",
        f"subcommand={subcommand}",
        f"seed={'none' if seed is None else int(seed)}",
        f"epsilon={'none' if epsilon is None else repr(float(epsilon))}",
    ]


def _provenance_dict(subcommand, seed=None, epsilon=None):
    return {
        "tool": f"peglearn {__version__}",
        "subcommand": subcommand,
        "seed": None if seed is None else int(seed),
        "epsilon": None if epsilon is None else float(epsilon),
    }


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


# ------------------------------------------------------------- arg parsing


def _demo_counts(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected GOOD,BAD counts like 6,2, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"demo counts must be integers, got {text!r}") from None


def _parse_normalize(text):
    """None, a single tanh scale, or per-spec name=scale pairs."""
    if text is None:
        return None
    try:
        return float(text)
    except ValueError:
        pass
    scales = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--normalize expects a number or name=scale pairs, got {text!r}")
        try:
            scales[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--normalize scale for {name.strip()!r} is not a number") from None
    return scales


# ------------------------------------------------------------ rank vectors


def _write_rank_vector(path, names, ranks, header):
    lines = [f"# {h}" for h in header]
    lines.append("spec,rank")
    for name, rank in zip(names, ranks):
        lines.append(f"{name},{int(rank)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _load_rank_vector(path):
    """Read spec,rank rows; also accepts spec,weight,rank files from learn."""
    names, ranks = [], []
    header = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            if line not in ("spec,rank", "spec,weight,rank"):
                raise ValueError(f"{path}:{lineno}: expected a spec,rank header, got {line!r}")
            header = line
            continue
        parts = line.split(",")
        if len(parts) != header.count(",") + 1:
            raise ValueError(f"{path}:{lineno}: wrong field count for {header!r}")
        try:
            names.append(parts[0])
            ranks.append(int(parts[-1]))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer rank {parts[-1]!r}") from None
    if not names:
        raise ValueError(f"{path}: no rank rows found")
    return tuple(names), np.array(ranks, dtype=int)


# -------------------------------------------------------------- subcommands


def cmd_eval(args):
    specs = SpecSet.parse_file(args.specs)
    paths = [Path(p) for p in args.traces]
    if args.traces_dir:
        found = sorted(Path(args.traces_dir).glob("*.json"))
        if not found:
            raise ValueError(f"no *.json trace files in {args.traces_dir}")
        paths.extend(found)
    if not paths:
        raise UsageError("eval needs --traces files and/or --traces-dir")
    demos = [load_trajectory(p) for p in paths]
    matrix = build_rating_matrix(demos, specs, normalize=_parse_normalize(args.normalize))
    save_rating_matrix_csv(matrix, args.out, header=_provenance_lines("eval"))
    logger.info(
        "eval: rated %d demos against %d specs -> %s", len(demos), len(specs.names), args.out
    )
    return EXIT_OK


def cmd_learn(args):
    matrix = load_rating_matrix_csv(args.ratings)
    dag = learn_performance_dag(
        matrix.values,
        epsilon=args.epsilon,
        reduce_epsilon=args.reduce_epsilon,
        on_cycle=args.on_cycle,
    )
    weights = spec_weights(dag, softmax=args.softmax)
    prov = _provenance_lines("learn", epsilon=args.epsilon)
    save_weights_csv(weights, matrix.spec_names, args.weights, header=prov)
    if args.dot:
        Path(args.dot).write_text(export_dot(dag, matrix.spec_names, header=prov))
    if args.json:
        Path(args.json).write_text(
            graph_to_json(
                dag,
                matrix.spec_names,
                provenance=_provenance_dict("learn", epsilon=args.epsilon),
            )
        )
    order = [matrix.spec_names[i] for i in topological_order(dag)]
    logger.info(
        "learn: epsilon=%r, %d edges, topological order %s",
        args.epsilon,
        len(dag.edges()),
        order,
    )
    return EXIT_OK


def cmd_rank(args):
    matrix = load_rating_matrix_csv(args.ratings)
    if args.weights:
        weights, names = load_weights_csv(args.weights)
    else:
        dag, names = graph_from_json(Path(args.dag).read_text())
        weights = spec_weights(dag)
    if tuple(names) != matrix.spec_names:
        raise ValueError(
            f"spec names differ: ratings {list(matrix.spec_names)} vs weights {list(names)}"
        )
    ranking = cumulative_scores(matrix.values, weights)
    lines = [f"# {h}" for h in _provenance_lines("rank")]
    lines.append("demo_id,score,rank")
    for position, idx in enumerate(ranking.order, start=1):
        lines.append(f"{matrix.demo_ids[idx]},{float(ranking.scores[idx])!r},{position}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    logger.info(
        "rank: best %s, worst %s -> %s",
        matrix.demo_ids[ranking.order[0]],
        matrix.demo_ids[ranking.order[-1]],
        args.out,
    )
    return EXIT_OK


def cmd_baseline(args):
    matrix = load_rating_matrix_csv(args.ratings)
    n = len(matrix.spec_names)
    if args.method == "kmsvm":
        ranks = kmsvm_ordering(matrix.values, seed=args.seed, train_on=args.train_on)
    else:
        levels = args.levels if args.levels is not None else n
        ranks = random_ordering(n, levels, args.seed)
    _write_rank_vector(
        args.out, matrix.spec_names, ranks, _provenance_lines("baseline", seed=args.seed)
    )
    logger.info("baseline %s: ranks %s -> %s", args.method, ranks.tolist(), args.out)
    return EXIT_OK


def cmd_compare(args):
    names_a, ranks_a = _load_rank_vector(args.a)
    names_b, ranks_b = _load_rank_vector(args.b)
    if names_a != names_b:
        raise ValueError(f"rank vectors name different specs: {list(names_a)} vs {list(names_b)}")
    doc = {
        "provenance": _provenance_dict("compare"),
        "specs": list(names_a),
        "length": len(names_a),
        "hamming_distance": hamming_distance(ranks_a, ranks_b),
    }
    text = json.dumps(doc, indent=1, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    logger.info("compare: hamming %r over %d specs", doc["hamming_distance"], doc["length"])
    return EXIT_OK


def cmd_count(args):
    report = count_report(args.kind, args.n, enumerate_too=args.enumerate)
    doc = report.as_dict()
    doc["provenance"] = _provenance_dict("count")
    text = json.dumps(doc, indent=1, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    logger.info(
        "count %s n=%d: formula %d, enumerated %s",
        args.kind,
        args.n,
        report.formula_value,
        report.enumerated_value,
    )
    return EXIT_OK


def cmd_grid_gen_demos(args):
    env = GridEnv.from_map_file(args.map, slip_p=args.slip, seed=args.seed)
    good, bad = args.demos
    demos = synth_demos(env, good, bad, args.seed)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    prov = _provenance_lines("grid gen-demos", seed=args.seed)
    for demo in demos:
        save_trajectory(demo, outdir / f"{demo.id}.json", header=prov)
    spec_lines = [f"# {h}" for h in prov]
    spec_lines += [f"{name}: {format_formula(f)}" for name, f in grid_specs(env)]
    (outdir / "specs.txt").write_text("\n".join(spec_lines) + "\n")
    logger.info("grid gen-demos: %d demos + specs.txt -> %s", len(demos), outdir)
    return EXIT_OK


def cmd_grid_run(args):
    env = GridEnv.from_map_file(args.map, slip_p=args.slip, seed=args.seed)
    good, bad = args.demos
    result = grid_pipeline(
        env,
        good,
        bad,
        args.seed,
        epsilon=args.epsilon,
        qlearn=QLearnConfig(episodes=args.episodes, seed=args.seed),
        trials=args.trials,
    )
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    prov = _provenance_lines("grid run", seed=args.seed, epsilon=args.epsilon)
    names = result.ratings.spec_names
    save_rating_matrix_csv(result.ratings, outdir / "ratings.csv", header=prov)
    save_weights_csv(result.weights, names, outdir / "weights.csv", header=prov)
    (outdir / "dag.dot").write_text(export_dot(result.dag, names, header=prov))
    save_reward_csv(result.rewards, outdir / "rewards.csv", header=prov)
    save_policy_csv(env, result.policy, outdir / "policy.csv", header=prov)
    report = {
        "provenance": _provenance_dict("grid run", seed=args.seed, epsilon=args.epsilon),
        "map": str(args.map),
        "slip": env.slip_p,
        "demos_good": good,
        "demos_bad": bad,
        "episodes": args.episodes,
        "trials": args.trials,
        "shortest_goal_time": result.t_goal,
        "spec_weights": {n: float(w) for n, w in zip(names, result.weights.values)},
        "success_rate": result.success_rate,
    }
    _write_json(outdir / "report.json", report)
    logger.info(
        "grid run: success rate %.3f over %d trials -> %s",
        result.success_rate,
        args.trials,
        outdir,
    )
    return EXIT_OK


def cmd_grid_eval(args):
    env = GridEnv.from_map_file(args.map, slip_p=args.slip, seed=args.seed)
    policy = load_policy_csv(args.policy, env)
    rate = evaluate_policy(env, policy, args.trials, args.seed)
    doc = {
        "provenance": _provenance_dict("grid eval", seed=args.seed),
        "map": str(args.map),
        "slip": env.slip_p,
        "trials": args.trials,
        "success_rate": rate,
    }
    text = json.dumps(doc, indent=1, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    logger.info("grid eval: success rate %.3f over %d trials", rate, args.trials)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser():
    parser = _Parser(prog="peglearn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"peglearn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("eval", help="rate demonstration traces against specs")
    p.add_argument("--specs", required=True, help="spec file with 'name: formula' lines")
    p.add_argument("--traces", nargs="*", default=[], help="trace JSON files")
    p.add_argument("--traces-dir", help="directory scanned for *.json traces (sorted)")
    p.add_argument("--normalize", help="tanh scale: a number or name=scale pairs")
    p.add_argument("--out", required=True, help="rating matrix CSV to write")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("learn", help="learn the spec-priority DAG and weights")
    p.add_argument("--ratings", required=True, help="rating matrix CSV")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="gap threshold")
    p.add_argument("--reduce-epsilon", type=float, help="reduction threshold override")
    p.add_argument("--on-cycle", choices=("repair", "raise"), default="repair")
    p.add_argument("--softmax", action="store_true", help="normalize weights to a simplex")
    p.add_argument("--weights", required=True, help="weights CSV to write")
    p.add_argument("--dot", help="optional Graphviz file to write")
    p.add_argument("--json", help="optional adjacency JSON to write")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("rank", help="score and rank demonstrations")
    p.add_argument("--ratings", required=True, help="rating matrix CSV")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--weights", help="weights CSV from learn")
    source.add_argument("--dag", help="adjacency JSON from learn (weights recomputed)")
    p.add_argument("--out", required=True, help="ranking CSV to write")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("baseline", help="rank specs with a baseline method")
    p.add_argument("--ratings", required=True, help="rating matrix CSV")
    p.add_argument("--method", required=True, choices=("kmsvm", "random"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=int, help="rank levels for random (default: #specs)")
    p.add_argument("--train-on", choices=("centroids", "points"), default="centroids")
    p.add_argument("--out", required=True, help="spec,rank CSV to write")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("compare", help="Hamming distance between two rank vectors")
    p.add_argument("--a", required=True, help="first spec,rank CSV")
    p.add_argument("--b", required=True, help="second spec,rank CSV")
    p.add_argument("--out", help="optional JSON report to write")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("count", help="size of the ordering/DAG search spaces")
    p.add_argument("--kind", choices=("dags", "orderings"), default="dags")
    p.add_argument("--n", type=int, required=True, help="number of specs")
    p.add_argument("--enumerate", action="store_true", help="cross-check by enumeration")
    p.add_argument("--out", help="optional JSON report to write")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("grid", help="gridworld demos, pipeline, policy evaluation")
    gsub = p.add_subparsers(dest="grid_command", required=True, metavar="GRID_SUBCOMMAND")

    g = gsub.add_parser("gen-demos", help="synthesize demonstration trajectories")
    g.add_argument("--map", required=True, help="map file (S/G/#/. grid)")
    g.add_argument("--slip", type=float, default=0.0, help="perpendicular slip probability")
    g.add_argument("--demos", type=_demo_counts, default=(6, 2), help="GOOD,BAD counts")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", required=True, help="directory for trajectories + specs.txt")
    g.set_defaults(func=cmd_grid_gen_demos)

    g = gsub.add_parser("run", help="demos -> ratings -> DAG -> rewards -> RL -> report")
    g.add_argument("--map", required=True, help="map file (S/G/#/. grid)")
    g.add_argument("--slip", type=float, default=0.0, help="perpendicular slip probability")
    g.add_argument("--demos", type=_demo_counts, default=(6, 2), help="GOOD,BAD counts")
    g.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="gap threshold")
    g.add_argument("--episodes", type=int, default=20000)
    g.add_argument("--trials", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", required=True, help="directory for all artifacts")
    g.set_defaults(func=cmd_grid_run)

    g = gsub.add_parser("eval", help="success rate of a saved policy")
    g.add_argument("--map", required=True, help="map file (S/G/#/. grid)")
    g.add_argument("--slip", type=float, default=0.0, help="perpendicular slip probability")
    g.add_argument("--policy", required=True, help="policy CSV from grid run")
    g.add_argument("--trials", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="optional JSON report to write")
    g.set_defaults(func=cmd_grid_eval)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphCycleError as exc:
        # should be impossible for ratings-derived graphs; dump the evidence
        # so the offending input can be replayed in a bug report
        fixture = Path.cwd() / CYCLE_FIXTURE_NAME
        doc = {
            "error": str(exc),
            "adjacency": None if exc.adjacency is None else exc.adjacency.tolist(),
            "cycle": None if exc.cycle is None else [int(i) for i in exc.cycle],
        }
        fixture.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        print(f"counterexample written to {fixture}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
