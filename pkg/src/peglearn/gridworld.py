"""Stochastic 4-connected gridworld with temporal-logic task specs and tabular RL.

End-to-end loop: synthesize demonstrations on a slippery grid, rate them
against three specs (keep clear of obstacles, reach the goal, observe a step
inside the BFS horizon), learn spec weights from the rating matrix, propagate
each demo's cumulative score onto the cells it visited, and train a double
Q-learning agent on the resulting reward table.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .demos import Demonstration, SpecSet, build_rating_matrix
from .graphs import DEFAULT_EPSILON, cumulative_scores, learn_performance_dag, spec_weights
from .stl import Trace, parse_formula, robustness

# Actions, in fixed order everywhere: index -> (drow, dcol).
UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))
# A slip swaps the chosen action for one of its two perpendicular neighbors.
_PERPENDICULAR = ((LEFT, RIGHT), (LEFT, RIGHT), (UP, DOWN), (UP, DOWN))

_TERMINAL_KINDS = ("goal", "obstacle", "timeout")
_SYNTH_RETRIES = 200


def _manhattan(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class GridEnv:
    """Rectangular grid with one start, one goal, obstacles, and slip noise.

    Cells are (row, col) pairs, row 0 at the top. Moving off the grid leaves
    the agent in place; entering the goal or an obstacle ends the episode.
    With probability ``slip_p`` the chosen action is replaced by one of its
    two perpendicular neighbors, chosen uniformly. The environment holds no
    generator state itself: every stochastic method takes an explicit rng, so
    callers control determinism; ``seed`` merely records the intended default.
    """

    width: int
    height: int
    start: tuple
    goal: tuple
    obstacles: frozenset = frozenset()
    slip_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        object.__setattr__(self, "obstacles", frozenset(tuple(c) for c in self.obstacles))
        object.__setattr__(self, "slip_p", float(self.slip_p))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.height}x{self.width}")
        for cell in (self.start, self.goal, *self.obstacles):
            if not self.in_bounds(cell):
                raise ValueError(f"cell {cell} lies outside the {self.height}x{self.width} grid")
        if self.start == self.goal:
            raise ValueError("start and goal must be different cells")
        if self.start in self.obstacles or self.goal in self.obstacles:
            raise ValueError("start and goal cannot be obstacle cells")
        if not 0.0 <= self.slip_p <= 0.8:
            raise ValueError(f"slip probability must lie in [0, 0.8], got {self.slip_p}")

    @classmethod
    def from_map_text(cls, text, slip_p=0.0, seed=0) -> "GridEnv":
        """Parse a character map: S start, G goal, # obstacle, . free cell."""
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("empty grid map")
        width = len(rows[0])
        start = goal = None
        obstacles = set()
        for r, line in enumerate(rows):
            if len(line) != width:
                raise ValueError(f"map row {r} has length {len(line)}, expected {width}")
            for c, ch in enumerate(line):
                if ch == "S":
                    if start is not None:
                        raise ValueError("map has more than one start cell")
                    start = (r, c)
                elif ch == "G":
                    if goal is not None:
                        raise ValueError("map has more than one goal cell")
                    goal = (r, c)
                elif ch == "#":
                    obstacles.add((r, c))
                elif ch != ".":
                    raise ValueError(f"unknown map character {ch!r} at row {r}, column {c}")
        if start is None or goal is None:
            raise ValueError("map needs exactly one S and one G")
        return cls(width=width, height=len(rows), start=start, goal=goal,
                   obstacles=frozenset(obstacles), slip_p=slip_p, seed=seed)

    @classmethod
    def from_map_file(cls, path, slip_p=0.0, seed=0) -> "GridEnv":
        return cls.from_map_text(Path(path).read_text(), slip_p=slip_p, seed=seed)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    @property
    def step_cap(self) -> int:
        """Episode length bound: a generous multiple of any shortest path."""
        return 4 * (self.width + self.height)

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def cell_index(self, cell) -> int:
        return cell[0] * self.width + cell[1]

    def index_cell(self, index) -> tuple:
        return (index // self.width, index % self.width)

    def terminal_kind(self, cell):
        """'goal', 'obstacle', or None for a non-terminal cell."""
        if cell == self.goal:
            return "goal"
        if cell in self.obstacles:
            return "obstacle"
        return None

    def move(self, cell, action) -> tuple:
        """Deterministic move; attempts to leave the grid keep the agent put."""
        dr, dc = MOVES[action]
        nxt = (cell[0] + dr, cell[1] + dc)
        return nxt if self.in_bounds(nxt) else cell

    def step(self, cell, action, rng) -> tuple:
        """One stochastic transition; `rng` drives the slip draw."""
        if action not in (0, 1, 2, 3):
            raise ValueError(f"action must be one of 0..3, got {action!r}")
        if self.slip_p > 0.0 and rng.random() < self.slip_p:
            action = _PERPENDICULAR[action][rng.integers(2)]
        return self.move(cell, action)


@dataclass(frozen=True)
class Rollout:
    """A realized episode: visited cells, chosen actions, and how it ended.

    ``actions`` holds the *intended* action per transition (slips may move the
    agent elsewhere), so len(actions) == len(cells) - 1. ``terminal`` is one
    of 'goal', 'obstacle', 'timeout'.
    """

    cells: tuple
    actions: tuple
    terminal: str

    def __post_init__(self):
        cells = tuple(tuple(c) for c in self.cells)
        actions = tuple(int(a) for a in self.actions)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "actions", actions)
        if not cells:
            raise ValueError("a rollout needs at least one cell")
        if len(actions) != len(cells) - 1:
            raise ValueError(f"{len(cells)} cells require {len(cells) - 1} actions, got {len(actions)}")
        if self.terminal not in _TERMINAL_KINDS:
            raise ValueError(f"terminal must be one of {_TERMINAL_KINDS}, got {self.terminal!r}")
        for a, b in zip(cells, cells[1:]):
            if _manhattan(a, b) > 1:
                raise ValueError(f"consecutive cells {a} -> {b} are not 4-connected")

    def __len__(self):
        return len(self.cells)


def bfs_path(env: GridEnv, source=None) -> list:
    """Shortest obstacle-avoiding path from `source` (default: start) to goal.

    Returns the cell sequence including both endpoints. Deterministic:
    neighbors expand in fixed action order, so ties resolve identically on
    every run. Raises ValueError when the goal is unreachable.
    """
    source = env.start if source is None else tuple(source)
    parent = {source: None}
    queue = collections.deque([source])
    while queue:
        cell = queue.popleft()
        if cell == env.goal:
            path = []
            while cell is not None:
                path.append(cell)
                cell = parent[cell]
            return path[::-1]
        for action in range(4):
            nxt = env.move(cell, action)
            if nxt not in parent and nxt not in env.obstacles:
                parent[nxt] = cell
                queue.append(nxt)
    raise ValueError(f"goal {env.goal} is unreachable from {source}")


def bfs_shortest_path_len(env: GridEnv) -> int:
    """Number of steps on a shortest start-to-goal path."""
    return len(bfs_path(env)) - 1


def signals_from_rollout(env: GridEnv, rollout: Rollout) -> Trace:
    """Per-step signals: obstacle clearance, goal distance, time, position.

    d_obs is the Manhattan distance to the nearest obstacle — width+height
    when the map has none, which exceeds any achievable distance; d_goal the
    Manhattan distance to the goal; t the step index. row/col record the
    visited cell so a saved trace still identifies the path it took.
    """
    cells = rollout.cells
    if env.obstacles:
        obs = np.array(sorted(env.obstacles), dtype=float)
        pts = np.array(cells, dtype=float)
        d_obs = np.abs(pts[:, None, :] - obs[None, :, :]).sum(axis=2).min(axis=1)
    else:
        d_obs = np.full(len(cells), float(env.width + env.height))
    return Trace({
        "d_obs": d_obs,
        "d_goal": np.array([_manhattan(c, env.goal) for c in cells], dtype=float),
        "t": np.arange(len(cells), dtype=float),
        "row": np.array([c[0] for c in cells], dtype=float),
        "col": np.array([c[1] for c in cells], dtype=float),
    })


def grid_specs(env: GridEnv) -> SpecSet:
    """The three rating specs for grid demonstrations.

    avoid_obstacles: never stand on an obstacle (clearance stays >= 1);
    reach_goal: eventually stand on the goal; within_horizon: eventually see
    a timestep no later than the BFS bound. Building the set fails when the
    goal is unreachable, because the horizon comes from BFS. Note the last
    spec is satisfied by construction at evaluation time 0 (t starts at 0),
    so it contributes a constant column to any rating matrix — it shifts all
    cumulative scores equally and never changes a ranking.
    """
    t_goal = bfs_shortest_path_len(env)
    return SpecSet([
        ("avoid_obstacles", parse_formula("G[0,end](d_obs >= 1)")),
        ("reach_goal", parse_formula("F[0,end](d_goal < 1)")),
        ("within_horizon", parse_formula(f"F[0,end](t <= {t_goal})")),
    ])


def rollout_to_demo(env: GridEnv, rollout: Rollout, demo_id: str, metadata=None) -> Demonstration:
    """Package a rollout as a rateable demonstration."""
    meta = {"terminal": rollout.terminal}
    if metadata:
        meta.update(metadata)
    return Demonstration(id=demo_id, trace=signals_from_rollout(env, rollout), metadata=meta)


def _plan_action(env, cell):
    """First action along a BFS shortest path from `cell` to the goal."""
    path = bfs_path(env, cell)
    step = (path[1][0] - cell[0], path[1][1] - cell[1])
    return MOVES.index(step)


def _roll(env, rng, pick_action) -> Rollout:
    cells = [env.start]
    actions = []
    terminal = "timeout"
    for _ in range(env.step_cap):
        cell = cells[-1]
        action = pick_action(cell)
        nxt = env.step(cell, action, rng)
        actions.append(action)
        cells.append(nxt)
        kind = env.terminal_kind(nxt)
        if kind is not None:
            terminal = kind
            break
    return Rollout(tuple(cells), tuple(actions), terminal)


def _good_rollout(env, rng) -> Rollout:
    """Replan a BFS shortest path every step; slips may still derail it."""
    return _roll(env, rng, lambda cell: _plan_action(env, cell))


def _random_rollout(env, rng) -> Rollout:
    return _roll(env, rng, lambda cell: int(rng.integers(4)))


def _obstacle_seeking_rollout(env, rng) -> Rollout:
    """Greedy descent on distance-to-nearest-obstacle (random walk if none)."""
    if not env.obstacles:
        return _random_rollout(env, rng)
    obstacles = sorted(env.obstacles)

    def pick(cell):
        return min(range(4), key=lambda a: (min(_manhattan(env.move(cell, a), o) for o in obstacles), a))

    return _roll(env, rng, pick)


def _satisfies_all(env, rollout, specs) -> bool:
    trace = signals_from_rollout(env, rollout)
    return all(robustness(formula, trace, 0) >= 0.0 for _, formula in specs)


def synth_demos(env: GridEnv, n_good: int, n_bad: int, seed: int, retries: int = _SYNTH_RETRIES) -> list:
    """Deterministic demonstration batch: BFS followers, then junk walks.

    Good demos replan a shortest path every step under slip noise; the first
    one is retried on derived sub-seeds (up to `retries` attempts) until it
    satisfies all three specs, so downstream learning always sees a fully
    satisfying demo when n_good >= 1. Bad demos alternate uniform random
    walks with obstacle-seeking walks. Everything is derived from `seed`, so
    equal seeds give byte-identical demos.
    """
    if n_good < 0 or n_bad < 0:
        raise ValueError("demo counts must be non-negative")
    if retries < 1:
        raise ValueError("retries must be >= 1")
    specs = grid_specs(env) if n_good > 0 else None
    demos = []
    for k in range(n_good):
        if k == 0:
            for attempt in range(retries):
                rng = np.random.default_rng([seed, 0, k, attempt])
                roll = _good_rollout(env, rng)
                if roll.terminal == "goal" and _satisfies_all(env, roll, specs):
                    break
            else:
                raise ValueError(
                    f"no spec-satisfying demonstration in {retries} attempts; "
                    f"the map/slip combination (slip_p={env.slip_p}) is too hostile")
        else:
            rng = np.random.default_rng([seed, 0, k, 0])
            roll = _good_rollout(env, rng)
        demos.append(rollout_to_demo(env, roll, f"good_{k}", {"kind": "good"}))
    for k in range(n_bad):
        rng = np.random.default_rng([seed, 1, k])
        roll = _random_rollout(env, rng) if k % 2 == 0 else _obstacle_seeking_rollout(env, rng)
        demos.append(rollout_to_demo(env, roll, f"bad_{k}", {"kind": "bad"}))
    return demos


def demo_cells(demo: Demonstration) -> list:
    """Recover the visited cells from a demonstration's row/col signals."""
    rows = demo.trace.signal("row")
    cols = demo.trace.signal("col")
    return [(int(r), int(c)) for r, c in zip(rows, cols)]


@dataclass(frozen=True)
class RewardTable:
    """Per-cell rewards, shape (height, width), finite everywhere."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.size == 0:
            raise ValueError("reward table must be a non-empty 2-d array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("rewards must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def reward(self, cell) -> float:
        return float(self.values[cell[0], cell[1]])


def infer_state_rewards(env: GridEnv, demos, ratings, weights, *,
                        reward_span=(-0.1, -0.02), unvisited_margin=0.1) -> RewardTable:
    """Propagate demo cumulative scores onto the grid as per-cell rewards.

    Each visited cell receives the best (maximum) cumulative score among the
    demos that visited it, affinely rescaled into `reward_span`; unvisited
    free cells sit `unvisited_margin` below the span; the goal (+1) and
    obstacles (-1) are fixed anchors that override everything. What the
    construction must preserve is the relative order of cells, and any
    increasing affine map does that. The default span is a narrow band of
    strictly negative step costs: non-negative per-step rewards let an agent
    stall forever on a well-rated cell at no cost (or even get paid for it),
    which beats risking a slip near an obstacle to finish at the goal, so
    every non-goal cell charges a little. Pass reward_span=(0.0, 1.0) for the
    plain unit rescale if the consumer handles stalling some other way.
    """
    lo, hi = float(reward_span[0]), float(reward_span[1])
    if not lo < hi <= 1.0:
        raise ValueError(f"reward span must satisfy lo < hi <= 1, got ({lo}, {hi})")
    margin = float(unvisited_margin)
    if margin < 0.0:
        raise ValueError(f"unvisited margin must be non-negative, got {margin}")
    demos = list(demos)
    scores = cumulative_scores(ratings, weights).scores
    if len(scores) != len(demos):
        raise ValueError(f"{len(demos)} demos but {len(scores)} cumulative scores")

    best = {}
    for demo, score in zip(demos, scores):
        for cell in demo_cells(demo):
            if not env.in_bounds(cell):
                raise ValueError(f"demo {demo.id!r} visits {cell}, outside the grid")
            if cell not in best or score > best[cell]:
                best[cell] = score

    table = np.full((env.height, env.width), lo - margin)
    if best:
        smin = min(best.values())
        span = max(best.values()) - smin
        for cell, score in best.items():
            # convex combination: exact at both band endpoints
            frac = 1.0 if span == 0.0 else (score - smin) / span
            table[cell] = lo * (1.0 - frac) + hi * frac
    for cell in env.obstacles:
        table[cell] = -1.0
    table[env.goal] = 1.0
    return RewardTable(table)


@dataclass(frozen=True)
class QLearnConfig:
    """Double Q-learning hyperparameters; defaults match the studied grid."""

    gamma: float = 0.8
    alpha: float = 0.1
    episodes: int = 20000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.episodes < 1:
            raise ValueError(f"episode count must be >= 1, got {self.episodes}")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_end <= epsilon_start <= 1")


@dataclass(frozen=True)
class QTables:
    """The two action-value tables of double Q-learning, each (n_cells, 4)."""

    qa: np.ndarray
    qb: np.ndarray

    def __post_init__(self):
        qa = np.array(self.qa, dtype=float)
        qb = np.array(self.qb, dtype=float)
        if qa.shape != qb.shape or qa.ndim != 2 or qa.shape[1] != 4:
            raise ValueError(f"Q tables must share a (n_cells, 4) shape, got {qa.shape} and {qb.shape}")
        if not (np.all(np.isfinite(qa)) and np.all(np.isfinite(qb))):
            raise ValueError("Q tables must be finite")
        qa.setflags(write=False)
        qb.setflags(write=False)
        object.__setattr__(self, "qa", qa)
        object.__setattr__(self, "qb", qb)

    def combined(self) -> np.ndarray:
        return self.qa + self.qb


def double_q_learn(env: GridEnv, rewards: RewardTable, config: QLearnConfig = None) -> QTables:
    """Tabular double Q-learning with a linearly decaying epsilon-greedy policy.

    Episodes start at env.start and end on the goal, an obstacle, or the step
    cap, so sampling concentrates on the cells the final policy will actually
    cross. Each update flips a fair coin to pick the table to change and uses
    the other one to value the greedy next action; terminal transitions
    bootstrap nothing, cap truncation bootstraps normally (the episode is cut
    short, the task is not over). Deterministic given config.seed.
    """
    if config is None:
        config = QLearnConfig()
    if rewards.values.shape != (env.height, env.width):
        raise ValueError(
            f"reward table shape {rewards.values.shape} does not match the "
            f"{env.height}x{env.width} grid")
    rng = np.random.default_rng(config.seed)
    qa = np.zeros((env.n_cells, 4))
    qb = np.zeros((env.n_cells, 4))
    reward_flat = rewards.values.ravel()
    terminal_flat = np.zeros(env.n_cells, dtype=bool)
    for cell in env.obstacles:
        terminal_flat[env.cell_index(cell)] = True
    terminal_flat[env.cell_index(env.goal)] = True
    gamma, alpha = config.gamma, config.alpha
    decay_denom = max(config.episodes - 1, 1)
    cap = env.step_cap
    for episode in range(config.episodes):
        epsilon = config.epsilon_start + (config.epsilon_end - config.epsilon_start) * (episode / decay_denom)
        cell, s = env.start, env.cell_index(env.start)
        for _ in range(cap):
            if rng.random() < epsilon:
                action = int(rng.integers(4))
            else:
                action = int(np.argmax(qa[s] + qb[s]))
            nxt = env.step(cell, action, rng)
            s2 = env.cell_index(nxt)
            r = reward_flat[s2]
            done = terminal_flat[s2]
            if rng.integers(2) == 0:
                target = r if done else r + gamma * qb[s2, int(np.argmax(qa[s2]))]
                qa[s, action] += alpha * (target - qa[s, action])
            else:
                target = r if done else r + gamma * qa[s2, int(np.argmax(qb[s2]))]
                qb[s, action] += alpha * (target - qb[s, action])
            cell, s = nxt, s2
            if done:
                break
    return QTables(qa, qb)


def greedy_policy(q: QTables) -> np.ndarray:
    """Per-cell action maximizing the summed tables (ties: lowest action id)."""
    return np.argmax(q.combined(), axis=1)


def evaluate_policy(env: GridEnv, q, trials: int, seed: int) -> float:
    """Fraction of greedy rollouts that end on the goal within the step cap.

    `q` may be QTables or an already-extracted per-cell action array. Every
    trial draws from its own child generator derived from (seed, trial), so
    the outcome of trial i does not depend on how many trials run.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    policy = greedy_policy(q) if isinstance(q, QTables) else np.asarray(q)
    if policy.shape != (env.n_cells,):
        raise ValueError(f"policy must have one action per cell, got shape {policy.shape}")
    successes = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        cell = env.start
        for _ in range(env.step_cap):
            cell = env.step(cell, int(policy[env.cell_index(cell)]), rng)
            kind = env.terminal_kind(cell)
            if kind == "goal":
                successes += 1
            if kind is not None:
                break
    return successes / trials


@dataclass(frozen=True)
class GridPipelineResult:
    """Everything the demonstration-to-policy pipeline produced."""

    demos: tuple
    ratings: object
    dag: object
    weights: object
    rewards: RewardTable
    q: QTables
    policy: np.ndarray
    success_rate: float
    t_goal: int


def grid_pipeline(env: GridEnv, n_good=6, n_bad=2, seed=0, *,
                  epsilon=DEFAULT_EPSILON, qlearn: QLearnConfig = None,
                  trials=100) -> GridPipelineResult:
    """Demonstrations -> ratings -> spec weights -> rewards -> policy.

    One seed drives all three stochastic stages (demo synthesis, Q-learning,
    evaluation); each derives its own independent generators from it.
    """
    demos = synth_demos(env, n_good, n_bad, seed)
    specs = grid_specs(env)
    ratings = build_rating_matrix(demos, specs)
    dag = learn_performance_dag(ratings.values, epsilon=epsilon)
    weights = spec_weights(dag)
    rewards = infer_state_rewards(env, demos, ratings, weights)
    if qlearn is None:
        qlearn = QLearnConfig(seed=seed)
    q = double_q_learn(env, rewards, qlearn)
    policy = greedy_policy(q)
    success = evaluate_policy(env, policy, trials, seed)
    return GridPipelineResult(demos=tuple(demos), ratings=ratings, dag=dag,
                              weights=weights, rewards=rewards, q=q, policy=policy,
                              success_rate=success, t_goal=bfs_shortest_path_len(env))


def save_reward_csv(table: RewardTable, path, header=()) -> None:
    """Row-major reward heatmap; `# `-prefixed lines carry provenance."""
    lines = [f"# {h}" for h in header]
    for row in table.values:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def save_policy_csv(env: GridEnv, policy, path, header=()) -> None:
    """Per-cell best action as a height x width grid of action codes 0..3."""
    policy = np.asarray(policy)
    if policy.shape != (env.n_cells,):
        raise ValueError(f"policy must have one action per cell, got shape {policy.shape}")
    lines = [f"# {h}" for h in header]
    for row in policy.reshape(env.height, env.width):
        lines.append(",".join(str(int(a)) for a in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_policy_csv(path, env: GridEnv) -> np.ndarray:
    """Read a policy grid written by save_policy_csv (header lines skipped)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            rows.append([int(x) for x in line.split(",")])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer action code") from None
    arr = np.array(rows, dtype=int)
    if arr.shape != (env.height, env.width):
        raise ValueError(f"{path}: policy grid is {arr.shape}, expected {(env.height, env.width)}")
    if arr.size and (arr.min() < 0 or arr.max() > 3):
        raise ValueError(f"{path}: action codes must lie in 0..3")
    return arr.ravel()
