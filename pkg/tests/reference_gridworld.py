"""Independent value-iteration oracle for the gridworld tests.

Builds the exact MDP (slip transition distribution included) from first
principles — its own action deltas and perpendicular map, no reuse of the
production step logic — and solves it by value iteration. Used to check that
double Q-learning's greedy policy matches the optimum on deterministic grids.
"""

import numpy as np

DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))
PERP = {0: (2, 3), 1: (2, 3), 2: (0, 1), 3: (0, 1)}


def _dest(env, cell, action):
    r = cell[0] + DELTAS[action][0]
    c = cell[1] + DELTAS[action][1]
    if 0 <= r < env.height and 0 <= c < env.width:
        return (r, c)
    return cell


def optimal_q(env, rewards, gamma, sweeps=10000, tol=1e-13):
    """Exact Q* for the infinite-horizon grid MDP with absorbing terminals."""
    n = env.height * env.width
    reward = np.asarray(rewards.values, dtype=float).ravel()
    terminal = np.zeros(n, dtype=bool)
    for cell in env.obstacles:
        terminal[cell[0] * env.width + cell[1]] = True
    terminal[env.goal[0] * env.width + env.goal[1]] = True

    # per (state, action): list of (probability, next state index)
    transitions = {}
    for idx in range(n):
        cell = (idx // env.width, idx % env.width)
        for a in range(4):
            outs = [(1.0 - env.slip_p, _dest(env, cell, a))]
            for p in PERP[a]:
                outs.append((env.slip_p / 2.0, _dest(env, cell, p)))
            transitions[(idx, a)] = [(prob, nxt[0] * env.width + nxt[1]) for prob, nxt in outs if prob > 0.0]

    v = np.zeros(n)
    q = np.zeros((n, 4))
    for _ in range(sweeps):
        for idx in range(n):
            for a in range(4):
                q[idx, a] = sum(prob * (reward[s2] + (0.0 if terminal[s2] else gamma * v[s2]))
                                for prob, s2 in transitions[(idx, a)])
        nv = q.max(axis=1)
        if np.max(np.abs(nv - v)) < tol:
            v = nv
            break
        v = nv
    return q


def greedy_rollout(env, policy, max_steps):
    """Deterministic (slip ignored) greedy walk; returns the visited cells."""
    assert env.slip_p == 0.0
    cells = [env.start]
    for _ in range(max_steps):
        cell = cells[-1]
        idx = cell[0] * env.width + cell[1]
        cells.append(_dest(env, cell, int(policy[idx])))
        if cells[-1] == env.goal or cells[-1] in env.obstacles:
            break
    return cells
