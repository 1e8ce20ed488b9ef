"""Independent value-iteration oracles for small random MDPs.

The product is built against a one-state automaton that accepts everything,
so product states coincide with model states and any goal set can be
imposed through the partition.
"""

import numpy as np

from ltlplan.dra import parse_dra
from ltlplan.model import make_mdp
from ltlplan.product import build_product, partition_states

ACCEPT_ALL = parse_dra('DRA v2 explicit\nStates: 1\nAcceptance-Pairs: 1\nStart: 0\nAP: 1 "b"\n---\nState: 0\nAcc-Sig: +0\n0\n0\n')


def random_case(rng, max_states=5, max_actions=2):
    """A random model (integer weights 1..5 keep self-loops below 0.85,
    so value iteration converges quickly) and a random goal set."""
    n = int(rng.integers(1, max_states + 1))
    names = [f"x{i}" for i in range(n)]
    acts = [f"a{j}" for j in range(max_actions)]
    trans, costs = [], {}
    for x in names:
        k = int(rng.integers(1, max_actions + 1))
        for u in rng.choice(acts, size=k, replace=False):
            support = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            w = rng.integers(1, 6, size=len(support)).astype(float)
            for y, p in zip(support, w / w.sum()):
                trans.append((x, str(u), names[int(y)], float(p)))
            costs[(x, str(u))] = float(rng.integers(1, 10))
    m = make_mdp(states=names, actions=acts, transitions=trans, costs=costs, ap=["b"],
                 labels={x: [((), 1.0)] for x in names}, initial=("x0", ()))
    p = build_product(m, ACCEPT_ALL, full=True)
    goal = {int(s) for s in np.flatnonzero(rng.random(p.num_states) < 0.35)}
    return p, partition_states(p, goal)


def _rows(p):
    out = []
    for r in range(p.num_rows):
        succ, prob = p.row_successors(r)
        out.append((int(p.row_state[r]), float(p.row_cost[r]), succ.tolist(), prob.tolist()))
    return out


def max_reach_vi(p, part, tol=1e-13, max_iter=200000):
    """Maximal probability of reaching S_c from each state."""
    v = np.zeros(p.num_states)
    v[list(part.s_goal)] = 1.0
    normal = sorted(part.s_normal)
    rows = _rows(p)
    for _ in range(max_iter):
        new = v.copy()
        for s in normal:
            new[s] = max(sum(pr * v[t] for t, pr in zip(succ, prob)) for st, _, succ, prob in rows if st == s)
        if np.abs(new - v).max() < tol:
            return new
        v = new
    return v


def ssp_vi(p, part, tol=1e-13, max_iter=200000):
    """Minimal expected prefix cost: V(s) = min_u c(s,u) P(s,u -> S_n u S_c)
    + sum over S_n successors of p V."""
    normal = set(part.s_normal)
    keep = normal | set(part.s_goal)
    v = np.zeros(p.num_states)
    rows = _rows(p)
    for _ in range(max_iter):
        new = v.copy()
        for s in normal:
            new[s] = min(
                c * sum(pr for t, pr in zip(succ, prob) if t in keep)
                + sum(pr * v[t] for t, pr in zip(succ, prob) if t in normal)
                for st, c, succ, prob in rows if st == s
            )
        if np.abs(new - v).max() < tol:
            return new
        v = new
    return v
