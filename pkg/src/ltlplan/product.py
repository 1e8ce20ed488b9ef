"""Product of a labelled MDP with a Rabin automaton, and its state partition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dra import Dra
from .model import Mdp, ModelError, label_key


@dataclass(eq=False)
class ProductAutomaton:
    """Array-backed product.

    State ``s`` is the triple ``keys[s] = (x, k, q)`` where ``k`` indexes
    ``model.labels[x]``. State-action rows ``r`` are grouped by state:
    rows of ``s`` are ``row_ptr[s]:row_ptr[s+1]``; row ``r`` has action
    ``row_action[r]``, cost ``row_cost[r]`` and successors
    ``succ[succ_ptr[r]:succ_ptr[r+1]]`` with probabilities ``prob[...]``.
    """

    model: Mdp
    dra: Dra
    keys: list[tuple[int, int, int]]
    initial: int
    row_ptr: np.ndarray
    row_action: np.ndarray
    row_cost: np.ndarray
    succ_ptr: np.ndarray
    succ: np.ndarray
    prob: np.ndarray
    letter: np.ndarray  # DRA letter of each state's label
    H: list[np.ndarray]  # boolean masks per pair
    I: list[np.ndarray]
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {k: i for i, k in enumerate(self.keys)}
        self.row_state = np.repeat(np.arange(self.num_states), np.diff(self.row_ptr))
        self._adj = None

    @property
    def num_states(self) -> int:
        return len(self.keys)

    @property
    def num_rows(self) -> int:
        return len(self.row_action)

    @property
    def num_pairs(self) -> int:
        return len(self.H)

    def rows(self, s: int) -> range:
        return range(self.row_ptr[s], self.row_ptr[s + 1])

    def row_successors(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.succ_ptr[r], self.succ_ptr[r + 1]
        return self.succ[a:b], self.prob[a:b]

    def actions(self, s: int) -> list[int]:
        return [int(self.row_action[r]) for r in self.rows(s)]

    def row_of(self, s: int, u: int) -> int:
        for r in self.rows(s):
            if self.row_action[r] == u:
                return r
        raise KeyError(f"action {u} not allowed in product state {s}")

    def label(self, s: int) -> frozenset:
        x, k, _ = self.keys[s]
        return self.model.labels[x][k][0]

    def name(self, s: int) -> str:
        x, k, q = self.keys[s]
        return f"{self.model.states[x]}|{label_key(self.model.labels[x][k][0])}|{q}"

    def lookup(self, x: int, label: Iterable[str], q: int) -> int:
        """Product id of (x, label, q), or -1 when absent."""
        lab = frozenset(label)
        for k, (l2, _) in enumerate(self.model.labels[x]):
            if l2 == lab:
                return self.index.get((x, k, q), -1)
        return -1

    def adjacency(self):
        """CSR (indptr, indices) of the distinct-successor graph."""
        if self._adj is None:
            src = np.repeat(self.row_state, np.diff(self.succ_ptr))
            n = self.num_states
            code = np.unique(src.astype(np.int64) * n + self.succ)
            a, b = code // n, code % n
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.add.at(indptr, a + 1, 1)
            self._adj = (np.cumsum(indptr), b.astype(np.int64))
        return self._adj

    def num_transitions(self) -> int:
        """Distinct (s, s') pairs with positive probability under some action."""
        return len(self.adjacency()[1])

    def num_sa_transitions(self) -> int:
        """Number of (s, u, s') triples with positive probability."""
        return len(self.succ)


def _letters(m: Mdp, d: Dra) -> list[list[int]]:
    missing = sorted(set(m.ap) - set(d.ap))
    if missing:
        raise ModelError(f"propositions {missing} of the model are unknown to the automaton (AP: {list(d.ap)})")
    return [[d.letter(lab) for lab, _ in row] for row in m.labels]


def build_product(m: Mdp, d: Dra, full: bool = False) -> ProductAutomaton:
    """Product states <x, l, q> with p_L(x, l) > 0.

    The automaton reads the label of the current state: from <x, l, q> under u
    the successor is <x', l', delta(q, l)> with probability p_D(x, u, x') p_L(x', l').
    With ``full`` every label-positive triple is kept, otherwise only the
    forward closure of the initial state.
    """
    letters = _letters(m, d)
    x0, l0 = m.initial
    k0 = next((k for k, (lab, p) in enumerate(m.labels[x0]) if lab == l0 and p > 0), None)
    if k0 is None:
        raise ModelError("initial label has zero probability")
    s0 = (x0, k0, d.start)
    keys: list[tuple[int, int, int]] = []
    index: dict[tuple[int, int, int], int] = {}

    def add(key):
        if key not in index:
            index[key] = len(keys)
            keys.append(key)
        return index[key]

    add(s0)
    if full:
        for x in range(m.num_states):
            for k in range(len(m.labels[x])):
                for q in range(d.num_states):
                    add((x, k, q))
    row_action, row_cost, succ_ptr, succ, prob = [], [], [0], [], []
    row_count = []
    # rows are emitted in state-id order, so we expand states in insertion order
    i = 0
    while i < len(keys):
        x, k, q = keys[i]
        qn = int(d.delta[q, letters[x][k]])
        acts = m.allowed(x)
        row_count.append(len(acts))
        for u in acts:
            row_action.append(u)
            row_cost.append(m.cost[(x, u)])
            for y, py in m.trans[(x, u)]:
                if py <= 0:
                    continue
                for k2, (_, pl) in enumerate(m.labels[y]):
                    succ.append(add((y, k2, qn)))
                    prob.append(py * pl)
            succ_ptr.append(len(succ))
        i += 1
    row_ptr = np.concatenate([[0], np.cumsum(row_count)]).astype(np.int64)
    qs = np.array([q for _, _, q in keys], dtype=np.int64)
    H = [np.isin(qs, sorted(h)) for h, _ in d.pairs]
    I = [np.isin(qs, sorted(inf)) for _, inf in d.pairs]
    letter = np.array([letters[x][k] for x, k, _ in keys], dtype=np.int64)
    return ProductAutomaton(
        model=m,
        dra=d,
        keys=keys,
        initial=0,
        row_ptr=row_ptr,
        row_action=np.array(row_action, dtype=np.int64),
        row_cost=np.array(row_cost, dtype=np.float64),
        succ_ptr=np.array(succ_ptr, dtype=np.int64),
        succ=np.array(succ, dtype=np.int64).reshape(-1),
        prob=np.array(prob, dtype=np.float64).reshape(-1),
        letter=letter,
        H=H,
        I=I,
        index=index,
    )


# --- partition --------------------------------------------------------------


@dataclass(frozen=True)
class StatePartition:
    s_reach: frozenset
    s_unreach: frozenset
    s_goal: frozenset
    s_bad: frozenset
    s_normal: frozenset

    def kind(self, s: int) -> str:
        for name, part in (("goal", self.s_goal), ("normal", self.s_normal), ("bad", self.s_bad)):
            if s in part:
                return name
        return "unreachable"


def _bfs(indptr: np.ndarray, indices: np.ndarray, sources: Iterable[int], n: int) -> np.ndarray:
    seen = np.zeros(n, dtype=bool)
    stack = [int(s) for s in sources]
    seen[stack] = True
    while stack:
        s = stack.pop()
        for t in indices[indptr[s]:indptr[s + 1]]:
            if not seen[t]:
                seen[t] = True
                stack.append(int(t))
    return seen


def reverse_csr(indptr: np.ndarray, indices: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    src = np.repeat(np.arange(n), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    rptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(rptr, indices + 1, 1)
    return np.cumsum(rptr), src[order]


def partition_graph(indptr: np.ndarray, indices: np.ndarray, initial: int, goal: Iterable[int]) -> StatePartition:
    """Reachability partition of a graph given in CSR form."""
    n = len(indptr) - 1
    goal = sorted(set(int(g) for g in goal))
    if any(not 0 <= g < n for g in goal):
        raise ValueError("goal contains unknown state ids")
    reach = _bfs(indptr, indices, [initial], n)
    rptr, ridx = reverse_csr(indptr, indices, n)
    coreach = _bfs(rptr, ridx, goal, n) if goal else np.zeros(n, dtype=bool)
    goal_mask = np.zeros(n, dtype=bool)
    goal_mask[goal] = True
    goal_mask &= reach
    bad = reach & ~coreach
    normal = reach & coreach & ~goal_mask

    def fs(mask):
        return frozenset(int(i) for i in np.flatnonzero(mask))

    return StatePartition(
        s_reach=fs(reach),
        s_unreach=fs(~reach),
        s_goal=fs(goal_mask),
        s_bad=fs(bad),
        s_normal=fs(normal),
    )


def partition_states(p: ProductAutomaton, goal: Iterable[int]) -> StatePartition:
    """S_o unreachable from s0; S_c = goal; S_d reachable but unable to reach
    the goal (found on the reversed graph); S_n the remaining reachable states.

    Goal states that are unreachable from s0 are counted in S_o, so the four
    sets always partition the state space.
    """
    indptr, indices = p.adjacency()
    return partition_graph(indptr, indices, p.initial, goal)


def graph_from_edges(n: int, edges: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """CSR from an edge list (used for hand-written graphs)."""
    edges = sorted(set(edges))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for a, _ in edges:
        indptr[a + 1] += 1
    return np.cumsum(indptr), np.array([b for _, b in edges], dtype=np.int64)
