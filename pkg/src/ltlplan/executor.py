"""Online execution of a complete policy against observed states and labels.

The executor keeps finite memory: the current product state, a mode flag and
(for the Round-Robin baseline) one cursor per product state. The automaton
state advances by the previous label, except after a bad state, where it is
reset to the most promising successor.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from ._accel import njit
from .dra import guard_letters, label_distance
from .model import ModelError, label_key
from .rng import ACTION, seed_key, uniform
from .synthesis import CompletePolicy

log = logging.getLogger(__name__)

NORMAL, GOAL, BAD, UNREACHABLE = 0, 1, 2, 3
KIND_NAMES = ("normal", "goal", "bad", "unreachable")

PREFIX, SUFFIX, RECOVERY = "prefix", "suffix", "bad"


class DesyncError(RuntimeError):
    """Observation that the model or product cannot account for."""


@dataclass(eq=False)
class ExecTables:
    """Flat arrays shared by the executor and both simulation kernels.

    Cumulative tables are padded with 1.0 after the last positive entry, so
    sampling is "first index whose cumulative value exceeds u" everywhere.
    """

    # model
    mrow: np.ndarray  # [X, U] row id or -1
    mcost: np.ndarray  # [rows]
    mdst: np.ndarray  # [rows, W]
    mcum: np.ndarray  # [rows, W]
    ldst: np.ndarray  # [X, K] label index k (padding repeats the last one)
    lcum: np.ndarray  # [X, K]
    lletter: np.ndarray  # [X, K] automaton letter of label k
    lap: np.ndarray  # [X, K, n_ap] proposition membership
    # automaton / product
    delta: np.ndarray  # [Q, 2^m]
    reset_order: np.ndarray  # [Q, 2^m, Q] successors by (distance, id), -1 padded
    pidx: np.ndarray  # [X, K, Q] product id or -1
    kind: np.ndarray  # [S]
    comp: np.ndarray  # [S] component index or -1
    accepting: np.ndarray  # [S] bool, accepting within its component
    comp_pair: np.ndarray  # [C]
    H: np.ndarray  # [pairs, S] bool
    # policy
    pcum: np.ndarray  # [S, U]
    rr_ptr: np.ndarray  # [S + 1]
    rr_act: np.ndarray
    use_rr: bool
    relaxed: bool
    x0: int
    k0: int
    q0: int

    @property
    def num_states(self) -> int:
        return len(self.kind)


def _cum(rows: list[list[float]], width: int) -> np.ndarray:
    out = np.ones((len(rows), width))
    for i, ps in enumerate(rows):
        c = np.cumsum(ps)
        last = max((j for j, p in enumerate(ps) if p > 0), default=len(ps) - 1)
        out[i, :last] = c[:last]
        out[i, last:] = 1.0
    return out


def build_tables(policy: CompletePolicy, baseline: str | None = None) -> ExecTables:
    """Precompute executor tables; ``baseline="round-robin"`` swaps the
    suffix policies for the Round-Robin rotation."""
    if baseline not in (None, "round-robin"):
        raise ValueError(f"unknown baseline {baseline!r}")
    p = policy.product
    m = p.model
    d = p.dra
    nx, nu = m.num_states, len(m.actions)
    mrow = np.full((nx, nu), -1, dtype=np.int64)
    dsts, probs, costs = [], [], []
    for x in range(nx):
        for u in m.allowed(x):
            mrow[x, u] = len(dsts)
            succ = m.trans[(x, u)]
            dsts.append([y for y, _ in succ])
            probs.append([pr for _, pr in succ])
            costs.append(m.cost[(x, u)])
    w = max(len(r) for r in dsts)
    mdst = np.array([r + [r[-1]] * (w - len(r)) for r in dsts], dtype=np.int64)
    mcum = _cum(probs, w)
    kmax = max(len(lab) for lab in m.labels)
    ldst = np.zeros((nx, kmax), dtype=np.int64)
    lprobs = []
    lletter = np.zeros((nx, kmax), dtype=np.int64)
    lap = np.zeros((nx, kmax, len(m.ap)), dtype=np.bool_)
    for x in range(nx):
        row = m.labels[x]
        lprobs.append([pr for _, pr in row] + [0.0] * (kmax - len(row)))
        for k in range(kmax):
            kk = min(k, len(row) - 1)
            ldst[x, k] = kk
            lletter[x, k] = d.letter(row[kk][0])
            for a, name in enumerate(m.ap):
                lap[x, k, a] = name in row[kk][0]
    lcum = _cum(lprobs, kmax)

    nq, nl = d.delta.shape
    reset_order = np.full((nq, nl, nq), -1, dtype=np.int64)
    for q in range(nq):
        post = d.post(q)
        guards = {q2: guard_letters(d, q, q2) for q2 in post}
        for letter in range(nl):
            ranked = sorted(post, key=lambda q2: (label_distance(letter, guards[q2]), q2))
            reset_order[q, letter, : len(ranked)] = ranked
    pidx = np.full((nx, kmax, nq), -1, dtype=np.int64)
    for s, (x, k, q) in enumerate(p.keys):
        pidx[x, k, q] = s

    part = policy.partition
    kind = np.full(p.num_states, UNREACHABLE, dtype=np.int64)
    kind[list(part.s_normal)] = NORMAL
    kind[list(part.s_goal)] = GOAL
    kind[list(part.s_bad)] = BAD
    comp = policy.component_of()
    accepting = np.zeros(p.num_states, dtype=np.bool_)
    for ci, c in enumerate(policy.components):
        for s in c.accepting:
            if comp[s] == ci:
                accepting[s] = True
    comp_pair = np.array([c.pair for c in policy.components], dtype=np.int64)
    H = np.array(p.H, dtype=np.bool_).reshape(p.num_pairs, p.num_states)

    pm = policy.matrix()
    pcum = _cum([list(r) for r in pm], nu)
    rr_ptr = np.zeros(p.num_states + 1, dtype=np.int64)
    rr_lists = []
    for s in range(p.num_states):
        ci = comp[s]
        acts = sorted(policy.components[ci].actions[s]) if ci >= 0 else []
        rr_lists.append(acts)
        rr_ptr[s + 1] = rr_ptr[s] + len(acts)
    rr_act = np.array([u for a in rr_lists for u in a], dtype=np.int64)

    x0, k0, q0 = p.keys[p.initial]
    return ExecTables(
        mrow=mrow, mcost=np.array(costs, dtype=np.float64), mdst=mdst, mcum=mcum,
        ldst=ldst, lcum=lcum, lletter=lletter, lap=lap,
        delta=d.delta.astype(np.int64), reset_order=reset_order, pidx=pidx,
        kind=kind, comp=comp, accepting=accepting, comp_pair=comp_pair, H=H,
        pcum=pcum, rr_ptr=rr_ptr, rr_act=rr_act,
        use_rr=baseline == "round-robin", relaxed=policy.mode == "relaxed",
        x0=int(x0), k0=int(k0), q0=int(q0),
    )


@njit
def next_product_state(q_prev, letter_prev, prev_bad, x, k, pidx, kind, delta, reset_order):
    """Product id of the new observation, or -1 if it cannot be tracked.

    After a bad state the automaton state is reset: among the successors of
    q_prev (ordered by label distance, then id) the first whose product state
    exists and is good wins; failing that, the first that exists; failing
    that, the ordinary transition.
    """
    if prev_bad:
        first = -1
        for j in range(reset_order.shape[2]):
            q2 = reset_order[q_prev, letter_prev, j]
            if q2 < 0:
                break
            s = pidx[x, k, q2]
            if s < 0:
                continue
            if kind[s] == 0 or kind[s] == 1:
                return s
            if first < 0:
                first = s
        if first >= 0:
            return first
    return pidx[x, k, delta[q_prev, letter_prev]]


@njit
def sample_index(cum, u):
    j = 0
    while j < cum.shape[0] - 1 and cum[j] <= u:
        j += 1
    return j


class Executor:
    """Step-wise policy execution with trace logging.

    ``step(x, label)`` feeds the observation at time t and returns u_t.
    Actions are drawn from the counter-based stream ``(seed, run, t)`` so a
    replay of the same observations reproduces the same actions.
    """

    def __init__(self, policy: CompletePolicy, seed: int = 0, run: int = 0, baseline: str | None = None,
                 tables: ExecTables | None = None, log_to: TextIO | None = None):
        self.policy = policy
        self.product = policy.product
        self.tables = tables if tables is not None else build_tables(policy, baseline)
        self.key = seed_key(seed)
        self.run = np.array([run], dtype=np.uint64)
        self.log_to = log_to
        self.reset()

    def reset(self) -> None:
        self.t = 0
        self.state = -1
        self.mode = PREFIX
        self.component = -1
        self.cursors: dict[int, int] = {}
        self._prev: tuple[int, int] | None = None  # (q, letter)
        self._last_u = -1

    @property
    def q(self) -> int:
        return self.product.keys[self.state][2] if self.state >= 0 else -1

    def _label_index(self, x: int, label: Iterable[str]) -> int:
        lab = frozenset(label)
        m = self.product.model
        if not 0 <= x < m.num_states:
            raise DesyncError(f"t={self.t}: unknown state {x}")
        for k, (l2, pr) in enumerate(m.labels[x]):
            if l2 == lab and pr > 0:
                return k
        raise DesyncError(f"t={self.t}: label {label_key(lab)} has zero probability at {m.states[x]}")

    def observe(self, x: int, label: Iterable[str]) -> int:
        """Advance the tracked product state without choosing an action."""
        tb = self.tables
        k = self._label_index(x, label)
        if self._prev is None:
            if (x, k) != (tb.x0, tb.k0):
                raise DesyncError("t=0: observation differs from the initial state/label")
            s = int(tb.pidx[x, k, tb.q0])
        else:
            q_prev, letter_prev = self._prev
            prev_bad = tb.kind[self.state] == BAD
            s = int(next_product_state(q_prev, letter_prev, prev_bad, x, k, tb.pidx, tb.kind, tb.delta, tb.reset_order))
        if s < 0:
            raise DesyncError(f"t={self.t}: no product state for ({self.product.model.states[x]}, {label_key(label)})")
        if self.state >= 0 and self._last_u >= 0:
            x_prev = self.product.keys[self.state][0]
            if x not in self.product.model.post(x_prev, self._last_u):
                raise DesyncError(f"t={self.t}: state {self.product.model.states[x]} is not a successor under the last action")
        self.state = s
        self._prev = (self.product.keys[s][2], int(tb.lletter[x, k]))
        ci = int(tb.comp[s])
        if tb.kind[s] == BAD:
            self.mode, self.component = RECOVERY, -1
        elif ci >= 0:
            self.mode, self.component = SUFFIX, ci
        else:
            self.mode, self.component = PREFIX, -1
        return s

    def round_robin_step(self, s: int) -> int:
        """Next action of the rotation at s (ascending action id)."""
        tb = self.tables
        a, b = tb.rr_ptr[s], tb.rr_ptr[s + 1]
        if a == b:
            raise ModelError(f"state {self.product.name(s)} is not inside an accepting component")
        c = self.cursors.get(s, 0)
        self.cursors[s] = c + 1
        return int(tb.rr_act[a + c % (b - a)])

    def choose(self) -> int:
        tb = self.tables
        s = self.state
        if tb.use_rr and tb.comp[s] >= 0 and tb.kind[s] != BAD:
            return self.round_robin_step(s)
        u = uniform(self.key, self.run, np.uint64(self.t), np.uint64(ACTION))
        return int(sample_index(tb.pcum[s], float(np.asarray(u)[0])))

    def step(self, x: int, label: Iterable[str]) -> int:
        s = self.observe(x, label)
        u = self.choose()
        self._last_u = u
        if self.log_to is not None:
            self.log_to.write(json.dumps(self.record(x, label, u), sort_keys=True) + "\n")
        self.t += 1
        return u

    def record(self, x: int, label: Iterable[str], u: int) -> dict:
        m = self.product.model
        return {
            "t": self.t,
            "x": m.states[x],
            "l": sorted(label),
            "q": self.q,
            "u": m.actions[u],
            "mode": self.mode if self.mode != SUFFIX else f"suffix:{self.component}",
        }
