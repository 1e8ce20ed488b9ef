"""SCCs, maximal end components, accepting MECs and accepting SCCs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .product import ProductAutomaton

TAU0 = -1  # pseudo action of the trap state
TRAP = -1  # product id stand-in for the trap state


@njit
def _tarjan(indptr, indices, active):
    n = indptr.shape[0] - 1
    index = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    onstack = np.zeros(n, np.bool_)
    comp = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int64)
    call_node = np.empty(n, np.int64)
    call_edge = np.empty(n, np.int64)
    sp = 0
    counter = 0
    ncomp = 0
    for root in range(n):
        if not active[root] or index[root] >= 0:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = True
        call_node[0] = root
        call_edge[0] = indptr[root]
        csp = 1
        while csp > 0:
            v = call_node[csp - 1]
            e = call_edge[csp - 1]
            if e < indptr[v + 1]:
                call_edge[csp - 1] = e + 1
                w = indices[e]
                if not active[w]:
                    continue
                if index[w] < 0:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = True
                    call_node[csp] = w
                    call_edge[csp] = indptr[w]
                    csp += 1
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                csp -= 1
                if csp > 0:
                    u = call_node[csp - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == index[v]:
                    while True:
                        sp -= 1
                        w = stack[sp]
                        onstack[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return comp, ncomp


def tarjan_scc(indptr: np.ndarray, indices: np.ndarray, active: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """SCC id per node (``-1`` for inactive nodes) and the number of SCCs.

    Ids come out in reverse topological order of the condensation.
    """
    n = len(indptr) - 1
    if active is None:
        active = np.ones(n, dtype=np.bool_)
    comp, ncomp = _tarjan(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(active, dtype=np.bool_),
    )
    return comp, int(ncomp)


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst.astype(np.int64)


# --- sub-MDPs ---------------------------------------------------------------


@dataclass(eq=False)
class SubMdp:
    """Node-indexed sub-MDP; ``states[v]`` is the product id of node ``v``
    (``TRAP`` for the trap node). Rows carry an action id (``TAU0`` for the
    trap self-loop) and a CSR successor list over nodes."""

    states: np.ndarray
    row_node: np.ndarray
    row_action: np.ndarray
    succ_ptr: np.ndarray
    succ: np.ndarray
    prob: np.ndarray
    trap: int = -1

    @property
    def num_nodes(self) -> int:
        return len(self.states)

    @property
    def num_rows(self) -> int:
        return len(self.row_node)

    def edge_src(self) -> np.ndarray:
        return np.repeat(self.row_node, np.diff(self.succ_ptr))

    def closed(self, comp: "EndComponent") -> bool:
        nodes = set(comp.nodes)
        for r in range(self.num_rows):
            v = int(self.row_node[r])
            if v in nodes and int(self.row_action[r]) in comp.actions[v]:
                a, b = self.succ_ptr[r], self.succ_ptr[r + 1]
                if not set(self.succ[a:b].tolist()) <= nodes:
                    return False
        return True


def submdp_of_product(p: ProductAutomaton) -> SubMdp:
    return SubMdp(
        states=np.arange(p.num_states),
        row_node=p.row_state.copy(),
        row_action=p.row_action.copy(),
        succ_ptr=p.succ_ptr.copy(),
        succ=p.succ.copy(),
        prob=p.prob.copy(),
    )


def restrict_avoid(p: ProductAutomaton, pair: int) -> SubMdp:
    """Z^{not H}: drop H states, send their incoming mass to a trap node that
    loops on itself under the pseudo action."""
    if not 0 <= pair < p.num_pairs:
        raise IndexError(f"pair index {pair} out of range ({p.num_pairs} pairs)")
    keep = ~p.H[pair]
    kept = np.flatnonzero(keep)
    trap = len(kept)
    node_of = np.full(p.num_states, trap, dtype=np.int64)
    node_of[kept] = np.arange(len(kept))
    rows = np.flatnonzero(keep[p.row_state])
    counts = np.diff(p.succ_ptr)[rows]
    starts = p.succ_ptr[rows]
    # gather successor slices of the kept rows
    idx = np.concatenate([np.arange(a, a + c) for a, c in zip(starts, counts)]) if len(rows) else np.zeros(0, np.int64)
    succ_nodes = node_of[p.succ[idx]]
    probs = p.prob[idx]
    row_id = np.repeat(np.arange(len(rows)), counts)
    # merge duplicate (row, node) entries created by redirection to the trap
    key = row_id * (trap + 1) + succ_nodes
    uniq, inv = np.unique(key, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv, probs)
    new_row = uniq // (trap + 1)
    new_succ = uniq % (trap + 1)
    succ_ptr = np.zeros(len(rows) + 2, dtype=np.int64)
    np.add.at(succ_ptr, new_row + 1, 1)
    succ_ptr = np.cumsum(succ_ptr)
    succ_ptr[-1] = succ_ptr[-2] + 1
    return SubMdp(
        states=np.concatenate([kept, [TRAP]]).astype(np.int64),
        row_node=np.concatenate([node_of[p.row_state[rows]], [trap]]).astype(np.int64),
        row_action=np.concatenate([p.row_action[rows], [TAU0]]).astype(np.int64),
        succ_ptr=succ_ptr,
        succ=np.concatenate([new_succ, [trap]]).astype(np.int64),
        prob=np.concatenate([merged, [1.0]]),
        trap=trap,
    )


@dataclass(frozen=True)
class EndComponent:
    nodes: tuple[int, ...]
    actions: dict = field(hash=False)  # node -> tuple of action ids


def compute_mecs(z: SubMdp) -> list[EndComponent]:
    """Maximal end components by iterated SCC splitting.

    Each round removes the rows whose successors leave their SCC (or hit a
    node without rows) and recomputes SCCs, until nothing changes.
    """
    n = z.num_nodes
    alive = np.ones(z.num_rows, dtype=bool)
    edge_row = np.repeat(np.arange(z.num_rows), np.diff(z.succ_ptr))
    edge_src = z.row_node[edge_row]
    while True:
        node_alive = np.zeros(n, dtype=bool)
        node_alive[z.row_node[alive]] = True
        live_edges = alive[edge_row]
        indptr, indices = _csr(n, edge_src[live_edges], z.succ[live_edges])
        comp, _ = tarjan_scc(indptr, indices, node_alive)
        leaving = alive[edge_row] & ((comp[z.succ] != comp[edge_src]) | ~node_alive[z.succ])
        bad_rows = np.unique(edge_row[leaving])
        if len(bad_rows) == 0:
            break
        alive[bad_rows] = False
    groups: dict[int, list[int]] = {}
    for v in np.flatnonzero(node_alive):
        groups.setdefault(int(comp[v]), []).append(int(v))
    out = []
    for nodes in groups.values():
        acts: dict[int, list[int]] = {v: [] for v in nodes}
        for r in np.flatnonzero(alive & np.isin(z.row_node, nodes)):
            acts[int(z.row_node[r])].append(int(z.row_action[r]))
        out.append(EndComponent(tuple(sorted(nodes)), {v: tuple(sorted(a)) for v, a in sorted(acts.items())}))
    out.sort(key=lambda c: c.nodes[0])
    return out


# --- accepting components -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Component:
    """Accepting component of a product (an AMEC, or an ASCC in relaxed mode).

    ``actions`` maps each state to its allowed actions (all product actions
    for an ASCC). ``accepting`` is S'_c intersected with the pair's I set.
    """

    kind: str
    pair: int
    states: tuple[int, ...]
    accepting: tuple[int, ...]
    actions: dict

    def __len__(self) -> int:
        return len(self.states)


def compute_amecs(p: ProductAutomaton) -> list[Component]:
    out = []
    for i in range(p.num_pairs):
        z = restrict_avoid(p, i)
        for ec in compute_mecs(z):
            if z.trap in ec.nodes:
                continue
            states = tuple(int(z.states[v]) for v in ec.nodes)
            acc = tuple(s for s in states if p.I[i][s])
            if not acc:
                continue
            actions = {int(z.states[v]): a for v, a in ec.actions.items()}
            out.append(Component("amec", i, states, acc, actions))
    return out


def compute_asccs(p: ProductAutomaton) -> list[Component]:
    """SCCs of the graph restricted to states outside H that meet I.

    Single states count only with a self-loop.
    """
    indptr, indices = p.adjacency()
    out = []
    for i in range(p.num_pairs):
        active = ~p.H[i]
        comp, _ = tarjan_scc(indptr, indices, active)
        groups: dict[int, list[int]] = {}
        for s in np.flatnonzero(active):
            groups.setdefault(int(comp[s]), []).append(int(s))
        found = []
        for states in groups.values():
            if len(states) == 1:
                s = states[0]
                if s not in indices[indptr[s]:indptr[s + 1]]:
                    continue
            acc = tuple(s for s in states if p.I[i][s])
            if not acc:
                continue
            states = sorted(states)
            actions = {s: tuple(p.actions(s)) for s in states}
            found.append(Component("ascc", i, tuple(states), acc, actions))
        found.sort(key=lambda c: c.states[0])
        out.extend(found)
    return out
