import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from conftest import EXAMPLE1_EDGES, gamble_model, product
from ltlplan.dra import load_fixture
from ltlplan.graph import (
    TAU0,
    SubMdp,
    compute_amecs,
    compute_asccs,
    compute_mecs,
    restrict_avoid,
    tarjan_scc,
)
from ltlplan.model import make_mdp
from ltlplan.product import build_product, graph_from_edges


def _blocks(labels):
    groups = {}
    for v, c in enumerate(labels):
        if c >= 0:
            groups.setdefault(int(c), set()).add(v)
    return sorted(map(frozenset, groups.values()), key=min)


@st.composite
def digraphs(draw):
    n = draw(st.integers(1, 12))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    return n, edges


@settings(max_examples=200, deadline=None)
@given(digraphs())
def test_tarjan_matches_scipy(g):
    n, edges = g
    indptr, indices = graph_from_edges(n, edges)
    comp, k = tarjan_scc(indptr, indices)
    a = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    k2, ref = connected_components(a, directed=True, connection="strong")
    assert k == k2
    assert _blocks(comp) == _blocks(ref)


def test_tarjan_reverse_topological_ids():
    # 0 -> 1 -> 2; sinks get the smallest ids
    comp, k = tarjan_scc(*graph_from_edges(3, [(0, 1), (1, 2)]))
    assert k == 3 and comp[2] < comp[1] < comp[0]


def test_tarjan_inactive_nodes():
    indptr, indices = graph_from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
    comp, k = tarjan_scc(indptr, indices, np.array([True, False, True]))
    assert comp[1] == -1 and k == 2


def test_example1_sccs():
    comp, _ = tarjan_scc(*graph_from_edges(11, EXAMPLE1_EDGES))
    blocks = _blocks(comp)
    assert {5, 6, 10} in blocks and {7, 8} in blocks and {1, 3} in blocks


# --- maximal end components -------------------------------------------------


def make_submdp(n, rows):
    """rows: list of (node, action, [(succ, prob), ...])."""
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    succ_ptr = np.cumsum([0] + [len(r[2]) for r in rows])
    return SubMdp(
        states=np.arange(n),
        row_node=np.array([r[0] for r in rows], dtype=np.int64),
        row_action=np.array([r[1] for r in rows], dtype=np.int64),
        succ_ptr=succ_ptr.astype(np.int64),
        succ=np.array([t for r in rows for t, _ in r[2]], dtype=np.int64),
        prob=np.array([p for r in rows for _, p in r[2]], dtype=float),
    )


def _strongly_connected(nodes, edges):
    nodes = set(nodes)
    start = next(iter(nodes))
    for direction in (0, 1):
        seen, todo = {start}, [start]
        while todo:
            v = todo.pop()
            for e in edges:
                a, b = (e if direction == 0 else e[::-1])
                if a == v and b in nodes and b not in seen:
                    seen.add(b)
                    todo.append(b)
        if seen != nodes:
            return False
    return True


def brute_force_mecs(n, rows):
    """Maximal node sets T whose closed actions keep every node alive and
    make T strongly connected; returns {frozenset(T): {node: actions}}."""
    ecs = {}
    for size in range(1, n + 1):
        for T in itertools.combinations(range(n), size):
            T = set(T)
            acts = {v: sorted(u for (w, u, s) in rows if w == v and {t for t, _ in s} <= T) for v in T}
            if any(not a for a in acts.values()):
                continue
            edges = [(w, t) for (w, u, s) in rows if w in T and u in acts[w] for t, _ in s]
            if _strongly_connected(T, edges):
                ecs[frozenset(T)] = {v: tuple(a) for v, a in acts.items()}
    maximal = {T: a for T, a in ecs.items() if not any(T < U for U in ecs)}
    return maximal


@st.composite
def small_mdps(draw):
    n = draw(st.integers(1, 6))
    rows = []
    for v in range(n):
        for u in range(draw(st.integers(0, 2))):
            succ = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=3))
            rows.append((v, u, [(t, 1.0 / len(succ)) for t in sorted(succ)]))
    return n, rows


@settings(max_examples=250, deadline=None)
@given(small_mdps())
def test_mecs_match_brute_force(g):
    n, rows = g
    got = {frozenset(ec.nodes): ec.actions for ec in compute_mecs(make_submdp(n, rows))}
    assert got == brute_force_mecs(n, rows)


@settings(max_examples=80, deadline=None)
@given(small_mdps(), st.randoms())
def test_mecs_invariant_under_relabelling(g, rnd):
    n, rows = g
    perm = list(range(n))
    rnd.shuffle(perm)
    moved = [(perm[v], u, [(perm[t], p) for t, p in s]) for v, u, s in rows]
    a = {frozenset(perm[v] for v in ec.nodes) for ec in compute_mecs(make_submdp(n, rows))}
    b = {frozenset(ec.nodes) for ec in compute_mecs(make_submdp(n, moved))}
    assert a == b


@settings(max_examples=80, deadline=None)
@given(small_mdps())
def test_mecs_closed_and_disjoint(g):
    n, rows = g
    z = make_submdp(n, rows)
    mecs = compute_mecs(z)
    seen = set()
    for ec in mecs:
        assert z.closed(ec)
        assert not seen & set(ec.nodes)
        seen |= set(ec.nodes)


def test_mec_drops_leaking_action():
    # node 0 has a safe self-loop (a=0) and a leaky action (a=1) to node 1 (dead end)
    rows = [(0, 0, [(0, 1.0)]), (0, 1, [(0, 0.5), (1, 0.5)])]
    (ec,) = compute_mecs(make_submdp(2, rows))
    assert ec.nodes == (0,) and ec.actions == {0: (0,)}


# --- restriction and accepting components -------------------------------------


def test_restrict_avoid_toy(toy_product):
    p = toy_product
    z = restrict_avoid(p, 0)
    assert z.num_nodes == 4 + 1  # four non-H states plus the trap
    assert z.states[-1] == -1 and z.trap == 4
    assert z.row_action[-1] == TAU0
    # every row is still a distribution; mass into H lands on the trap
    for r in range(z.num_rows):
        a, b = z.succ_ptr[r], z.succ_ptr[r + 1]
        assert z.prob[a:b].sum() == pytest.approx(1.0)
        assert len(set(z.succ[a:b].tolist())) == b - a
    s = p.lookup(0, ["obs"], 1)
    v = int(np.flatnonzero(z.states == s)[0])
    r = int(np.flatnonzero(z.row_node == v)[0])
    assert z.succ[z.succ_ptr[r]:z.succ_ptr[r + 1]].tolist() == [z.trap]
    with pytest.raises(IndexError):
        restrict_avoid(p, 1)


def test_toy_has_no_amec_but_an_ascc(toy_product):
    assert compute_amecs(toy_product) == []
    (c,) = compute_asccs(toy_product)
    assert c.kind == "ascc"
    assert {toy_product.name(s) for s in c.states} == {"S2|b|0", "S1||1"}
    assert {toy_product.name(s) for s in c.accepting} == {"S1||1"}


@pytest.mark.parametrize("preset,task,count", [("surveillance", "surveillance", 1), ("delivery", "delivery", 1), ("ordered", "ordered", 1)])
def test_grid_amecs(preset, task, count):
    p = product(preset, task)
    amecs = compute_amecs(p)
    assert len(amecs) == count
    for c in amecs:
        assert c.accepting and set(c.accepting) <= set(c.states)
        assert not any(p.H[c.pair][s] for s in c.states)
        # closed under the kept actions
        for s, acts in c.actions.items():
            assert acts
            for u in acts:
                succ, _ = p.row_successors(p.row_of(s, u))
                assert set(succ.tolist()) <= set(c.states)


def test_amecs_inside_asccs():
    p = product("surveillance", "surveillance")
    asccs = compute_asccs(p)
    for a in compute_amecs(p):
        assert any(set(a.states) <= set(c.states) and c.pair == a.pair for c in asccs)


def test_clustered_has_ascc_only():
    p = product("clustered", "surveillance")
    assert compute_amecs(p) == []
    assert compute_asccs(p)


def test_dag_has_no_ascc():
    m = make_mdp(
        states=["a", "b"], actions=["u"], transitions=[("a", "u", "b", 1.0), ("b", "u", "b", 1.0)],
        costs={("a", "u"): 1.0, ("b", "u"): 1.0}, ap=["b", "obs"],
        labels={"a": [(("b",), 1.0)], "b": [(("obs",), 1.0)]}, initial=("a", ("b",)),
    )
    p = build_product(m, load_fixture("toy"))
    assert compute_asccs(p) == [] and compute_amecs(p) == []
    assert compute_amecs(build_product(gamble_model(), load_fixture("toy")))
