"""Write the shipped Rabin automata to src/ltlplan/data/.

No LTL translator is bundled, so each automaton is written down directly as a
transition function over proposition sets. Every automaton lists all five
workspace propositions (or the two of the toy tasks) so a model never uses a
proposition the automaton does not know.

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import itertools
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ltlplan.dra import Dra, dump_dra  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "ltlplan" / "data"
WS_AP = ("Obs", "b1", "b2", "b3", "Spl")


def build(ap, states, start, step, pairs, comment):
    """Enumerate reachable automaton states from ``start`` with ``step``."""
    index = {}
    order = []

    def sid(s):
        if s not in index:
            index[s] = len(order)
            order.append(s)
        return index[s]

    for s in states:
        sid(s)
    sid(start)
    letters = [frozenset(a for j, a in enumerate(ap) if k >> j & 1) for k in range(1 << len(ap))]
    rows = {}
    i = 0
    while i < len(order):
        s = order[i]
        rows[s] = [sid(step(s, sigma)) for sigma in letters]
        i += 1
    delta = np.array([rows[s] for s in order], dtype=np.int64)
    acc = tuple((frozenset(index[s] for s in order if h(s)), frozenset(index[s] for s in order if inf(s))) for h, inf in pairs)
    return Dra(ap=tuple(ap), start=index[start], delta=delta, pairs=acc), comment + " | states: " + ", ".join(map(str, order))


def toy():
    # (G F b) & (G !obs); q = 1 iff the last letter had b
    def step(q, s):
        if q == "sink" or "obs" in s:
            return "sink"
        return 1 if "b" in s else 0

    return build(("b", "obs"), [0, 1, "sink"], 0, step, [(lambda q: q == "sink", lambda q: q == 1)], "G F b & G !obs")


def reach_stay():
    # (F G b) & (G !obs)
    def step(q, s):
        if q == "sink" or "obs" in s:
            return "sink"
        return 1 if "b" in s else 0

    return build(("b", "obs"), [0, 1, "sink"], 0, step, [(lambda q: q in (0, "sink"), lambda q: q == 1)], "F G b & G !obs")


def ordered():
    # F(b1 & F(b2 & F b3)) & G !Obs & F G b3
    # stage k counts the bases seen in order; at stage 3 the flag records b3
    def advance(k, s):
        for j, b in enumerate(("b1", "b2", "b3")):
            if k == j and b in s:
                k += 1
        return k

    def step(q, s):
        if q == "sink" or "Obs" in s:
            return "sink"
        k = 0 if q == "init" else q[0]
        k = advance(k, s) if k < 3 else 3
        if k == 3:
            return (3, "b3" in s)
        return (k, False)

    states = ["init", (0, False), (1, False), (2, False), (3, False), (3, True), "sink"]
    return build(
        WS_AP,
        states,
        "init",
        step,
        [(lambda q: q == "sink" or q == (3, False), lambda q: q == (3, True))],
        "F(b1 & F(b2 & F b3)) & G !Obs & F G b3",
    )


def _round(k, s):
    # waiting for b_{k+1}; returns the new index, 3 meaning the round closed
    for j, b in enumerate(("b1", "b2", "b3")):
        if k == j and b in s:
            k += 1
    return k


def surveillance():
    # G F b1 & G F b2 & G F b3 & G !Obs
    def step(q, s):
        if q == "sink" or "Obs" in s:
            return "sink"
        k = 0 if q in ("init", "done") else q
        k = _round(k, s)
        return "done" if k == 3 else k

    return build(
        WS_AP,
        ["init", 0, 1, 2, "done", "sink"],
        "init",
        step,
        [(lambda q: q == "sink", lambda q: q == "done")],
        "G F b1 & G F b2 & G F b3 & G !Obs",
    )


def delivery():
    # G F b1 & G F b2 & G F b3 & G(one -> X(!one U Spl)) & G !Obs, one = b1 | b2 | b3
    # state (k, pending, done): k as in surveillance, pending = a base was
    # seen and no supply since, done = this letter closed a round
    def step(q, s):
        if q == "sink" or "Obs" in s:
            return "sink"
        if q == "init":
            k, pend = 0, False
        else:
            k, pend, done = q
            if done:
                k = 0
        one = bool(s & {"b1", "b2", "b3"})
        if pend and "Spl" not in s:
            if one:
                return "sink"
        else:
            pend = False
        if one:
            pend = True
        k = _round(k, s)
        if k == 3:
            return (0, pend, True)
        return (k, pend, False)

    states = ["init"] + [(k, p, False) for k in range(3) for p in (False, True)] + [(0, p, True) for p in (False, True)] + ["sink"]
    return build(
        WS_AP,
        states,
        "init",
        step,
        [(lambda q: q == "sink", lambda q: isinstance(q, tuple) and q[2])],
        "G F b1 & G F b2 & G F b3 & G((b1|b2|b3) -> X(!(b1|b2|b3) U Spl)) & G !Obs",
    )


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, fn in (("toy", toy), ("reach_stay", reach_stay), ("ordered", ordered), ("surveillance", surveillance), ("delivery", delivery)):
        dra, comment = fn()
        (OUT / f"{name}.dra").write_text(dump_dra(dra, comment))
        print(f"{name}: {dra.num_states} states, {dra.num_edges()} edges, pairs {[(sorted(h), sorted(i)) for h, i in dra.pairs]}")


if __name__ == "__main__":
    main()
