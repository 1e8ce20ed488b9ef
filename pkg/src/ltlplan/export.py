"""Text exports of a product: Graphviz DOT and the PRISM modelling language."""

from __future__ import annotations

from typing import Sequence

from .graph import Component
from .product import ProductAutomaton, StatePartition

_COLORS = {"goal": "palegreen", "normal": "white", "bad": "lightcoral", "unreachable": "lightgrey"}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(p: ProductAutomaton, partition: StatePartition | None = None,
           components: Sequence[Component] = (), max_states: int | None = None) -> str:
    """Product graph; states are coloured by partition class and annotated
    with Rabin-pair membership (``H<i>``/``I<i>``) and component ids."""
    comp_of: dict[int, list[int]] = {}
    for ci, c in enumerate(components):
        for s in c.states:
            comp_of.setdefault(s, []).append(ci)
    n = p.num_states if max_states is None else min(max_states, p.num_states)
    lines = ["digraph product {", "  rankdir=LR;", "  node [shape=ellipse, style=filled];"]
    for s in range(n):
        tags = [f"H{i}" for i in range(p.num_pairs) if p.H[i][s]]
        tags += [f"I{i}" for i in range(p.num_pairs) if p.I[i][s]]
        tags += [f"C{ci}" for ci in comp_of.get(s, [])]
        kind = partition.kind(s) if partition is not None else "normal"
        label = p.name(s) + (("\\n" + " ".join(tags)) if tags else "")
        shape = ", shape=doublecircle" if s == p.initial else ""
        lines.append(f"  s{s} [label={_quote(label)}, fillcolor={_COLORS[kind]}{shape}];")
    acts = p.model.actions
    for s in range(n):
        for r in p.rows(s):
            succ, prob = p.row_successors(r)
            merged: dict[int, float] = {}
            for t, pr in zip(succ.tolist(), prob.tolist()):
                merged[t] = merged.get(t, 0.0) + pr
            for t, pr in sorted(merged.items()):
                if t < n:
                    lines.append(f"  s{s} -> s{t} [label={_quote(f'{acts[p.row_action[r]]}:{pr:.3g}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_prism(p: ProductAutomaton, partition: StatePartition | None = None,
             components: Sequence[Component] = ()) -> str:
    """PRISM MDP with one integer state variable, a ``cost`` reward
    structure and labels for partition classes, Rabin sets and components."""
    acts = p.model.actions
    safe = {a: "a_" + "".join(ch if ch.isalnum() else "_" for ch in a) for a in acts}
    out = [
        "// product automaton export",
        "mdp",
        "",
        "module product",
        f"  s : [0..{max(p.num_states - 1, 0)}] init {p.initial};",
    ]
    for s in range(p.num_states):
        for r in p.rows(s):
            succ, prob = p.row_successors(r)
            merged: dict[int, float] = {}
            for t, pr in zip(succ.tolist(), prob.tolist()):
                merged[t] = merged.get(t, 0.0) + pr
            rhs = " + ".join(f"{pr:.17g}:(s'={t})" for t, pr in sorted(merged.items()))
            out.append(f"  [{safe[acts[p.row_action[r]]]}] s={s} -> {rhs};")
    out += ["endmodule", "", 'rewards "cost"']
    for s in range(p.num_states):
        for r in p.rows(s):
            out.append(f"  [{safe[acts[p.row_action[r]]]}] s={s} : {p.row_cost[r]:.17g};")
    out.append("endrewards")
    out.append("")

    def label(name, states):
        states = sorted(states)
        cond = " | ".join(f"s={s}" for s in states) if states else "false"
        out.append(f'label "{name}" = {cond};')

    for i in range(p.num_pairs):
        label(f"H{i}", [s for s in range(p.num_states) if p.H[i][s]])
        label(f"I{i}", [s for s in range(p.num_states) if p.I[i][s]])
    if partition is not None:
        for name in ("goal", "bad", "normal"):
            label(name, getattr(partition, f"s_{name}"))
    for ci, c in enumerate(components):
        label(f"C{ci}", c.states)
    return "\n".join(out) + "\n"
