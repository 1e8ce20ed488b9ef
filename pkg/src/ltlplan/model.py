"""Probabilistically-labeled MDP, validation, traces and JSON I/O."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

PROB_TOL = 1e-9
FORMAT_VERSION = 1

Label = frozenset


class ModelError(ValueError):
    """Raised for malformed models, traces or model files."""


def label_key(label: Iterable[str]) -> str:
    """Canonical text form of a label set, e.g. ``"b1,obs"`` or ``""``."""
    return ",".join(sorted(label))


@dataclass(frozen=True)
class Mdp:
    """Probabilistically-labeled MDP.

    States and actions are addressed by dense integer indices; ``states`` and
    ``actions`` hold their names. ``trans[(x, u)]`` is a tuple of
    ``(successor, probability)`` and ``labels[x]`` a tuple of
    ``(label set, probability)``. Allowed actions are the keys of ``trans``.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    trans: Mapping[tuple[int, int], tuple[tuple[int, float], ...]]
    cost: Mapping[tuple[int, int], float]
    ap: tuple[str, ...]
    labels: tuple[tuple[tuple[frozenset, float], ...], ...]
    initial: tuple[int, frozenset]
    _allowed: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        allowed = [[] for _ in self.states]
        for x, u in self.trans:
            if 0 <= x < len(self.states):
                allowed[x].append(u)
        object.__setattr__(self, "_allowed", tuple(tuple(sorted(a)) for a in allowed))

    @property
    def num_states(self) -> int:
        return len(self.states)

    def allowed(self, x: int) -> tuple[int, ...]:
        return self._allowed[x]

    def post(self, x: int, u: int) -> tuple[int, ...]:
        return tuple(y for y, p in self.trans[(x, u)] if p > 0)

    def label_prob(self, x: int, label: Iterable[str]) -> float:
        key = frozenset(label)
        return sum(p for lab, p in self.labels[x] if lab == key)

    def num_edges(self) -> int:
        """Distinct (x, x') pairs joined by some positive-probability action."""
        edges = {(x, y) for (x, _), row in self.trans.items() for y, p in row if p > 0}
        return len(edges)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise ModelError(f"unknown action {name!r}") from None

    def to_dict(self) -> dict:
        return model_to_dict(self)

    def fingerprint(self) -> str:
        return fingerprint_dict(model_to_dict(self))


def validate_model(m: Mdp) -> list[str]:
    """Return a list of human readable invariant violations (empty if valid)."""
    out: list[str] = []
    n = m.num_states
    if len(set(m.states)) != n:
        out.append("duplicate state ids")
    if len(set(m.actions)) != len(m.actions):
        out.append("duplicate action names")
    if len(m.labels) != n:
        out.append(f"label table has {len(m.labels)} rows for {n} states")
    for x in range(n):
        if not m.allowed(x):
            out.append(f"state {m.states[x]}: no allowed action")
    for (x, u), row in sorted(m.trans.items()):
        if not (0 <= x < n) or not (0 <= u < len(m.actions)):
            out.append(f"transition ({x}, {u}): index out of range")
            continue
        where = f"state {m.states[x]} action {m.actions[u]}"
        total = 0.0
        for y, p in row:
            if not (0 <= y < n):
                out.append(f"{where}: successor index {y} out of range")
            if p < 0:
                out.append(f"{where}: negative probability {p}")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            out.append(f"{where}: successor probabilities sum to {total!r}, not 1")
        c = m.cost.get((x, u))
        if c is None:
            out.append(f"{where}: missing cost")
        elif not c > 0:
            out.append(f"{where}: cost {c!r} is not strictly positive")
    for key in m.cost:
        if key not in m.trans:
            out.append(f"cost given for disallowed pair {key}")
    aps = set(m.ap)
    for x, row in enumerate(m.labels[:n]):
        where = f"state {m.states[x]}"
        if not row:
            out.append(f"{where}: empty label set")
            continue
        seen = set()
        total = 0.0
        for lab, p in row:
            if lab in seen:
                out.append(f"{where}: duplicate label {{{label_key(lab)}}}")
            seen.add(lab)
            if not p > 0:
                out.append(f"{where}: label {{{label_key(lab)}}} has non-positive probability {p!r}")
            if not lab <= aps:
                out.append(f"{where}: label uses unknown propositions {sorted(lab - aps)}")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            out.append(f"{where}: label probabilities sum to {total!r}, not 1")
    x0, l0 = m.initial
    if not (0 <= x0 < n):
        out.append(f"initial state index {x0} out of range")
    elif m.label_prob(x0, l0) <= 0:
        out.append(f"initial label {{{label_key(l0)}}} has zero probability at {m.states[x0]}")
    return out


def check_model(m: Mdp) -> Mdp:
    problems = validate_model(m)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems[:5]))
    return m


@dataclass
class RunTrace:
    """Executed run: (x_t, l_t, u_t) per step plus executor annotations."""

    steps: list[tuple[int, frozenset, int]] = field(default_factory=list)
    product_states: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def append(self, x: int, label: Iterable[str], u: int, product_state: int = -1, flag: str = "") -> None:
        self.steps.append((x, frozenset(label), u))
        self.product_states.append(product_state)
        self.flags.append(flag)

    def __len__(self) -> int:
        return len(self.steps)


def mean_total_cost(m: Mdp, trace: RunTrace, n: int) -> float:
    """(1/n) * sum_{t=0..n} c(x_t, u_t) over a recorded run.

    The sum covers n + 1 steps, so the trace needs at least n + 1 entries.
    """
    if n < 1:
        raise ModelError("horizon must be >= 1")
    if len(trace) < n + 1:
        raise ModelError(f"horizon {n} needs {n + 1} steps, trace has {len(trace)}")
    total = 0.0
    for t in range(n + 1):
        x, _, u = trace.steps[t]
        if u is None or u < 0 or (x, u) not in m.cost:
            raise ModelError(f"step {t}: no valid action recorded")
        total += m.cost[(x, u)]
    return total / n


# --- construction helper ---------------------------------------------------


def make_mdp(
    states: Sequence[str],
    actions: Sequence[str],
    transitions: Iterable[tuple[str, str, str, float]],
    costs: Mapping[tuple[str, str], float],
    ap: Sequence[str],
    labels: Mapping[str, Iterable[tuple[Iterable[str], float]]],
    initial: tuple[str, Iterable[str]],
) -> Mdp:
    """Build an :class:`Mdp` from name-based tables."""
    sidx = {s: i for i, s in enumerate(states)}
    aidx = {a: i for i, a in enumerate(actions)}
    rows: dict[tuple[int, int], dict[int, float]] = {}
    try:
        for src, act, dst, p in transitions:
            row = rows.setdefault((sidx[src], aidx[act]), {})
            row[sidx[dst]] = row.get(sidx[dst], 0.0) + float(p)
        cost = {(sidx[s], aidx[a]): float(c) for (s, a), c in costs.items()}
        lab_rows = []
        for s in states:
            lab_rows.append(tuple((frozenset(lab), float(p)) for lab, p in labels.get(s, ())))
        x0 = sidx[initial[0]]
    except KeyError as exc:
        raise ModelError(f"unknown name {exc.args[0]!r}") from None
    trans = {k: tuple(sorted(v.items())) for k, v in sorted(rows.items())}
    return Mdp(
        states=tuple(states),
        actions=tuple(actions),
        trans=trans,
        cost=cost,
        ap=tuple(ap),
        labels=tuple(lab_rows),
        initial=(x0, frozenset(initial[1])),
    )


# --- JSON ------------------------------------------------------------------


def model_to_dict(m: Mdp) -> dict:
    states = []
    for x, name in enumerate(m.states):
        labs = [{"subset": sorted(lab), "prob": p} for lab, p in m.labels[x]]
        states.append({"id": name, "labels": labs})
    transitions = []
    costs = []
    for (x, u), row in sorted(m.trans.items()):
        for y, p in row:
            transitions.append({"from": m.states[x], "action": m.actions[u], "to": m.states[y], "prob": p})
        costs.append({"state": m.states[x], "action": m.actions[u], "cost": m.cost[(x, u)]})
    x0, l0 = m.initial
    return {
        "format_version": FORMAT_VERSION,
        "ap": list(m.ap),
        "states": states,
        "actions": list(m.actions),
        "transitions": transitions,
        "costs": costs,
        "initial": {"state": m.states[x0], "label": sorted(l0)},
    }


def model_from_dict(doc: Mapping) -> Mdp:
    try:
        version = doc.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported model format_version {version}")
        states = [s["id"] for s in doc["states"]]
        labels = {s["id"]: [(lab["subset"], lab["prob"]) for lab in s["labels"]] for s in doc["states"]}
        transitions = [(t["from"], t["action"], t["to"], t["prob"]) for t in doc["transitions"]]
        costs = {(c["state"], c["action"]): c["cost"] for c in doc["costs"]}
        init = doc["initial"]
        m = make_mdp(states, doc["actions"], transitions, costs, doc["ap"], labels, (init["state"], init["label"]))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model document: {exc!r}") from None
    return check_model(m)


def dumps_json(doc) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def fingerprint_dict(doc) -> str:
    body = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode()).hexdigest()[:16]


def save_model(m: Mdp, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_json(model_to_dict(m)))


def load_model(path) -> Mdp:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None
    return model_from_dict(doc)
