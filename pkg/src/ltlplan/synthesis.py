"""Occupancy-measure programs for the plan prefix and suffix, and the
complete policy built from them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dra import guard_letters, label_distance
from .graph import Component, compute_amecs, compute_asccs
from .lp import OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, solve
from .model import FORMAT_VERSION, ModelError, fingerprint_dict, label_key
from .product import ProductAutomaton, StatePartition, partition_states

log = logging.getLogger(__name__)

MASS_EPS = 1e-9
LEX_TOL = 1e-6


class InfeasibleError(RuntimeError):
    """The risk bound cannot be met; ``min_risk`` is the best achievable."""

    def __init__(self, gamma: float, min_risk: float):
        super().__init__(f"risk bound gamma={gamma:g} is infeasible; the smallest achievable risk is {min_risk:.6g}")
        self.gamma = gamma
        self.min_risk = min_risk


@dataclass
class Expr:
    """Linear expression ``idx . coef + const`` over LP variables."""

    idx: np.ndarray
    coef: np.ndarray
    const: float = 0.0

    def value(self, x: np.ndarray) -> float:
        return float(x[self.idx] @ self.coef) + self.const if len(self.idx) else self.const


def _concat(exprs: Sequence[Expr]) -> Expr:
    if not exprs:
        return Expr(np.zeros(0, np.int64), np.zeros(0))
    return Expr(
        np.concatenate([e.idx for e in exprs]).astype(np.int64),
        np.concatenate([e.coef for e in exprs]),
        sum(e.const for e in exprs),
    )


def _entries(p: ProductAutomaton, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(local row index, successor, probability) for all entries of ``rows``."""
    counts = p.succ_ptr[rows + 1] - p.succ_ptr[rows]
    if len(rows) == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
    starts = np.repeat(p.succ_ptr[rows] - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    flat = starts + np.arange(counts.sum())
    local = np.repeat(np.arange(len(rows)), counts)
    return local, p.succ[flat], p.prob[flat]


@dataclass
class Program:
    """A program plus the bookkeeping needed to read its solution."""

    lp: LinearProgram
    pre_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    comp_rows: list = field(default_factory=list)
    z: list = field(default_factory=list)
    pre_cost: Expr | None = None
    reach: Expr | None = None
    suf_cost: list = field(default_factory=list)
    bad_mass: list = field(default_factory=list)
    inflow: list = field(default_factory=list)
    raw_cost: list = field(default_factory=list)  # sum z*c per component
    z_mass: list = field(default_factory=list)


def _add_prefix(prog: Program, p: ProductAutomaton, part: StatePartition, goal_mask: np.ndarray):
    """Variables and flow rows over S_n. Returns (row, successor, prob) entries for inflows."""
    lp = prog.lp
    n = p.num_states
    normal = np.zeros(n, dtype=bool)
    normal[list(part.s_normal)] = True
    rows = np.flatnonzero(normal[p.row_state])
    y = lp.add_variables([f"y_{p.row_state[r]}_{p.row_action[r]}" for r in rows])
    local, tgt, pr = _entries(p, rows)
    keep_mass = np.zeros(len(rows))
    np.add.at(keep_mass, local, pr * (normal[tgt] | goal_mask[tgt]))
    goal_mass = np.zeros(len(rows))
    np.add.at(goal_mass, local, pr * goal_mask[tgt])
    prog.pre_rows, prog.y = rows, y
    prog.pre_cost = Expr(y, p.row_cost[rows] * keep_mass)
    prog.reach = Expr(y, goal_mass, 1.0 if goal_mask[p.initial] else 0.0)
    # flow balance on S_n
    states = np.flatnonzero(normal)
    pos = np.full(n, -1, dtype=np.int64)
    pos[states] = np.arange(len(states))
    out_r = pos[p.row_state[rows]]
    inflow = normal[tgt]
    r_idx = np.concatenate([out_r, pos[tgt[inflow]]])
    c_idx = np.concatenate([y, y[local[inflow]]])
    vals = np.concatenate([np.ones(len(rows)), -pr[inflow]])
    rhs = (states == p.initial).astype(float)
    lp.add_constraints(r_idx, c_idx, vals, "=", rhs, [f"flow_pre_{s}" for s in states])
    return local, tgt, pr


def _add_component(
    prog: Program,
    p: ProductAutomaton,
    comp: Component,
    ci: int,
    relaxed: bool,
    penalty: float,
    y0_fixed: np.ndarray | None,
    pre_entries,
    s0_mass: bool,
) -> None:
    lp = prog.lp
    n = p.num_states
    member = np.zeros(n, dtype=bool)
    member[list(comp.states)] = True
    acc = np.zeros(n, dtype=bool)
    acc[list(comp.accepting)] = True
    cand = np.flatnonzero(member[p.row_state])
    rows = np.array([r for r in cand if int(p.row_action[r]) in comp.actions[int(p.row_state[r])]], dtype=np.int64)
    z = lp.add_variables([f"z{ci}_{p.row_state[r]}_{p.row_action[r]}" for r in rows])
    local, tgt, pr = _entries(p, rows)
    to_acc = acc[tgt]
    to_mid = member[tgt] & ~acc[tgt]
    to_bad = ~member[tgt]
    if not relaxed and to_bad.any():
        raise ModelError(f"component {ci} is not closed under its actions")
    stay = np.zeros(len(rows))
    np.add.at(stay, local, pr * member[tgt])
    badp = np.zeros(len(rows))
    np.add.at(badp, local, pr * to_bad)
    accp = np.zeros(len(rows))
    np.add.at(accp, local, pr * to_acc)
    cost = p.row_cost[rows]
    if relaxed:
        prog.suf_cost.append(Expr(z, cost * stay + penalty * badp))
    else:
        prog.suf_cost.append(Expr(z, cost.copy()))
    prog.raw_cost.append(Expr(z, cost.copy()))
    prog.z_mass.append(Expr(z, np.ones(len(rows))))
    prog.bad_mass.append(Expr(z, badp))
    prog.comp_rows.append(rows)
    prog.z.append(z)

    states = np.array(comp.states, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    pos[states] = np.arange(len(states))
    # balance: out(s) - inflow from non-accepting targets - y0(s) = 0
    r_idx = [pos[p.row_state[rows]], pos[tgt[to_mid]]]
    c_idx = [z, z[local[to_mid]]]
    vals = [np.ones(len(rows)), -pr[to_mid]]
    absorb_idx = [z]
    absorb_val = [accp + (badp if relaxed else 0.0)]
    if y0_fixed is not None:
        rhs = np.asarray(y0_fixed, dtype=float)
        total = float(rhs.sum())
        prog.inflow.append(Expr(np.zeros(0, np.int64), np.zeros(0), total))
        lp.add_constraints(np.concatenate(r_idx), np.concatenate(c_idx), np.concatenate(vals), "=", rhs, [f"flow_c{ci}_{s}" for s in states])
        lp.add_constraints(np.zeros(len(z), np.int64), z, absorb_val[0], "=", [total], [f"absorb_c{ci}"])
        return
    pl, pt, ppr = pre_entries
    into = member[pt]
    y_idx = prog.y[pl[into]]
    r_idx.append(pos[pt[into]])
    c_idx.append(y_idx)
    vals.append(-ppr[into])
    rhs = np.zeros(len(states))
    if s0_mass:
        rhs[pos[p.initial]] = 1.0
    lp.add_constraints(np.concatenate(r_idx), np.concatenate(c_idx), np.concatenate(vals), "=", rhs, [f"flow_c{ci}_{s}" for s in states])
    absorb_idx.append(y_idx)
    absorb_val.append(-ppr[into])
    lp.add_constraints(
        np.zeros(sum(len(a) for a in absorb_idx), np.int64),
        np.concatenate(absorb_idx),
        np.concatenate(absorb_val),
        "=",
        [1.0 if s0_mass else 0.0],
        [f"absorb_c{ci}"],
    )
    prog.inflow.append(Expr(y_idx, ppr[into].copy(), 1.0 if s0_mass else 0.0))


def build_prefix_program(p: ProductAutomaton, part: StatePartition, gamma: float) -> Program:
    """Expected cost to reach S_c with reach probability at least 1 - gamma."""
    prog = Program(LinearProgram("prefix"))
    goal = np.zeros(p.num_states, dtype=bool)
    goal[list(part.s_goal)] = True
    _add_prefix(prog, p, part, goal)
    prog.lp.add_objective(prog.pre_cost.idx, prog.pre_cost.coef)
    _add_reach_constraint(prog, gamma)
    return prog


def _add_reach_constraint(prog: Program, gamma: float) -> None:
    r = prog.reach
    prog.lp.add_constraint(r.idx, r.coef, ">=", 1.0 - gamma - r.const, "reach")


def build_max_reach_program(p: ProductAutomaton, part: StatePartition) -> Program:
    prog = Program(LinearProgram("max_reach"))
    goal = np.zeros(p.num_states, dtype=bool)
    goal[list(part.s_goal)] = True
    _add_prefix(prog, p, part, goal)
    prog.lp.add_objective(prog.reach.idx, -prog.reach.coef)
    return prog


def build_suffix_program(p: ProductAutomaton, comp: Component, y0: np.ndarray) -> Program:
    """Cost of reaching the accepting set again, from the entry distribution
    ``y0`` (indexed like ``comp.states``)."""
    if not comp.accepting:
        raise ModelError("component has no accepting state")
    prog = Program(LinearProgram("suffix"))
    _add_component(prog, p, comp, 0, False, 0.0, y0, None, False)
    prog.lp.add_objective(prog.suf_cost[0].idx, prog.suf_cost[0].coef)
    return prog


def build_relaxed_suffix_program(p: ProductAutomaton, comp: Component, y0: np.ndarray, d: float) -> Program:
    """As :func:`build_suffix_program`, but mass leaving the component goes to
    a bad state priced at ``d``."""
    if d <= 0:
        raise ValueError("penalty d must be positive")
    prog = Program(LinearProgram("relaxed_suffix"))
    _add_component(prog, p, comp, 0, True, d, y0, None, False)
    prog.lp.add_objective(prog.suf_cost[0].idx, prog.suf_cost[0].coef)
    return prog


def build_combined_program(
    p: ProductAutomaton,
    comps: Sequence[Component],
    part: StatePartition,
    gamma: float,
    beta: float,
    d: float = 300.0,
    relaxed: bool = False,
) -> Program:
    """beta * prefix cost + (1 - beta) * sum of suffix costs, with each
    component's entry distribution written in terms of the prefix variables."""
    if not comps:
        raise ModelError("no accepting components")
    if not 0 <= beta <= 1:
        raise ValueError("beta must lie in [0, 1]")
    prog = Program(LinearProgram("combined_relaxed" if relaxed else "combined"))
    goal = np.zeros(p.num_states, dtype=bool)
    goal[list(part.s_goal)] = True
    entries = _add_prefix(prog, p, part, goal)
    seen_s0 = False
    for ci, comp in enumerate(comps):
        s0_here = goal[p.initial] and p.initial in comp.states and not seen_s0
        seen_s0 = seen_s0 or s0_here
        _add_component(prog, p, comp, ci, relaxed, d, None, entries, s0_here)
    _add_reach_constraint(prog, gamma)
    prog.lp.set_objective_vector(_objective(prog, beta))
    return prog


def _objective(prog: Program, beta: float) -> np.ndarray:
    c = np.zeros(prog.lp.num_vars)
    np.add.at(c, prog.pre_cost.idx, beta * prog.pre_cost.coef)
    suf = _concat(prog.suf_cost)
    np.add.at(c, suf.idx, (1.0 - beta) * suf.coef)
    return c


def _solve_or_raise(lp: LinearProgram) -> LpSolution:
    sol = solve(lp)
    if sol.status == UNBOUNDED:
        raise ModelError(f"{lp.name}: program is unbounded (prefix MDP not transient)")
    return sol


def _lexicographic(prog: Program, primary: Expr, secondary: Expr, sol: LpSolution) -> LpSolution:
    """Among optimal solutions for ``primary``, minimize ``secondary``."""
    lp = prog.lp
    saved = lp.objective_vector()
    best = primary.value(sol.x)
    row = lp.add_constraint(primary.idx, primary.coef, "<=", best - primary.const + LEX_TOL * (1 + abs(best)), "lex")
    c = np.zeros(lp.num_vars)
    np.add.at(c, secondary.idx, secondary.coef)
    lp.set_objective_vector(c)
    sol2 = solve(lp)
    # restore the program as built
    blk = lp._blocks["<="]
    for attr in ("rows", "cols", "vals"):
        getattr(blk, attr).pop()
    blk.rhs.pop()
    blk.names.pop()
    assert len(blk) == row
    lp.set_objective_vector(saved)
    return sol2 if sol2.ok else sol


# --- policies -------------------------------------------------------------


def extract_policy(p: ProductAutomaton, rows: np.ndarray, values: np.ndarray, states: Sequence[int] | None = None) -> dict:
    """state -> {action: probability} from occupancy values on ``rows``.

    States whose total mass is at most 1e-9 get the uniform distribution over
    the actions present in ``rows`` (all allowed actions if none).
    """
    by_state: dict[int, list[tuple[int, float]]] = {}
    for r, v in zip(rows, values):
        by_state.setdefault(int(p.row_state[r]), []).append((int(p.row_action[r]), max(float(v), 0.0)))
    out = {}
    for s in states if states is not None else sorted(by_state):
        entries = by_state.get(int(s)) or [(u, 0.0) for u in p.actions(int(s))]
        total = sum(v for _, v in entries)
        if total > MASS_EPS:
            out[int(s)] = {u: v / total for u, v in entries if v > 0}
        else:
            out[int(s)] = {u: 1.0 / len(entries) for u, _ in entries}
    return out


def recovery_scores(p: ProductAutomaton, part: StatePartition, s: int) -> dict[int, float]:
    """kappa(s, u) for every allowed action u of a bad state s."""
    good = part.s_goal | part.s_normal
    d = p.dra
    x, k, q = p.keys[s]
    letter = int(p.letter[s])
    weights = {}
    for q2 in d.post(q):
        chi = guard_letters(d, q, q2)
        weights[q2] = label_distance(letter, chi) / len(chi)
    scores = {}
    m = p.model
    for u in m.allowed(x):
        kappa = 0.0
        for y, py in m.trans[(x, u)]:
            for k2, (_, pl) in enumerate(m.labels[y]):
                for q2, w in weights.items():
                    t = p.index.get((y, k2, q2), -1)
                    if t >= 0 and t in good:
                        kappa += w * py * pl
        scores[u] = kappa
    return scores


def recovery_policy(p: ProductAutomaton, part: StatePartition) -> dict[int, int]:
    """Single action per bad state minimizing kappa; lowest action id on ties."""
    out = {}
    for s in sorted(part.s_bad):
        scores = recovery_scores(p, part, s)
        best = min(scores.values())
        out[s] = min(u for u, v in scores.items() if v <= best + 1e-12)
    return out


def reset_candidates(p: ProductAutomaton, q: int, letter: int) -> list[int]:
    """Automaton states in Post(q) ordered by D(letter, chi(q, q')), then id."""
    d = p.dra
    ranked = []
    for q2 in d.post(q):
        ranked.append((label_distance(letter, guard_letters(d, q, q2)), q2))
    return [q2 for _, q2 in sorted(ranked)]


# --- complete policy ----------------------------------------------------------


@dataclass
class CompletePolicy:
    mode: str
    gamma: float
    beta: float
    penalty: float
    components: list[Component]
    partition: StatePartition
    prefix: dict
    suffix: list[dict]
    recovery: dict
    diagnostics: dict
    product: ProductAutomaton = field(repr=False)

    def component_of(self) -> np.ndarray:
        """Index of the (first) component holding each state, -1 elsewhere."""
        out = np.full(self.product.num_states, -1, dtype=np.int64)
        for ci in reversed(range(len(self.components))):
            out[list(self.components[ci].states)] = ci
        return out

    def distribution(self, s: int) -> dict[int, float]:
        """Action distribution of the executed policy at product state s."""
        if s in self.recovery:
            return {self.recovery[s]: 1.0}
        comp = self.component_of()[s]
        if comp >= 0 and s in self.suffix[comp]:
            return self.suffix[comp][s]
        if s in self.prefix:
            return self.prefix[s]
        acts = self.product.actions(s)
        return {u: 1.0 / len(acts) for u in acts}

    def matrix(self) -> np.ndarray:
        """Dense (states x actions) probability table of the executed policy."""
        n_u = len(self.product.model.actions)
        out = np.zeros((self.product.num_states, n_u))
        for s in range(self.product.num_states):
            for u, v in self.distribution(s).items():
                out[s, u] = v
        return out

    def to_dict(self) -> dict:
        p = self.product
        acts = p.model.actions

        def dist(d):
            return {acts[u]: d[u] for u in sorted(d)}

        return {
            "format_version": FORMAT_VERSION,
            "fingerprint": product_fingerprint(p),
            "model_fingerprint": p.model.fingerprint(),
            "mode": self.mode,
            "parameters": {"gamma": self.gamma, "beta": self.beta, "penalty_d": self.penalty},
            "partition": {
                "normal": sorted(p.name(s) for s in self.partition.s_normal),
                "goal": len(self.partition.s_goal),
                "bad": len(self.partition.s_bad),
                "unreachable": len(self.partition.s_unreach),
            },
            "prefix": {p.name(s): dist(d) for s, d in sorted(self.prefix.items())},
            "suffix": [
                {
                    "kind": c.kind,
                    "pair": c.pair,
                    "states": [p.name(s) for s in c.states],
                    "accepting": [p.name(s) for s in c.accepting],
                    "actions": {p.name(s): [acts[u] for u in c.actions[s]] for s in c.states},
                    "policy": {p.name(s): dist(d) for s, d in sorted(pol.items())},
                }
                for c, pol in zip(self.components, self.suffix)
            ],
            "recovery": {p.name(s): acts[u] for s, u in sorted(self.recovery.items())},
            "diagnostics": self.diagnostics,
        }


def product_fingerprint(p: ProductAutomaton) -> str:
    return fingerprint_dict(
        {
            "model": p.model.fingerprint(),
            "ap": list(p.dra.ap),
            "delta": p.dra.delta.tolist(),
            "pairs": [[sorted(h), sorted(i)] for h, i in p.dra.pairs],
            "states": [p.name(s) for s in range(p.num_states)],
        }
    )


def _fallback_suffix(p: ProductAutomaton, comp: Component, relaxed: bool, d: float) -> dict:
    """Standalone suffix policy started from every state of the component.

    Used for states the combined program leaves without mass (for instance
    accepting states when the prefix never enters through them)."""
    y0 = np.full(len(comp.states), 1.0 / len(comp.states))
    prog = build_relaxed_suffix_program(p, comp, y0, d) if relaxed else build_suffix_program(p, comp, y0)
    sol = _solve_or_raise(prog.lp)
    if not sol.ok:
        raise ModelError(f"standalone suffix program failed: {sol.status} {sol.message}")
    return extract_policy(p, prog.comp_rows[0], sol.x[prog.z[0]], comp.states)


def synthesize(
    p: ProductAutomaton,
    gamma: float = 0.0,
    beta: float = 0.5,
    d: float = 300.0,
    components: Sequence[Component] | None = None,
    relaxed: bool | None = None,
) -> CompletePolicy:
    """Complete policy: combined prefix/suffix program plus recovery actions.

    Uses accepting MECs when any exist, otherwise accepting SCCs with the
    bad-state penalty ``d``.
    """
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if not 0 <= beta <= 1:
        raise ValueError("beta must lie in [0, 1]")
    if d <= 0:
        raise ValueError("penalty d must be positive")
    if components is None:
        comps = compute_amecs(p)
        relaxed = False
        if not comps:
            comps = compute_asccs(p)
            relaxed = True
    else:
        comps = list(components)
        relaxed = bool(relaxed) if relaxed is not None else any(c.kind == "ascc" for c in comps)
    if not comps:
        raise ModelError("the product has no accepting component; the task cannot be satisfied at all")
    overlap = set()
    for i, a in enumerate(comps):
        for b in comps[i + 1:]:
            if set(a.states) & set(b.states):
                overlap.add((i, comps.index(b)))
    if overlap:
        log.warning("components %s share states; the first listed component is used at execution", sorted(overlap))
    goal = set().union(*(c.states for c in comps))
    part = partition_states(p, goal)
    prog = build_combined_program(p, comps, part, gamma, beta, d, relaxed)
    sol = _solve_or_raise(prog.lp)
    if sol.status != OPTIMAL:
        if sol.status == "infeasible":
            mr = build_max_reach_program(p, part)
            msol = _solve_or_raise(mr.lp)
            best = mr.reach.value(msol.x) if msol.ok else 0.0
            raise InfeasibleError(gamma, max(0.0, 1.0 - best))
        raise ModelError(f"combined program failed: {sol.status} {sol.message}")
    suf_total = _concat(prog.suf_cost)
    if beta == 0.0:
        sol = _lexicographic(prog, suf_total, prog.pre_cost, sol)
    elif beta == 1.0:
        sol = _lexicographic(prog, prog.pre_cost, suf_total, sol)
    x = sol.x
    normal_states = sorted(part.s_normal)
    prefix = extract_policy(p, prog.pre_rows, x[prog.y], normal_states)
    suffix = []
    comp_diag = []
    for ci, comp in enumerate(comps):
        zc = x[prog.z[ci]]
        pol = extract_policy(p, prog.comp_rows[ci], zc, comp.states)
        mass = {}
        for r, v in zip(prog.comp_rows[ci], zc):
            mass[int(p.row_state[r])] = mass.get(int(p.row_state[r]), 0.0) + float(v)
        empty = [s for s in comp.states if mass.get(s, 0.0) <= MASS_EPS]
        if empty:
            fb = _fallback_suffix(p, comp, relaxed, d)
            for s in empty:
                pol[s] = fb[s]
        suffix.append(pol)
        inflow = prog.inflow[ci].value(x)
        raw = prog.raw_cost[ci].value(x)
        zm = prog.z_mass[ci].value(x)
        bad = prog.bad_mass[ci].value(x)
        comp_diag.append(
            {
                "kind": comp.kind,
                "pair": comp.pair,
                "size": len(comp.states),
                "accepting": len(comp.accepting),
                "inflow": inflow,
                "objective": prog.suf_cost[ci].value(x),
                "cost_per_entry": raw / inflow if inflow > MASS_EPS else 0.0,
                "mean_step_cost": raw / zm if zm > MASS_EPS else 0.0,
                "bad_mass": bad,
                "gamma_sufx": bad / inflow if inflow > MASS_EPS else 0.0,
            }
        )
    recovery = recovery_policy(p, part)
    reach = prog.reach.value(x)
    pre_cost = prog.pre_cost.value(x)
    suf_obj = suf_total.value(x)
    inflow_total = sum(c["inflow"] for c in comp_diag)
    diagnostics = {
        "mode": "relaxed" if relaxed else "amec",
        "components": len(comps),
        "prefix_cost": pre_cost,
        "reach_probability": reach,
        "prefix_risk": max(0.0, 1.0 - reach),
        "suffix_objective": suf_obj,
        "suffix_cost_per_entry": sum(c["cost_per_entry"] * c["inflow"] for c in comp_diag) / inflow_total if inflow_total > MASS_EPS else 0.0,
        "suffix_mean_step_cost": sum(c["mean_step_cost"] for c in comp_diag if c["inflow"] > MASS_EPS),
        "gamma_sufx": sum(c["bad_mass"] for c in comp_diag) / inflow_total if inflow_total > MASS_EPS else 0.0,
        "balanced_objective": beta * pre_cost + (1 - beta) * suf_obj,
        "lp_variables": prog.lp.num_vars,
        "lp_constraints": prog.lp.num_constraints,
        "per_component": comp_diag,
    }
    return CompletePolicy(
        mode="relaxed" if relaxed else "amec",
        gamma=gamma,
        beta=beta,
        penalty=d,
        components=comps,
        partition=part,
        prefix=prefix,
        suffix=suffix,
        recovery=recovery,
        diagnostics=diagnostics,
        product=p,
    )


def policy_from_dict(doc: dict, p: ProductAutomaton) -> CompletePolicy:
    """Rebuild a policy written by :meth:`CompletePolicy.to_dict` against ``p``."""
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported policy format_version {doc.get('format_version')}")
    if doc.get("fingerprint") != product_fingerprint(p):
        raise ModelError("policy does not match this model/automaton (fingerprint mismatch)")
    by_name = {p.name(s): s for s in range(p.num_states)}
    aidx = {a: i for i, a in enumerate(p.model.actions)}

    def dist(d):
        return {aidx[a]: float(v) for a, v in d.items()}

    comps = []
    suffix = []
    for c in doc["suffix"]:
        states = tuple(by_name[n] for n in c["states"])
        pol = {by_name[n]: dist(d) for n, d in c["policy"].items()}
        actions = {by_name[n]: tuple(aidx[a] for a in acts_) for n, acts_ in c["actions"].items()}
        comps.append(Component(c["kind"], int(c["pair"]), states, tuple(by_name[n] for n in c["accepting"]), actions))
        suffix.append(pol)
    goal = set().union(*(c.states for c in comps)) if comps else set()
    part = partition_states(p, goal)
    params = doc["parameters"]
    return CompletePolicy(
        mode=doc["mode"],
        gamma=params["gamma"],
        beta=params["beta"],
        penalty=params["penalty_d"],
        components=comps,
        partition=part,
        prefix={by_name[n]: dist(d) for n, d in doc["prefix"].items()},
        suffix=suffix,
        recovery={by_name[n]: aidx[a] for n, a in doc["recovery"].items()},
        diagnostics=doc["diagnostics"],
        product=p,
    )


__all__ = [
    "CompletePolicy",
    "InfeasibleError",
    "Program",
    "build_combined_program",
    "build_max_reach_program",
    "build_prefix_program",
    "build_relaxed_suffix_program",
    "build_suffix_program",
    "extract_policy",
    "label_key",
    "policy_from_dict",
    "recovery_policy",
    "reset_candidates",
    "synthesize",
]
