"""Monte Carlo evaluation of complete policies.

Two interchangeable kernels produce the same per-run records: a jitted loop
(one run at a time) and a numpy path that advances all runs together. Both
read :class:`ExecTables` and draw from the counter-based generator, so for a
given seed they agree exactly. ``LTLPLAN_DISABLE_NUMBA=1`` makes the numpy
path the default.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import NUMBA_ENABLED, backend_name, njit
from .executor import BAD, ExecTables, Executor, build_tables, next_product_state, sample_index
from .model import RunTrace
from .rng import ACTION, LABEL, SUCCESSOR, seed_key, uniform
from .synthesis import CompletePolicy

# per-run integer record layout
R_FAILED, R_FAIL_T, R_REACHED, R_GOAL_T, R_CYCLES, R_CYC_BEFORE, R_CYC_AFTER = range(7)
R_I_VISITS, R_H_VISITS, R_DESYNC, R_ENTERED, R_SUF_STEPS = range(7, 12)
N_INT = 12
# per-run float record layout
F_PREFIX_COST, F_SUFFIX_COST, F_TOTAL_COST = range(3)
N_FLOAT = 3


@njit
def _run_loop(
    key, runs, steps, mrow, mcost, mdst, mcum, ldst, lcum, lletter, lap, delta, reset_order, pidx,
    kind, comp, accepting, comp_pair, H, qof, pcum, rr_ptr, rr_act, use_rr, relaxed, x0, k0, q0,
    ints, floats, cycle_cost, cycle_len, ap_visits,
):
    n = kind.shape[0]
    cursor = np.zeros(n, np.int64)
    for r in range(runs):
        cursor[:] = 0
        ru = np.uint64(r)
        x = x0
        k = k0
        s = pidx[x0, k0, q0]
        active = -1
        entry_pair = -1
        acc_cost = 0.0
        acc_len = 0
        failed = False
        reached = False
        for t in range(steps + 1):
            # --- classify the state at time t
            if kind[s] == 2 and not failed:
                failed = True
                ints[r, R_FAIL_T] = t
            c = comp[s]
            if active >= 0 and c != active:
                if relaxed and not failed:
                    failed = True
                    ints[r, R_FAIL_T] = t
                active = -1
            if c >= 0 and active != c:
                active = c
                acc_cost = 0.0
                acc_len = 0
                if entry_pair < 0:
                    entry_pair = comp_pair[c]
                    ints[r, R_ENTERED] = 1
                if not reached and not failed:
                    reached = True
                    ints[r, R_GOAL_T] = t
                if accepting[s]:
                    ints[r, R_I_VISITS] += 1
            elif c >= 0 and accepting[s]:
                nc = ints[r, R_CYCLES]
                cycle_cost[r, nc] = acc_cost
                cycle_len[r, nc] = acc_len
                ints[r, R_CYCLES] = nc + 1
                if failed:
                    ints[r, R_CYC_AFTER] += 1
                else:
                    ints[r, R_CYC_BEFORE] += 1
                ints[r, R_I_VISITS] += 1
                acc_cost = 0.0
                acc_len = 0
            if entry_pair >= 0 and H[entry_pair, s]:
                ints[r, R_H_VISITS] += 1
            for a in range(lap.shape[2]):
                if lap[x, k, a]:
                    ap_visits[r, a] += 1
            if t == steps:
                break
            # --- act
            if use_rr and c >= 0 and kind[s] != 2:
                lo = rr_ptr[s]
                width = rr_ptr[s + 1] - lo
                u = rr_act[lo + cursor[s] % width]
                cursor[s] += 1
            else:
                u = sample_index(pcum[s], uniform(key, ru, np.uint64(t), np.uint64(0)))
            row = mrow[x, u]
            cost = mcost[row]
            floats[r, F_TOTAL_COST] += cost
            if not reached and not failed:
                floats[r, F_PREFIX_COST] += cost
            if active >= 0:
                acc_cost += cost
                acc_len += 1
                floats[r, F_SUFFIX_COST] += cost
                ints[r, R_SUF_STEPS] += 1
            # --- move
            x2 = mdst[row, sample_index(mcum[row], uniform(key, ru, np.uint64(t), np.uint64(1)))]
            k2 = ldst[x2, sample_index(lcum[x2], uniform(key, ru, np.uint64(t), np.uint64(2)))]
            s2 = next_product_state(qof[s], lletter[x, k], kind[s] == 2, x2, k2, pidx, kind, delta, reset_order)
            if s2 < 0:
                ints[r, R_DESYNC] = 1
                break
            x = x2
            k = k2
            s = s2
        ints[r, R_FAILED] = 1 if failed else 0
        ints[r, R_REACHED] = 1 if reached else 0
        if not failed:
            ints[r, R_FAIL_T] = -1
        if not reached:
            ints[r, R_GOAL_T] = -1


def _run_numpy(tb: ExecTables, qof, key, runs, steps, ints, floats, cycle_cost, cycle_len, ap_visits):
    """Same semantics as the jitted loop, vectorized across runs."""
    R = np.arange(runs)
    ru = R.astype(np.uint64)
    x = np.full(runs, tb.x0, dtype=np.int64)
    k = np.full(runs, tb.k0, dtype=np.int64)
    s = np.full(runs, tb.pidx[tb.x0, tb.k0, tb.q0], dtype=np.int64)
    active = np.full(runs, -1, dtype=np.int64)
    entry_pair = np.full(runs, -1, dtype=np.int64)
    acc_cost = np.zeros(runs)
    acc_len = np.zeros(runs, dtype=np.int64)
    failed = np.zeros(runs, dtype=bool)
    reached = np.zeros(runs, dtype=bool)
    alive = np.ones(runs, dtype=bool)
    fail_t = np.full(runs, -1, dtype=np.int64)
    goal_t = np.full(runs, -1, dtype=np.int64)
    cursor = np.zeros((runs, tb.num_states), dtype=np.int64) if tb.use_rr else None
    stream = [np.uint64(ACTION), np.uint64(SUCCESSOR), np.uint64(LABEL)]

    def pick(cum_rows, u):
        # first index whose cumulative value exceeds u (last index at most)
        j = (cum_rows <= u[:, None]).sum(axis=1)
        return np.minimum(j, cum_rows.shape[1] - 1)

    for t in range(steps + 1):
        a = alive
        bad_now = a & (tb.kind[s] == BAD) & ~failed
        fail_t[bad_now] = t
        failed |= bad_now
        c = tb.comp[s]
        left = a & (active >= 0) & (c != active)
        if tb.relaxed:
            lf = left & ~failed
            fail_t[lf] = t
            failed |= lf
        active[left] = -1
        enter = a & (c >= 0) & (active != c)
        active[enter] = c[enter]
        acc_cost[enter] = 0.0
        acc_len[enter] = 0
        first = enter & (entry_pair < 0)
        entry_pair[first] = tb.comp_pair[c[first]]
        ints[first, R_ENTERED] = 1
        newly = enter & ~reached & ~failed
        goal_t[newly] = t
        reached |= newly
        acc_here = tb.accepting[s]
        ints[enter & acc_here, R_I_VISITS] += 1
        done = a & ~enter & (c >= 0) & acc_here
        if done.any():
            idx = np.flatnonzero(done)
            nc = ints[idx, R_CYCLES]
            cycle_cost[idx, nc] = acc_cost[idx]
            cycle_len[idx, nc] = acc_len[idx]
            ints[idx, R_CYCLES] += 1
            ints[idx[failed[idx]], R_CYC_AFTER] += 1
            ints[idx[~failed[idx]], R_CYC_BEFORE] += 1
            ints[idx, R_I_VISITS] += 1
            acc_cost[idx] = 0.0
            acc_len[idx] = 0
        ep = entry_pair >= 0
        hv = a & ep
        hv[hv] = tb.H[entry_pair[hv], s[hv]]
        ints[hv, R_H_VISITS] += 1
        ap_visits[a] += tb.lap[x[a], k[a]]
        if t == steps:
            break
        tu = np.uint64(t)
        u = pick(tb.pcum[s], uniform(key, ru, tu, stream[0]))
        if tb.use_rr:
            rr = a & (c >= 0) & (tb.kind[s] != BAD)
            if rr.any():
                idx = np.flatnonzero(rr)
                ss = s[idx]
                lo = tb.rr_ptr[ss]
                width = tb.rr_ptr[ss + 1] - lo
                u[idx] = tb.rr_act[lo + cursor[idx, ss] % width]
                cursor[idx, ss] += 1
        row = tb.mrow[x, u]
        cost = np.where(a, tb.mcost[row], 0.0)
        floats[:, F_TOTAL_COST] += cost
        pre = ~reached & ~failed
        floats[pre, F_PREFIX_COST] += cost[pre]
        ins = a & (active >= 0)
        acc_cost[ins] += cost[ins]
        acc_len[ins] += 1
        floats[ins, F_SUFFIX_COST] += cost[ins]
        ints[ins, R_SUF_STEPS] += 1
        x2 = tb.mdst[row, pick(tb.mcum[row], uniform(key, ru, tu, stream[1]))]
        k2 = tb.ldst[x2, pick(tb.lcum[x2], uniform(key, ru, tu, stream[2]))]
        prev_bad = tb.kind[s] == BAD
        s2 = tb.pidx[x2, k2, tb.delta[qof[s], tb.lletter[x, k]]]
        for r in np.flatnonzero(prev_bad & a):
            s2[r] = next_product_state(qof[s[r]], tb.lletter[x[r], k[r]], True, x2[r], k2[r], tb.pidx, tb.kind, tb.delta, tb.reset_order)
        lost = a & (s2 < 0)
        ints[lost, R_DESYNC] = 1
        alive = a & ~lost
        x = np.where(alive, x2, x)
        k = np.where(alive, k2, k)
        s = np.where(alive, s2, s)
    ints[:, R_FAILED] = failed
    ints[:, R_REACHED] = reached
    ints[:, R_FAIL_T] = fail_t
    ints[:, R_GOAL_T] = goal_t


@dataclass
class SimStats:
    """Aggregated Monte Carlo outcome.

    Outcome buckets (failures, successes, unfinished, desyncs) sum to runs:
    a failure is any entry into S_d (or, in relaxed mode, leaving the
    accepting component); a success reached an accepting component first.
    Accepting cyclic paths start at component entry and close at each later
    visit of the accepting set.
    """

    runs: int
    steps: int
    seed: int
    mode: str
    baseline: str
    backend: str
    ints: np.ndarray = field(repr=False)
    floats: np.ndarray = field(repr=False)
    cycle_cost: np.ndarray = field(repr=False)
    cycle_len: np.ndarray = field(repr=False)
    ap_visits: np.ndarray = field(repr=False)
    ap: tuple = ()

    @property
    def failures(self) -> int:
        return int(self.ints[:, R_FAILED].sum())

    @property
    def desyncs(self) -> int:
        return int((self.ints[:, R_DESYNC].astype(bool) & ~self.ints[:, R_FAILED].astype(bool)).sum())

    @property
    def successes(self) -> int:
        ok = ~self.ints[:, R_FAILED].astype(bool) & ~self.ints[:, R_DESYNC].astype(bool)
        return int((ok & self.ints[:, R_REACHED].astype(bool)).sum())

    @property
    def unfinished(self) -> int:
        return self.runs - self.failures - self.successes - self.desyncs

    @property
    def prefix_successes(self) -> int:
        """Runs that reached an accepting component before any failure."""
        return int(self.ints[:, R_REACHED].sum())

    @property
    def prefix_failures(self) -> int:
        """Runs that failed before reaching an accepting component."""
        return int((self.ints[:, R_FAILED].astype(bool) & ~self.ints[:, R_REACHED].astype(bool)).sum())

    @property
    def suffix_successes(self) -> int:
        """Runs that completed at least one accepting cycle before failing."""
        return int((self.ints[:, R_CYC_BEFORE] > 0).sum())

    @property
    def recovered_runs(self) -> int:
        """Runs that completed accepting cycles after a failure."""
        return int((self.ints[:, R_CYC_AFTER] > 0).sum())

    @property
    def n_cycles(self) -> np.ndarray:
        return self.ints[:, R_CYCLES]

    @property
    def cycles_before_failure(self) -> np.ndarray:
        return self.ints[:, R_CYC_BEFORE]

    @property
    def i_visits(self) -> np.ndarray:
        return self.ints[:, R_I_VISITS]

    @property
    def h_visits(self) -> np.ndarray:
        return self.ints[:, R_H_VISITS]

    @property
    def entered(self) -> np.ndarray:
        return self.ints[:, R_ENTERED].astype(bool)

    def cycle_costs(self) -> np.ndarray:
        """Cost of every completed accepting cycle, run by run."""
        n = self.n_cycles
        return np.concatenate([self.cycle_cost[r, : n[r]] for r in range(self.runs)]) if self.runs else np.zeros(0)

    def cycle_lengths(self) -> np.ndarray:
        n = self.n_cycles
        return np.concatenate([self.cycle_len[r, : n[r]] for r in range(self.runs)]) if self.runs else np.zeros(0)

    def mean_cycle_cost(self) -> float:
        c = self.cycle_costs()
        return float(c.mean()) if len(c) else float("nan")

    def mean_cycle_step_cost(self) -> float:
        """Total cycle cost over total cycle length (mean cost per step)."""
        ln = self.cycle_lengths().sum()
        return float(self.cycle_costs().sum() / ln) if ln else float("nan")

    def prefix_costs(self) -> np.ndarray:
        return self.floats[self.ints[:, R_REACHED].astype(bool), F_PREFIX_COST]

    def to_dict(self) -> dict:
        pc = self.prefix_costs()
        cc = self.cycle_costs()

        def num(v):
            return None if v != v else round(float(v), 10)

        return {
            "runs": self.runs,
            "steps": self.steps,
            "seed": self.seed,
            "mode": self.mode,
            "baseline": self.baseline,
            "outcomes": {
                "failures": self.failures,
                "successes": self.successes,
                "unfinished": self.unfinished,
                "desyncs": self.desyncs,
            },
            "prefix_successes": self.prefix_successes,
            "prefix_failures": self.prefix_failures,
            "suffix_successes": self.suffix_successes,
            "recovered_runs": self.recovered_runs,
            "mean_prefix_cost": num(pc.mean()) if len(pc) else None,
            "cycles": {
                "count": int(len(cc)),
                "mean_cost": num(self.mean_cycle_cost()),
                "mean_step_cost": num(self.mean_cycle_step_cost()),
                "mean_per_run": num(self.n_cycles.mean()),
            },
            "mean_visits": {a: num(v) for a, v in zip(self.ap, self.ap_visits.mean(axis=0))},
            "h_visits_after_entry": int(self.h_visits.sum()),
            "mean_total_cost": num(self.floats[:, F_TOTAL_COST].mean() / max(self.steps, 1)),
        }


def run_monte_carlo(
    policy: CompletePolicy,
    runs: int = 1000,
    steps: int = 500,
    seed: int = 0,
    baseline: str | None = None,
    backend: str | None = None,
    tables: ExecTables | None = None,
) -> SimStats:
    """Simulate ``runs`` independent runs of ``steps`` actions each.

    Successors are drawn from p_D and labels from p_L with per-run streams
    keyed by ``(seed, run)``; the same seed gives the same statistics on
    either backend.
    """
    if runs < 1 or steps < 1:
        raise ValueError("runs and steps must be >= 1")
    backend = backend or backend_name()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not NUMBA_ENABLED:
        raise RuntimeError("numba backend requested but numba is disabled")
    tb = tables if tables is not None else build_tables(policy, baseline)
    p = policy.product
    qof = np.array([q for _, _, q in p.keys], dtype=np.int64)
    key = seed_key(seed)
    ints = np.zeros((runs, N_INT), dtype=np.int64)
    floats = np.zeros((runs, N_FLOAT))
    cycle_cost = np.zeros((runs, steps + 1))
    cycle_len = np.zeros((runs, steps + 1), dtype=np.int64)
    ap_visits = np.zeros((runs, tb.lap.shape[2]), dtype=np.int64)
    if backend == "numba":
        _run_loop(
            key, runs, steps, tb.mrow, tb.mcost, tb.mdst, tb.mcum, tb.ldst, tb.lcum, tb.lletter, tb.lap,
            tb.delta, tb.reset_order, tb.pidx, tb.kind, tb.comp, tb.accepting, tb.comp_pair, tb.H, qof,
            tb.pcum, tb.rr_ptr, tb.rr_act, tb.use_rr, tb.relaxed, tb.x0, tb.k0, tb.q0,
            ints, floats, cycle_cost, cycle_len, ap_visits,
        )
    else:
        _run_numpy(tb, qof, key, runs, steps, ints, floats, cycle_cost, cycle_len, ap_visits)
    return SimStats(
        runs=runs, steps=steps, seed=seed, mode=policy.mode, baseline=baseline or "optimal", backend=backend,
        ints=ints, floats=floats, cycle_cost=cycle_cost, cycle_len=cycle_len, ap_visits=ap_visits,
        ap=tuple(p.model.ap),
    )


def simulate_run(policy: CompletePolicy, steps: int, seed: int = 0, run: int = 0, baseline: str | None = None,
                 tables: ExecTables | None = None, log_to=None) -> RunTrace:
    """One run through the step-wise :class:`Executor`, with the model
    sampled from the same streams as the kernels."""
    tb = tables if tables is not None else build_tables(policy, baseline)
    ex = Executor(policy, seed=seed, run=run, tables=tb, log_to=log_to)
    m = policy.product.model
    key = seed_key(seed)
    ru = np.array([run], dtype=np.uint64)
    trace = RunTrace()
    x, k = tb.x0, tb.k0
    for t in range(steps):
        label = m.labels[x][k][0]
        u = ex.step(x, label)
        trace.append(x, label, u, ex.state, ex.mode)
        row = tb.mrow[x, u]
        tu = np.uint64(t)
        x = int(tb.mdst[row, sample_index(tb.mcum[row], float(uniform(key, ru, tu, np.uint64(SUCCESSOR))[0]))])
        k = int(tb.ldst[x, sample_index(tb.lcum[x], float(uniform(key, ru, tu, np.uint64(LABEL))[0]))])
    return trace


# --- reports ------------------------------------------------------------------


def cyclic_cost_histogram(stats: SimStats, bins: int | np.ndarray = 30) -> dict:
    """Normalized histogram of accepting-cycle costs plus their mean."""
    c = stats.cycle_costs()
    if len(c) == 0:
        return {"empty": True, "edges": [], "counts": [], "density": [], "mean": None, "cycles": 0}
    counts, edges = np.histogram(c, bins=bins)
    return {
        "empty": False,
        "edges": edges.tolist(),
        "counts": counts.tolist(),
        "density": (counts / counts.sum()).tolist(),
        "mean": float(c.mean()),
        "cycles": int(len(c)),
    }


def histogram_csv(hist: dict) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["bin_low", "bin_high", "count"])
    e = hist["edges"]
    for i, n in enumerate(hist["counts"]):
        w.writerow([f"{e[i]:.6g}", f"{e[i + 1]:.6g}", n])
    return out.getvalue()


def risk_bound_check(stats: SimStats, gamma_prex: float, gamma_sufx: float, max_cycles: int = 10) -> list[dict]:
    """Empirical survival against the bound (1 - gamma_prex)(1 - gamma_sufx)^n.

    Survival at n = 0 is the share of runs reaching a component without
    failing; at n >= 1 it is the share completing n cycles before any failure.
    Runs cut off by the horizon count as non-surviving, so margins are
    conservative for large n.
    """
    out = []
    for n in range(max_cycles + 1):
        if n == 0:
            emp = stats.prefix_successes / stats.runs
        else:
            emp = float((stats.cycles_before_failure >= n).sum()) / stats.runs
        bound = (1 - gamma_prex) * (1 - gamma_sufx) ** n
        sigma = math.sqrt(max(bound * (1 - bound), 1e-12) / stats.runs)
        out.append({"cycles": n, "empirical": emp, "bound": bound, "margin": emp - bound, "sigma": sigma})
    return out


__all__ = [
    "SimStats",
    "cyclic_cost_histogram",
    "histogram_csv",
    "risk_bound_check",
    "run_monte_carlo",
    "simulate_run",
]
