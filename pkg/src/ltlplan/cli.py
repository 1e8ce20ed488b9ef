"""Command-line front end: ``ltlplan gen-grid | synth | simulate | inspect``.

Exit codes: 0 on success, 2 when the risk bound is infeasible, 3 on any
input error. JSON outputs use sorted keys so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .dra import FIXTURES, DraParseError, dump_dra, load_fixture, parse_dra
from .export import to_dot, to_prism
from .graph import compute_amecs, compute_asccs
from .grid import PRESETS, GridConfig, build_grid_model, preset_config
from .lp import to_lp_text
from .model import FORMAT_VERSION, ModelError, dumps_json, load_model, save_model
from .product import build_product, partition_states
from .sim import cyclic_cost_histogram, histogram_csv, risk_bound_check, run_monte_carlo, simulate_run
from .synthesis import (
    InfeasibleError,
    build_combined_program,
    policy_from_dict,
    product_fingerprint,
    synthesize,
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _unit(name):
    def check(text):
        v = float(text)
        if not 0.0 <= v <= 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1]")
        return v
    return check


def _positive(kind):
    def check(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v
    return check


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_dra(args):
    if getattr(args, "task", None):
        return load_fixture(args.task), f"fixture:{args.task}"
    if getattr(args, "dra", None):
        return parse_dra(Path(args.dra).read_text()), str(args.dra)
    raise InputError("give --dra FILE or --task NAME")


# --- subcommands ----------------------------------------------------------------


def cmd_gen_grid(args) -> int:
    if args.preset:
        cfg = preset_config(args.preset)
    else:
        if args.width is None or args.height is None:
            raise InputError("give --preset or both --width and --height")
        cfg = GridConfig(args.width, args.height, boundary=args.boundary)
    m = build_grid_model(cfg)
    save_model(m, args.output)
    sys.stdout.write(dumps_json({"states": m.num_states, "edges": m.num_edges(), "fingerprint": m.fingerprint(), "output": str(args.output)}))
    return EXIT_OK


def cmd_synth(args) -> int:
    timings = {}
    t0 = time.perf_counter()
    m = load_model(args.model)
    d, dra_src = _load_dra(args)
    timings["load"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    p = build_product(m, d)
    timings["product"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    amecs = compute_amecs(p)
    comps, relaxed = (amecs, False) if amecs else (compute_asccs(p), True)
    timings["components"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        pol = synthesize(p, args.gamma, args.beta, args.penalty_d, components=comps, relaxed=relaxed)
    except InfeasibleError as e:
        sys.stdout.write(dumps_json({
            "format_version": FORMAT_VERSION,
            "status": "infeasible",
            "gamma": e.gamma,
            "min_achievable_risk": e.min_risk,
        }))
        return EXIT_INFEASIBLE
    timings["synthesis"] = time.perf_counter() - t0
    doc = pol.to_dict()
    doc["dra"] = dump_dra(d)
    doc["dra_source"] = dra_src
    _write(args.output, dumps_json(doc))
    report = {
        "format_version": FORMAT_VERSION,
        "status": "ok",
        "mode": pol.mode,
        "components": len(pol.components),
        "product": {"states": p.num_states, "transitions": p.num_transitions()},
        "partition": {
            "normal": len(pol.partition.s_normal),
            "goal": len(pol.partition.s_goal),
            "bad": len(pol.partition.s_bad),
            "unreachable": len(pol.partition.s_unreach),
        },
        "objective": {k: pol.diagnostics[k] for k in (
            "prefix_cost", "reach_probability", "suffix_objective", "suffix_cost_per_entry",
            "suffix_mean_step_cost", "gamma_sufx", "balanced_objective")},
        "per_component": pol.diagnostics["per_component"],
        "fingerprint": doc["fingerprint"],
    }
    if args.timings:
        report["timings_s"] = timings
    _write(args.report, dumps_json(report))
    if args.export:
        out = Path(args.export_dir)
        out.mkdir(parents=True, exist_ok=True)
        for kind in args.export:
            if kind == "lp":
                prog = build_combined_program(p, pol.components, pol.partition, args.gamma, args.beta, args.penalty_d, relaxed)
                (out / "combined.lp").write_text(to_lp_text(prog.lp))
            elif kind == "dot":
                (out / "product.dot").write_text(to_dot(p, pol.partition, pol.components))
            else:
                (out / "product.prism").write_text(to_prism(p, pol.partition, pol.components))
    return EXIT_OK


def _policy_and_product(args):
    doc = json.loads(Path(args.policy).read_text())
    m = load_model(args.model)
    if args.dra or args.task:
        d, _ = _load_dra(args)
    elif "dra" in doc:
        d = parse_dra(doc["dra"])
    else:
        raise InputError("policy file carries no automaton; give --dra or --task")
    p = build_product(m, d)
    if doc.get("fingerprint") != product_fingerprint(p):
        raise InputError("policy does not belong to this model/automaton (fingerprint mismatch)")
    return policy_from_dict(doc, p)


def cmd_simulate(args) -> int:
    pol = _policy_and_product(args)
    stats = run_monte_carlo(pol, args.runs, args.steps, args.seed, baseline=args.baseline)
    doc = {"format_version": FORMAT_VERSION, "fingerprint": product_fingerprint(pol.product), **stats.to_dict()}
    hist = cyclic_cost_histogram(stats, args.bins)
    doc["histogram_empty"] = hist["empty"]
    if pol.mode == "relaxed":
        doc["risk_bound"] = risk_bound_check(stats, pol.diagnostics["prefix_risk"], pol.diagnostics["gamma_sufx"], 5)
    _write(args.output, dumps_json(doc))
    if args.histogram and not hist["empty"]:
        Path(args.histogram).write_text(histogram_csv(hist))
    if args.trace:
        with open(args.trace, "w") as fh:
            simulate_run(pol, args.steps, args.seed, 0, baseline=args.baseline, log_to=fh)
    return EXIT_OK


def cmd_inspect(args) -> int:
    m = load_model(args.model)
    d, src = _load_dra(args)
    p = build_product(m, d, full=args.full)
    amecs = compute_amecs(p)
    asccs = compute_asccs(p)
    comps = amecs or asccs
    goal = set().union(*(c.states for c in comps)) if comps else set()
    if args.empty_goal:
        goal = set()
    part = partition_states(p, goal)
    doc = {
        "format_version": FORMAT_VERSION,
        "model": {"states": m.num_states, "edges": m.num_edges(), "fingerprint": m.fingerprint()},
        "dra": {"source": src, "states": d.num_states, "edges": d.num_edges(), "pairs": len(d.pairs)},
        "product": {
            "states": p.num_states,
            "transitions": p.num_transitions(),
            "state_action_transitions": p.num_sa_transitions(),
            "fingerprint": product_fingerprint(p),
        },
        "amecs": [len(c.states) for c in amecs],
        "asccs": [len(c.states) for c in asccs],
        "partition": {
            "normal": len(part.s_normal),
            "goal": len(part.s_goal),
            "bad": len(part.s_bad),
            "unreachable": len(part.s_unreach),
        },
    }
    _write(args.output, dumps_json(doc))
    if args.export:
        out = Path(args.export_dir)
        out.mkdir(parents=True, exist_ok=True)
        for kind in args.export:
            if kind == "dot":
                (out / "product.dot").write_text(to_dot(p, part, comps))
            elif kind == "prism":
                (out / "product.prism").write_text(to_prism(p, part, comps))
            else:
                raise InputError("--export lp needs a synthesis run; use it with `synth`")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_dra(sp):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--dra", help="automaton file (ltl2dstar v2 explicit format)")
    g.add_argument("--task", choices=FIXTURES, help="shipped automaton fixture")


def _add_export(sp, choices):
    sp.add_argument("--export", action="append", choices=choices, help="write an export file (repeatable)")
    sp.add_argument("--export-dir", default=".", help="directory for export files")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ltlplan", description="Policy synthesis for probabilistically-labelled MDPs under LTL tasks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-grid", help="write a grid-world model")
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--width", type=_positive(int))
    g.add_argument("--height", type=_positive(int))
    g.add_argument("--boundary", choices=("stay", "renormalize"), default="stay")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen_grid)

    s = sub.add_parser("synth", help="synthesize a complete policy")
    s.add_argument("--model", required=True)
    _add_dra(s)
    s.add_argument("--gamma", type=_unit("gamma"), default=0.0)
    s.add_argument("--beta", type=_unit("beta"), default=0.5)
    s.add_argument("--penalty-d", type=_positive(float), default=300.0)
    s.add_argument("-o", "--output", required=True, help="policy JSON")
    s.add_argument("--report", default="-", help="report JSON (default stdout)")
    s.add_argument("--timings", action="store_true", help="add wall-clock stage timings to the report")
    _add_export(s, ("dot", "prism", "lp"))
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("simulate", help="Monte Carlo evaluation of a policy")
    m.add_argument("--model", required=True)
    m.add_argument("--policy", required=True)
    _add_dra(m)
    m.add_argument("--runs", type=_positive(int), default=1000)
    m.add_argument("--steps", type=_positive(int), default=500)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--baseline", choices=("round-robin",))
    m.add_argument("--bins", type=_positive(int), default=30)
    m.add_argument("--histogram", help="CSV of accepting-cycle costs")
    m.add_argument("--trace", help="line-delimited trace of run 0")
    m.add_argument("-o", "--output", default="-")
    m.set_defaults(func=cmd_simulate)

    i = sub.add_parser("inspect", help="sizes, components and exports of a product")
    i.add_argument("--model", required=True)
    _add_dra(i)
    i.add_argument("--full", action="store_true", help="keep unreachable label-positive states")
    i.add_argument("--empty-goal", action="store_true", help="partition with an empty goal set")
    i.add_argument("-o", "--output", default="-")
    _add_export(i, ("dot", "prism", "lp"))
    i.set_defaults(func=cmd_inspect)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, DraParseError, OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        sys.stderr.write(f"ltlplan: error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
