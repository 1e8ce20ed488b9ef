"""Compare the jitted and numpy Monte Carlo kernels.

    python benchmarks/bench_sim.py [--runs 1000] [--steps 500] [--repeat 3]

The numba side is timed after a warm-up call so compilation is reported
separately. Both backends must produce identical per-run records; the script
exits non-zero if they do not. A second section times the full synthesis
pipeline (product, SCCs, LP) in a subprocess with LTLPLAN_DISABLE_NUMBA=1.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ltlplan._accel import NUMBA_ENABLED
from ltlplan.dra import load_fixture
from ltlplan.grid import build_grid_model, preset_config
from ltlplan.product import build_product
from ltlplan.sim import run_monte_carlo
from ltlplan.synthesis import synthesize

CASES = [
    ("surveillance", "surveillance", None),
    ("surveillance", "surveillance", "round-robin"),
    ("ordered", "ordered", None),
    ("clustered", "surveillance", None),
]

PIPELINE = (
    "import time; t = time.perf_counter();"
    "from ltlplan.dra import load_fixture; from ltlplan.grid import build_grid_model, preset_config;"
    "from ltlplan.product import build_product; from ltlplan.synthesis import synthesize;"
    "p = build_product(build_grid_model(preset_config('delivery')), load_fixture('delivery'));"
    "t0 = time.perf_counter(); synthesize(p, 0.0, 0.5); print(time.perf_counter() - t0)"
)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def pipeline_seconds(disable):
    env = dict(os.environ)
    if disable:
        env["LTLPLAN_DISABLE_NUMBA"] = "1"
    else:
        env.pop("LTLPLAN_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not NUMBA_ENABLED:
        sys.exit("numba is disabled in this process; unset LTLPLAN_DISABLE_NUMBA")

    print(f"Monte Carlo, {args.runs} runs x {args.steps} steps (best of {args.repeat})")
    print(f"{'case':40s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s}  match")
    mismatch = False
    first = True
    for preset, task, baseline in CASES:
        pol = synthesize(build_product(build_grid_model(preset_config(preset)), load_fixture(task)))
        if first:
            t0 = time.perf_counter()
            run_monte_carlo(pol, 2, 2, backend="numba")
            print(f"(numba warm-up incl. compile or cache load: {time.perf_counter() - t0:.2f} s)")
            first = False
        tn, a = best_of(lambda: run_monte_carlo(pol, args.runs, args.steps, 0, baseline, "numba"), args.repeat)
        tp, b = best_of(lambda: run_monte_carlo(pol, args.runs, args.steps, 0, baseline, "numpy"), args.repeat)
        same = np.array_equal(a.ints, b.ints) and np.allclose(a.floats, b.floats, rtol=0, atol=1e-9)
        mismatch |= not same
        name = f"{preset}/{task}" + (f" {baseline}" if baseline else "")
        print(f"{name:40s} {tn:9.3f} {tp:9.3f} {tp / tn:7.1f}x  {'yes' if same else 'NO'}")

    print("\nsynthesis of the delivery task (fresh process, excludes imports)")
    print(f"  numba enabled : {pipeline_seconds(False):.3f} s")
    print(f"  numba disabled: {pipeline_seconds(True):.3f} s")
    sys.exit(1 if mismatch else 0)


if __name__ == "__main__":
    main()
