import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import max_reach_vi, random_case, ssp_vi
from ltlplan.lp import solve
from ltlplan.synthesis import build_max_reach_program, build_prefix_program


def check_case(p, part, tol=1e-5):
    s0 = p.initial
    best = max_reach_vi(p, part)[s0]
    mr = build_max_reach_program(p, part)
    sol = solve(mr.lp)
    assert sol.ok
    assert mr.reach.value(sol.x) == pytest.approx(best, abs=tol)
    # at the risk boundary the constrained program is feasible and tight
    pre = build_prefix_program(p, part, min(1.0, 1.0 - best + 1e-9))
    sol = solve(pre.lp)
    assert sol.ok
    assert pre.reach.value(sol.x) == pytest.approx(best, abs=tol)
    # with gamma = 1 the program is the plain shortest-path problem
    free = build_prefix_program(p, part, 1.0)
    sol = solve(free.lp)
    assert sol.ok
    assert sol.objective == pytest.approx(ssp_vi(p, part)[s0], abs=tol)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lp_matches_value_iteration(seed):
    p, part = random_case(np.random.default_rng(seed))
    check_case(p, part)


def test_lp_matches_value_iteration_larger():
    rng = np.random.default_rng(7)
    for _ in range(10):
        p, part = random_case(rng, max_states=8, max_actions=3)
        check_case(p, part)
