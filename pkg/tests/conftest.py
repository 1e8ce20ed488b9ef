import functools

import pytest

from ltlplan.dra import load_fixture
from ltlplan.grid import build_grid_model, preset_config, toy_model
from ltlplan.model import make_mdp
from ltlplan.product import build_product
from ltlplan.synthesis import synthesize


@functools.lru_cache(maxsize=None)
def grid(preset):
    return build_grid_model(preset_config(preset))


@functools.lru_cache(maxsize=None)
def product(preset, task, full=False):
    m = toy_model() if preset == "toy" else grid(preset)
    return build_product(m, load_fixture(task), full=full)


@functools.lru_cache(maxsize=None)
def policy(preset, task, gamma=0.0, beta=0.5, d=300.0):
    return synthesize(product(preset, task), gamma, beta, d)


def chain_model(c_a=1.0, c_b=2.0):
    """s0 -> goal under a (cost c_a) or b (cost c_b); goal loops on a."""
    return make_mdp(
        states=["s0", "g"],
        actions=["a", "b"],
        transitions=[("s0", "a", "g", 1.0), ("s0", "b", "g", 1.0), ("g", "a", "g", 1.0)],
        costs={("s0", "a"): c_a, ("s0", "b"): c_b, ("g", "a"): 1.0},
        ap=["b", "obs"],
        labels={"s0": [((), 1.0)], "g": [(("b",), 1.0)]},
        initial=("s0", ()),
    )


def gamble_model(p_safe=0.5):
    """One risky action: reach the base with p_safe or an absorbing obstacle."""
    return make_mdp(
        states=["s0", "g", "x"],
        actions=["a"],
        transitions=[("s0", "a", "g", p_safe), ("s0", "a", "x", 1 - p_safe), ("g", "a", "g", 1.0), ("x", "a", "x", 1.0)],
        costs={("s0", "a"): 1.0, ("g", "a"): 1.0, ("x", "a"): 1.0},
        ap=["b", "obs"],
        labels={"s0": [((), 1.0)], "g": [(("b",), 1.0)], "x": [(("obs",), 1.0)]},
        initial=("s0", ()),
    )


@pytest.fixture
def toy_product():
    return product("toy", "toy")


# An 11-state graph with the reachability structure of the partition example:
# s4 and s9 only lead into the graph, s1 and s3 form a dead end, and the
# goal states split into the loops {5, 6, 10} and {7, 8}.
EXAMPLE1_EDGES = [
    (0, 1), (0, 2), (1, 3), (3, 3), (3, 1),
    (2, 0), (2, 5), (2, 7),
    (5, 6), (6, 10), (10, 5), (7, 8), (8, 7),
    (4, 0), (4, 9), (9, 8),
]
EXAMPLE1_GOAL = {5, 6, 7, 8, 10}
