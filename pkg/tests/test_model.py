import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlplan.grid import ACTIONS, GridConfig, build_grid_model, cell_of, preset_config, toy_model
from ltlplan.model import (
    Mdp,
    ModelError,
    RunTrace,
    load_model,
    make_mdp,
    mean_total_cost,
    model_from_dict,
    model_to_dict,
    save_model,
    validate_model,
)

from conftest import grid


def test_toy_model_is_valid():
    assert validate_model(toy_model()) == []


def _two_state(prob=1.0, cost=1.0):
    return make_mdp(
        ["A", "B"], ["f"],
        [("A", "f", "B", prob), ("B", "f", "A", 1.0)],
        {("A", "f"): cost, ("B", "f"): 1.0},
        ["b"], {"A": [((), 1.0)], "B": [(("b",), 1.0)]}, ("A", ()),
    )


def test_row_summing_to_point_nine_is_reported():
    errs = validate_model(_two_state(prob=0.9))
    assert len(errs) == 1
    assert "A" in errs[0] and "f" in errs[0]


def test_zero_cost_is_reported():
    errs = validate_model(_two_state(cost=0.0))
    assert len(errs) == 1 and "cost" in errs[0]


def test_initial_label_must_be_listed():
    m = make_mdp(["A"], ["f"], [("A", "f", "A", 1.0)], {("A", "f"): 1.0}, ["b"], {"A": [((), 1.0)]}, ("A", ("b",)))
    assert any("initial" in e for e in validate_model(m))


def test_zero_probability_label_is_reported():
    m = make_mdp(["A"], ["f"], [("A", "f", "A", 1.0)], {("A", "f"): 1.0}, ["b"],
                 {"A": [((), 1.0), (("b",), 0.0)]}, ("A", ()))
    assert validate_model(m)


@pytest.mark.parametrize("preset,states,edges", [("surveillance", 100, 816), ("lab", 60, 456), ("single", 4, 4)])
def test_grid_sizes(preset, states, edges):
    m = grid(preset)
    assert m.num_states == states
    assert m.num_edges() == edges


def test_single_cell_grid_only_self_loops():
    m = grid("single")
    for x in range(m.num_states):
        assert m.allowed(x) == (m.actions.index("ST"),)
        assert m.trans[(x, 0)] == ((x, 1.0),)


def test_grid_is_deterministic():
    a = build_grid_model(preset_config("clustered"))
    b = build_grid_model(preset_config("clustered"))
    assert a == b and a.states == b.states


def test_branching_factor_away_from_boundary():
    m = grid("surveillance")
    for x, name in enumerate(m.states):
        i, j, _ = cell_of(name)
        interior = 1 <= i <= 3 and 1 <= j <= 3
        for u in m.allowed(x):
            row = m.trans[(x, u)]
            assert abs(sum(p for _, p in row) - 1) < 1e-9
            want = 1 if m.actions[u] == "ST" else 3
            if interior or m.actions[u] in ("TR", "TL", "ST"):
                assert len(row) == want


def test_forward_probabilities():
    m = grid("surveillance")
    x = m.state_index("c2_2_N")
    u = m.action_index("FR")
    got = {m.states[y]: p for y, p in m.trans[(x, u)]}
    assert got == pytest.approx({"c2_3_N": 0.8, "c1_3_N": 0.1, "c3_3_N": 0.1})


def test_turn_outcomes():
    m = grid("surveillance")
    x = m.state_index("c2_2_N")
    got = {m.states[y]: p for y, p in m.trans[(x, m.action_index("TR"))]}
    assert got == pytest.approx({"c2_2_E": 0.9, "c2_2_N": 0.05, "c2_2_S": 0.05})


def test_boundary_mass_stays_in_cell():
    m = grid("surveillance")
    x = m.state_index("c0_0_S")
    got = {m.states[y]: p for y, p in m.trans[(x, m.action_index("FR"))]}
    assert got == pytest.approx({"c0_0_S": 1.0})


def test_renormalized_boundary():
    m = grid("delivery")
    x = m.state_index("c0_0_S")
    got = {m.states[y]: p for y, p in m.trans[(x, m.action_index("FR"))]}
    assert got == pytest.approx({"c0_0_S": 1.0})  # nothing stays inside: robot stays
    x = m.state_index("c0_2_N")
    got = {m.states[y]: p for y, p in m.trans[(x, m.action_index("FR"))]}
    assert got == pytest.approx({"c0_3_N": 0.8 / 0.9, "c1_3_N": 0.1 / 0.9})


def test_grid_rejects_bad_tables():
    with pytest.raises(ModelError):
        build_grid_model(GridConfig(2, 2, move_probs=(0.8, 0.1, 0.05)))
    with pytest.raises(ModelError):
        build_grid_model(GridConfig(2, 2, labels={(0, 0): ()}))
    with pytest.raises(ModelError):
        build_grid_model(GridConfig(0, 2))


def test_preset_labels():
    m = grid("surveillance")
    assert m.label_prob(m.state_index("c2_0_N"), ["Obs"]) == pytest.approx(0.7)
    assert m.label_prob(m.state_index("c2_4_E"), ["Spl"]) == pytest.approx(0.8)
    assert m.label_prob(m.state_index("c4_0_W"), ["b3"]) == 1.0
    c = grid("clustered")
    assert c.label_prob(c.state_index("c2_2_N"), ["Obs"]) == pytest.approx(0.9)
    assert c.label_prob(c.state_index("c1_2_N"), ["Obs"]) == pytest.approx(0.01)


def _trace(m, actions):
    tr = RunTrace()
    x = m.initial[0]
    for name in actions:
        tr.append(x, (), m.action_index(name))
    return tr


def test_mean_total_cost_alternating():
    m = grid("surveillance")
    x = m.state_index("c2_2_N")
    tr = RunTrace()
    for a in ["FR", "TR", "FR", "TR", "FR"]:
        tr.append(x, (), m.action_index(a))
    assert mean_total_cost(m, tr, 4) == pytest.approx(3.0)


def test_mean_total_cost_constant_run():
    # n + 1 unit-cost terms divided by n
    m = grid("single")
    tr = _trace(m, ["ST"] * 10)
    for n in range(1, 10):
        assert mean_total_cost(m, tr, n) == pytest.approx((n + 1) / n)


def test_mean_total_cost_errors():
    m = grid("single")
    tr = _trace(m, ["ST"] * 3)
    with pytest.raises(ModelError):
        mean_total_cost(m, tr, 3)
    with pytest.raises(ModelError):
        mean_total_cost(m, tr, 0)
    bad = RunTrace()
    bad.append(0, (), -1)
    bad.append(0, (), -1)
    with pytest.raises(ModelError):
        mean_total_cost(m, bad, 1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(ACTIONS), min_size=3, max_size=12), st.floats(0.1, 10))
def test_mean_total_cost_scales_linearly(acts, scale):
    m = grid("surveillance")
    costs = {k: v * scale for k, v in m.cost.items()}
    m2 = Mdp(m.states, m.actions, m.trans, costs, m.ap, m.labels, m.initial)
    x = m.state_index("c2_2_N")
    tr = RunTrace()
    for a in acts:
        tr.append(x, (), m.action_index(a))
    n = len(acts) - 1
    assert mean_total_cost(m2, tr, n) == pytest.approx(scale * mean_total_cost(m, tr, n))
    longer = RunTrace(list(tr.steps) + [(x, frozenset(), m.action_index("BK"))] * 3)
    assert mean_total_cost(m, longer, n) == mean_total_cost(m, tr, n)


def test_json_round_trip(tmp_path):
    m = grid("delivery")
    path = tmp_path / "m.json"
    save_model(m, path)
    assert load_model(path) == m
    doc = json.loads(path.read_text())
    assert set(doc) == {"format_version", "ap", "states", "actions", "transitions", "costs", "initial"}
    assert set(doc["states"][0]) == {"id", "labels"}
    assert set(doc["states"][0]["labels"][0]) == {"subset", "prob"}
    assert set(doc["transitions"][0]) == {"from", "action", "to", "prob"}


def test_model_file_errors(tmp_path):
    doc = model_to_dict(toy_model())
    doc["transitions"][0]["prob"] = 0.5
    with pytest.raises(ModelError):
        model_from_dict(doc)
    with pytest.raises(ModelError):
        model_from_dict({"states": []})
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    with pytest.raises(ModelError):
        load_model(bad)
