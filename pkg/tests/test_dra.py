import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlplan.dra import (
    FIXTURES,
    AcceptanceIndexError,
    Dra,
    DraParseError,
    MissingHeaderError,
    StateCountError,
    TruncatedTableError,
    dump_dra,
    guard_letters,
    label_distance,
    load_fixture,
    parse_dra,
)

SINGLE = """DRA v2 explicit
States: 1
Acceptance-Pairs: 1
Start: 0
AP: 1 "p"
---
State: 0
Acc-Sig: +0
0
0
"""


def test_toy_fixture_shape():
    d = load_fixture("toy")
    assert d.num_states == 3
    assert len(d.pairs) == 1
    H, I = d.pairs[0]
    assert H == {2} and I <= {0, 1} and I


def test_ordered_fixture_matches_published_size():
    d = load_fixture("ordered")
    assert d.num_states == 7
    assert d.num_edges() == 24
    assert len(d.pairs) == 1


@pytest.mark.parametrize("name,states,edges", [("surveillance", 6, 23), ("delivery", 10, 49), ("reach_stay", 3, 7)])
def test_other_fixture_sizes(name, states, edges):
    d = load_fixture(name)
    assert (d.num_states, d.num_edges()) == (states, edges)


def test_single_state_automaton():
    d = parse_dra(SINGLE)
    assert d.delta.shape == (1, 2)
    assert (d.delta == 0).all()
    assert d.pairs == ((frozenset(), frozenset({0})),)
    assert guard_letters(d, 0, 0) == {0, 1}


def test_toy_guards():
    d = load_fixture("toy")
    obs = 1 << d.ap.index("obs")
    assert guard_letters(d, 0, 2) == {l for l in range(4) if l & obs}
    assert guard_letters(d, 2, 0) == frozenset()
    with pytest.raises(KeyError):
        guard_letters(d, 0, 7)


def test_comment_and_blank_lines_ignored():
    text = "# produced by hand\n\n" + SINGLE.replace("---", 'Comment: "x"\n---')
    assert parse_dra(text) == parse_dra(SINGLE)


@pytest.mark.parametrize(
    "text,exc",
    [
        ("States: 1\n", MissingHeaderError),
        (SINGLE.replace("Start: 0\n", ""), MissingHeaderError),
        (SINGLE.rstrip().rsplit("\n", 1)[0], TruncatedTableError),
        (SINGLE.replace("States: 1", "States: 2"), StateCountError),
        (SINGLE.replace("+0", "+3"), AcceptanceIndexError),
    ],
)
def test_parse_errors_are_distinct(text, exc):
    with pytest.raises(exc) as info:
        parse_dra(text)
    assert isinstance(info.value, DraParseError)
    assert info.value.line >= 1


def test_error_reports_line_number():
    bad = SINGLE.replace("+0", "+3")
    with pytest.raises(AcceptanceIndexError) as info:
        parse_dra(bad)
    assert info.value.line == bad.splitlines().index("Acc-Sig: +3") + 1


def test_sign_convention():
    d = parse_dra(SINGLE.replace("+0", "-0"))
    assert d.pairs[0] == (frozenset({0}), frozenset())


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip(name):
    d = load_fixture(name)
    assert parse_dra(dump_dra(d)) == d


@st.composite
def random_dra(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(0, 3))
    k = draw(st.integers(1, 2))
    delta = np.array(draw(st.lists(st.lists(st.integers(0, n - 1), min_size=1 << m, max_size=1 << m), min_size=n, max_size=n)))
    pairs = []
    for _ in range(k):
        h = draw(st.frozensets(st.integers(0, n - 1)))
        i = draw(st.frozensets(st.integers(0, n - 1)))
        pairs.append((h, i))
    ap = tuple(f"a{j}" for j in range(m))
    return Dra(ap=ap, start=draw(st.integers(0, n - 1)), delta=delta.reshape(n, 1 << m), pairs=tuple(pairs))


@settings(max_examples=60, deadline=None)
@given(random_dra())
def test_round_trip_property(d):
    assert parse_dra(dump_dra(d)) == d


@settings(max_examples=60, deadline=None)
@given(random_dra())
def test_guards_partition_letters(d):
    for q in range(d.num_states):
        seen = []
        for q2 in range(d.num_states):
            seen.extend(guard_letters(d, q, q2))
        assert sorted(seen) == list(range(d.num_letters))


def test_label_distance():
    # letters over (obs, b): bit 0 = obs, bit 1 = b
    obs, b = 1, 2
    assert label_distance(b, {b}) == 0
    assert label_distance(obs | b, {b}) == 1
    assert label_distance(obs | b, {0, obs}) == 1
    assert label_distance(0, {b}) == 0  # nothing extra in l
    assert label_distance(obs, set()) >= 1 << 20


def test_letter_ignores_unknown_names():
    d = load_fixture("toy")
    assert d.letter(["b", "Spl"]) == d.letter(["b"])
