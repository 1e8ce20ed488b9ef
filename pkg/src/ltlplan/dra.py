"""Deterministic Rabin automata in the ltl2dstar v2 explicit format."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Iterable

import numpy as np


class DraParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class MissingHeaderError(DraParseError):
    pass


class TruncatedTableError(DraParseError):
    pass


class StateCountError(DraParseError):
    pass


class AcceptanceIndexError(DraParseError):
    pass


@dataclass(frozen=True, eq=False)
class Dra:
    """Total deterministic Rabin automaton.

    ``delta[q, letter]`` is the successor, where bit ``j`` of ``letter`` is set
    iff ``ap[j]`` holds. ``pairs[i] = (H_i, I_i)``.
    """

    ap: tuple[str, ...]
    start: int
    delta: np.ndarray
    pairs: tuple[tuple[frozenset, frozenset], ...]
    comment: str = ""

    @property
    def num_states(self) -> int:
        return int(self.delta.shape[0])

    @property
    def num_letters(self) -> int:
        return int(self.delta.shape[1])

    def step(self, q: int, letter: int) -> int:
        return int(self.delta[q, letter])

    def letter(self, props: Iterable[str]) -> int:
        """Bitmask of the given proposition names; names not in AP are ignored."""
        out = 0
        for a in props:
            if a in self._index:
                out |= 1 << self._index[a]
        return out

    def props(self, letter: int) -> frozenset:
        return frozenset(a for j, a in enumerate(self.ap) if letter >> j & 1)

    def post(self, q: int) -> tuple[int, ...]:
        return tuple(sorted(set(int(v) for v in self.delta[q])))

    def num_edges(self) -> int:
        """Number of (q, q') pairs with a nonempty guard."""
        return sum(len(set(row.tolist())) for row in self.delta)

    @cached_property
    def _index(self) -> dict:
        return {a: j for j, a in enumerate(self.ap)}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dra)
            and self.ap == other.ap
            and self.start == other.start
            and self.pairs == other.pairs
            and np.array_equal(self.delta, other.delta)
        )

    __hash__ = None


def guard_letters(d: Dra, q: int, q_next: int) -> frozenset:
    """chi(q, q'): letters driving q to q'."""
    n = d.num_states
    if not (0 <= q < n) or not (0 <= q_next < n):
        raise KeyError(f"unknown automaton state {q if not 0 <= q < n else q_next}")
    return frozenset(int(k) for k in np.flatnonzero(d.delta[q] == q_next))


def label_distance(letter: int, guard: Iterable[int]) -> int:
    """D(l, chi): 0 if l is in chi, else min over l' in chi of |l minus l'|.

    Returns a large sentinel for an empty guard.
    """
    best = 1 << 30
    for g in guard:
        if g == letter:
            return 0
        extra = bin(letter & ~g).count("1")
        if extra < best:
            best = extra
    return best


_HDR = {"States", "Acceptance-Pairs", "Start", "AP"}


def parse_dra(text: str) -> Dra:
    lines = text.splitlines()
    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines):
            raw = lines[pos].strip()
            pos += 1
            if raw and not raw.startswith("#") and not raw.startswith("Comment:"):
                return raw
        return None

    first = next_line()
    if first is None or not re.fullmatch(r"DRA\s+v2\s+explicit", first):
        raise MissingHeaderError(pos, "expected header 'DRA v2 explicit'")
    header: dict[str, str] = {}
    while True:
        line = next_line()
        if line is None:
            raise MissingHeaderError(pos, "missing '---' separator")
        if line == "---":
            break
        key, _, val = line.partition(":")
        if key not in _HDR:
            raise MissingHeaderError(pos, f"unexpected header line {line!r}")
        header[key] = val.strip()
    for key in ("States", "Acceptance-Pairs", "Start", "AP"):
        if key not in header:
            raise MissingHeaderError(pos, f"missing header field {key!r}")
    try:
        n = int(header["States"])
        k = int(header["Acceptance-Pairs"])
        start = int(header["Start"])
        ap_count_txt, _, ap_rest = header["AP"].partition(" ")
        m = int(ap_count_txt)
    except ValueError:
        raise MissingHeaderError(pos, "non-integer header value") from None
    ap = tuple(re.findall(r'"([^"]*)"', ap_rest))
    if len(ap) != m:
        raise MissingHeaderError(pos, f"AP declares {m} names, found {len(ap)}")
    if not 0 <= start < n:
        raise StateCountError(pos, f"start state {start} out of range")
    if k < 1:
        raise AcceptanceIndexError(pos, "at least one acceptance pair required")
    letters = 1 << m
    delta = np.full((n, letters), -1, dtype=np.int64)
    H = [set() for _ in range(k)]
    I = [set() for _ in range(k)]
    seen = 0
    while True:
        line = next_line()
        if line is None:
            break
        mobj = re.fullmatch(r'State:\s*(\d+)(?:\s+"[^"]*")?', line)
        if not mobj:
            raise DraParseError(pos, f"expected 'State:' line, got {line!r}")
        q = int(mobj.group(1))
        if q != seen:
            raise StateCountError(pos, f"expected state {seen}, found {q}")
        if q >= n:
            raise StateCountError(pos, f"more state blocks than declared ({n})")
        acc = next_line()
        if acc is None or not acc.startswith("Acc-Sig:"):
            raise TruncatedTableError(pos, f"state {q}: missing Acc-Sig line")
        for tok in acc[len("Acc-Sig:"):].split():
            if not re.fullmatch(r"[+-]\d+", tok):
                raise DraParseError(pos, f"bad acceptance token {tok!r}")
            idx = int(tok[1:])
            if idx >= k:
                raise AcceptanceIndexError(pos, f"acceptance index {idx} out of range (pairs: {k})")
            (I if tok[0] == "+" else H)[idx].add(q)
        for letter in range(letters):
            tline = next_line()
            if tline is None or not tline.isdigit():
                raise TruncatedTableError(pos, f"state {q}: expected {letters} successor lines, got {letter}")
            target = int(tline)
            if target >= n:
                raise StateCountError(pos, f"successor {target} out of range")
            delta[q, letter] = target
        seen += 1
    if seen != n:
        raise StateCountError(pos, f"declared {n} states, found {seen}")
    pairs = tuple((frozenset(H[i]), frozenset(I[i])) for i in range(k))
    return Dra(ap=ap, start=start, delta=delta, pairs=pairs)


def dump_dra(d: Dra, comment: str = "") -> str:
    out = ["DRA v2 explicit"]
    if comment:
        out.append(f'Comment: "{comment}"')
    out.append(f"States: {d.num_states}")
    out.append(f"Acceptance-Pairs: {len(d.pairs)}")
    out.append(f"Start: {d.start}")
    out.append(f"AP: {len(d.ap)} " + " ".join(f'"{a}"' for a in d.ap))
    out.append("---")
    for q in range(d.num_states):
        out.append(f"State: {q}")
        sig = []
        for i, (h, inf) in enumerate(d.pairs):
            if q in inf:
                sig.append(f"+{i}")
            if q in h:
                sig.append(f"-{i}")
        out.append("Acc-Sig: " + " ".join(sig) if sig else "Acc-Sig:")
        out.extend(str(int(v)) for v in d.delta[q])
    return "\n".join(out) + "\n"


def load_dra(path) -> Dra:
    with open(path) as fh:
        return parse_dra(fh.read())


FIXTURES = ("toy", "ordered", "surveillance", "delivery", "reach_stay")


def fixture_text(name: str) -> str:
    """Text of a shipped automaton (see ``scripts/make_fixtures.py``)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("ltlplan.data").joinpath(f"{name}.dra").read_text()


def load_fixture(name: str) -> Dra:
    return parse_dra(fixture_text(name))
