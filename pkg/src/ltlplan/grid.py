"""Grid-world unicycle abstraction and the workspace presets.

Cells are addressed by integer ``(i, j)`` with ``i`` the column (east) and
``j`` the row (north). A state is a cell plus a heading in N, E, S, W.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import PROB_TOL, Mdp, ModelError, check_model, make_mdp

HEADINGS = ("N", "E", "S", "W")
_STEP = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}

ACTIONS = ("FR", "BK", "TR", "TL", "ST")
DEFAULT_COSTS = {"FR": 2.0, "BK": 4.0, "TR": 3.0, "TL": 3.0, "ST": 1.0}

# (intended, drift-left, drift-right) for FR/BK; (turn, undershoot, overshoot) for TR/TL
DEFAULT_MOVE_PROBS = (0.8, 0.1, 0.1)
DEFAULT_TURN_PROBS = (0.9, 0.05, 0.05)

LabelDist = Sequence[tuple[Sequence[str], float]]


@dataclass(frozen=True)
class GridConfig:
    width: int
    height: int
    labels: Mapping[tuple[int, int], LabelDist] = field(default_factory=dict)
    ap: Sequence[str] = ()
    actions: Sequence[str] = ACTIONS
    costs: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_COSTS))
    move_probs: tuple[float, float, float] = DEFAULT_MOVE_PROBS
    turn_probs: tuple[float, float, float] = DEFAULT_TURN_PROBS
    start: tuple[int, int, str] = (0, 0, "N")
    cell_size: float = 2.0
    boundary: str = "stay"


def state_name(i: int, j: int, h: str) -> str:
    return f"c{i}_{j}_{h}"


def cell_of(name: str) -> tuple[int, int, str]:
    body, h = name[1:].rsplit("_", 1)
    i, j = body.split("_")
    return int(i), int(j), h


def _rotate(h: str, quarter_turns: int) -> str:
    return HEADINGS[(HEADINGS.index(h) + quarter_turns) % 4]


def _check_dist(name: str, probs: Sequence[float]) -> None:
    if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > PROB_TOL:
        raise ModelError(f"{name} probabilities {tuple(probs)} do not form a distribution")


def build_grid_model(cfg: GridConfig) -> Mdp:
    """Discrete unicycle model on a ``width x height`` grid.

    FR/BK reach the cell ahead/behind with the first probability and drift
    diagonally (to the cell ahead-left/ahead-right, or behind-left/right) with
    the other two, keeping the heading. TR/TL rotate a quarter turn, or not at
    all (undershoot), or a half turn (overshoot). ST stays put. Probability mass
    that would leave the grid stays in the current cell with the intended
    final heading (``boundary="stay"``). With ``boundary="renormalize"`` that
    mass is spread over the in-grid outcomes instead, falling back to staying
    put when every outcome leaves the grid.
    """
    if cfg.boundary not in ("stay", "renormalize"):
        raise ModelError(f"unknown boundary rule {cfg.boundary!r}")
    if cfg.width < 1 or cfg.height < 1:
        raise ModelError(f"invalid grid dimensions {cfg.width}x{cfg.height}")
    _check_dist("move", cfg.move_probs)
    _check_dist("turn", cfg.turn_probs)
    unknown = set(cfg.actions) - set(ACTIONS)
    if unknown:
        raise ModelError(f"unknown action primitives {sorted(unknown)}")
    for a in cfg.actions:
        if a not in cfg.costs:
            raise ModelError(f"no cost for action {a}")
    for cell, dist in cfg.labels.items():
        if not (0 <= cell[0] < cfg.width and 0 <= cell[1] < cfg.height):
            raise ModelError(f"labelled cell {cell} outside the grid")
        if not dist:
            raise ModelError(f"cell {cell} has an empty label set")
        _check_dist(f"label of cell {cell}", [p for _, p in dist])

    W, H = cfg.width, cfg.height
    states = [state_name(i, j, h) for i in range(W) for j in range(H) for h in HEADINGS]
    actions = [a for a in ACTIONS if a in cfg.actions]

    def inside(i, j):
        return 0 <= i < W and 0 <= j < H

    transitions = []
    costs = {}
    p_move, p_left, p_right = cfg.move_probs
    p_turn, p_under, p_over = cfg.turn_probs
    for i in range(W):
        for j in range(H):
            for h in HEADINGS:
                src = state_name(i, j, h)
                for a in actions:
                    outcomes: list[tuple[int, int, str, float]] = []
                    if a in ("FR", "BK"):
                        dx, dy = _STEP[h]
                        if a == "BK":
                            dx, dy = -dx, -dy
                        lx, ly = -_STEP[h][1], _STEP[h][0]  # robot's left
                        lost = 0.0
                        for (ox, oy), p in (((0, 0), p_move), ((lx, ly), p_left), ((-lx, -ly), p_right)):
                            ni, nj = i + dx + ox, j + dy + oy
                            if inside(ni, nj):
                                outcomes.append((ni, nj, h, p))
                            elif cfg.boundary == "stay":
                                outcomes.append((i, j, h, p))
                            else:
                                lost += p
                        if lost > 0:
                            kept = 1.0 - lost
                            if kept > PROB_TOL:
                                outcomes = [(oi, oj, oh, op / kept) for oi, oj, oh, op in outcomes]
                            else:
                                outcomes = [(i, j, h, 1.0)]
                    elif a in ("TR", "TL"):
                        sign = 1 if a == "TR" else -1
                        target = _rotate(h, sign)
                        outcomes = [(i, j, target, p_turn), (i, j, h, p_under), (i, j, _rotate(h, 2), p_over)]
                    else:
                        outcomes = [(i, j, h, 1.0)]
                    for ni, nj, nh, p in outcomes:
                        if p > 0:
                            transitions.append((src, a, state_name(ni, nj, nh), p))
                    costs[(src, a)] = cfg.costs[a]

    ap = list(cfg.ap)
    for dist in cfg.labels.values():
        for lab, _ in dist:
            for a in lab:
                if a not in ap:
                    ap.append(a)
    labels = {}
    for i in range(W):
        for j in range(H):
            dist = cfg.labels.get((i, j), (((), 1.0),))
            for h in HEADINGS:
                labels[state_name(i, j, h)] = [(tuple(lab), p) for lab, p in dist]
    si, sj, sh = cfg.start
    if not inside(si, sj) or sh not in HEADINGS:
        raise ModelError(f"invalid start {cfg.start}")
    start_dist = cfg.labels.get((si, sj), (((), 1.0),))
    l0 = max(start_dist, key=lambda lp: lp[1])[0]
    return check_model(make_mdp(states, actions, transitions, costs, ap, labels, (state_name(si, sj, sh), l0)))


# --- presets ----------------------------------------------------------------
# 5x5 workspace of 2 m cells; cell (i, j) is centred at (2i+1, 2j+1) metres.
# Bases sit in three corners and the robot starts in the fourth.

SURVEILLANCE_AP = ("Obs", "b1", "b2", "b3", "Spl")

_B1, _B2, _B3 = (0, 4), (4, 4), (4, 0)
_SUPPLY = {(0, 2): 0.2, (2, 1): 0.4, (4, 2): 0.6, (2, 4): 0.8}


def _bernoulli(ap: str, p: float) -> LabelDist:
    return (((ap,), p), ((), round(1.0 - p, 12))) if p < 1 else (((ap,), 1.0),)


def base_labels() -> dict[tuple[int, int], LabelDist]:
    labels: dict[tuple[int, int], LabelDist] = {
        _B1: _bernoulli("b1", 1.0),
        _B2: _bernoulli("b2", 1.0),
        _B3: _bernoulli("b3", 1.0),
        (2, 0): _bernoulli("Obs", 0.7),
    }
    for cell, p in _SUPPLY.items():
        labels[cell] = _bernoulli("Spl", p)
    return labels


def preset_config(name: str) -> GridConfig:
    """Grid configurations for the named workspaces.

    ``surveillance``: 5x5 base workspace (bases, supply cells, one 0.7 obstacle).
    ``delivery``: same cells, but boundary mass is renormalized so a robot can
    leave a corner base without any chance of lingering in it.
    ``ordered``: adds a 0.7 obstacle on the top row between b1 and b2.
    ``clustered``: a 0.9 obstacle in the centre and 0.01 obstacles walling off b1.
    ``example2``: 5x5 with one 0.9 obstacle between the start and a base.
    ``lab``: 5 columns x 3 rows of 0.5 m cells with three bases and one obstacle.
    ``single``: 1x1 grid, ST only.
    """
    if name == "surveillance":
        return GridConfig(5, 5, base_labels(), SURVEILLANCE_AP)
    if name == "delivery":
        return GridConfig(5, 5, base_labels(), SURVEILLANCE_AP, boundary="renormalize")
    if name == "ordered":
        labels = base_labels()
        labels[(2, 4)] = _bernoulli("Obs", 0.7)
        return GridConfig(5, 5, labels, SURVEILLANCE_AP)
    if name == "clustered":
        labels = base_labels()
        labels[(2, 2)] = _bernoulli("Obs", 0.9)
        for cell in ((2, 3), (2, 4), (1, 2), (0, 2)):
            labels[cell] = _bernoulli("Obs", 0.01)
        return GridConfig(5, 5, labels, SURVEILLANCE_AP)
    if name == "example2":
        labels = {(4, 0): _bernoulli("b", 1.0), (2, 0): _bernoulli("obs", 0.9)}
        return GridConfig(5, 5, labels, ("b", "obs"), start=(0, 0, "E"))
    if name == "lab":
        labels = {
            (0, 2): _bernoulli("b1", 1.0),
            (4, 2): _bernoulli("b2", 1.0),
            (4, 0): _bernoulli("b3", 1.0),
            (2, 2): _bernoulli("Obs", 0.1),
        }
        return GridConfig(5, 3, labels, ("Obs", "b1", "b2", "b3"), cell_size=0.5)
    if name == "single":
        return GridConfig(1, 1, {}, (), actions=("ST",))
    raise ModelError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("surveillance", "delivery", "ordered", "clustered", "example2", "lab", "single")


def toy_model() -> Mdp:
    """Two-state model: S1 (obstacle with 0.01) and S2 (base), linked by f."""
    return check_model(
        make_mdp(
            states=["S1", "S2"],
            actions=["f"],
            transitions=[("S1", "f", "S2", 1.0), ("S2", "f", "S1", 1.0)],
            costs={("S1", "f"): 1.0, ("S2", "f"): 1.0},
            ap=["b", "obs"],
            labels={"S1": [(("obs",), 0.01), ((), 0.99)], "S2": [(("b",), 1.0)]},
            initial=("S1", ()),
        )
    )
