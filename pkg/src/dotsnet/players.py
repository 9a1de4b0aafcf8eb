"""Heuristic benchmark players and the common player contract.

Level 0 plays uniformly at random.  Level 1 takes a box whenever one is
available, preferring a move that closes two.  Level 2 additionally refuses,
when it can, to draw the third side of any box.

Candidate lists are always built in ascending edge order and resolved with
:meth:`RngStream.pick`, which the compiled kernel mirrors exactly.
"""
from __future__ import annotations

from typing import NamedTuple, Protocol, runtime_checkable

import numpy as np

from .game_core import BoardState, InvalidMoveError
from .rng import RngStream

LEVEL0, LEVEL1, LEVEL2, NETWORK = 0, 1, 2, 3


class PlayerSpec(NamedTuple):
    """What the game kernel needs to play on a player's behalf.

    ``params`` is ``None`` for heuristic kinds and a tuple of four contiguous
    float64 arrays ``(hidden_w, hidden_t, output_w, output_t)`` for networks.
    """

    kind: int
    params: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None


@runtime_checkable
class Player(Protocol):
    name: str

    def choose(self, state: BoardState, rng: RngStream) -> int: ...


def _check_live(state: BoardState) -> None:
    if state.terminal:
        raise InvalidMoveError("no move to choose on a finished board")


def _scan(state: BoardState) -> tuple[list[int], list[int], list[int], int]:
    """One pass over legal edges.

    Returns (legal, best completing moves, safe moves, best completion count).
    """
    geom = state.geometry
    m = state.mask
    box_masks = geom.box_masks
    legal: list[int] = []
    completing: list[int] = []
    safe: list[int] = []
    best = 0
    for e in range(geom.edge_count):
        if m >> e & 1:
            continue
        legal.append(e)
        closes = 0
        third = False
        for b in geom.edge_boxes[e]:
            n = (m & box_masks[b]).bit_count()
            if n == 3:
                closes += 1
            elif n == 2:
                third = True
        if closes:
            if closes > best:
                best = closes
                completing = [e]
            elif closes == best:
                completing.append(e)
        elif not third:
            safe.append(e)
    return legal, completing, safe, best


def level0_choose(state: BoardState, rng: RngStream) -> int:
    _check_live(state)
    m = state.mask
    return rng.pick([e for e in range(state.geometry.edge_count) if not m >> e & 1])


def level1_choose(state: BoardState, rng: RngStream) -> int:
    _check_live(state)
    legal, completing, _, _ = _scan(state)
    return rng.pick(completing or legal)


def level2_choose(state: BoardState, rng: RngStream) -> int:
    _check_live(state)
    legal, completing, safe, _ = _scan(state)
    return rng.pick(completing or safe or legal)


class HeuristicPlayer:
    _choosers = {LEVEL0: level0_choose, LEVEL1: level1_choose, LEVEL2: level2_choose}

    def __init__(self, level: int):
        if level not in self._choosers:
            raise ValueError(f"unknown heuristic level {level}")
        self.level = level
        self.name = f"level{level}"
        self.spec = PlayerSpec(level)
        self._choose = self._choosers[level]

    def choose(self, state: BoardState, rng: RngStream) -> int:
        return self._choose(state, rng)

    def __repr__(self) -> str:
        return f"HeuristicPlayer({self.level})"


def heuristic(level: int) -> HeuristicPlayer:
    return HeuristicPlayer(level)
