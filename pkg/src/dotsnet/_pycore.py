"""Pure-Python game kernel.

Same API and same random-draw sequence as the compiled ``_core`` extension;
used when the extension is not built or ``DOTSNET_PURE=1`` is set.
"""
from __future__ import annotations

from .game_core import BoardState, apply_move, geometry
from .network import choose_from_scores, move_scores
from .players import LEVEL0, LEVEL1, LEVEL2, NETWORK, PlayerSpec, level0_choose, level1_choose, level2_choose
from .rng import RngStream

BACKEND = "python"

_HEURISTIC = {LEVEL0: level0_choose, LEVEL1: level1_choose, LEVEL2: level2_choose}


def _policy(spec: PlayerSpec, rows: int, cols: int):
    if spec.kind in _HEURISTIC:
        return _HEURISTIC[spec.kind]
    if spec.kind == NETWORK:
        if (rows, cols) != (3, 3):
            raise ValueError("network players need a 3x3 board")
        lists = tuple(a.tolist() for a in spec.params)

        def choose(state: BoardState, rng: RngStream) -> int:
            return choose_from_scores(move_scores(lists, state.mask), state.mask, rng)

        return choose
    raise ValueError(f"unknown player kind {spec.kind}")


def _play(geom, first, second, rng) -> tuple[int, int]:
    state = BoardState(geom)
    policies = (first, second)
    while not state.terminal:
        state, _ = apply_move(state, policies[state.to_move](state, rng))
    return state.score


def play_game(rows: int, cols: int, spec1: PlayerSpec, spec2: PlayerSpec, rng: RngStream) -> tuple[int, int]:
    """One game on a fresh board; returns (P1 boxes, P2 boxes)."""
    return _play(geometry(rows, cols), _policy(spec1, rows, cols), _policy(spec2, rows, cols), rng)


def play_games(
    rows: int, cols: int, spec_a: PlayerSpec, spec_b: PlayerSpec, n_games: int, rng: RngStream
) -> tuple[int, int, int]:
    """``n_games`` games with ``a`` moving first in the even-numbered ones.

    Returns (a's wins moving first, a's wins moving second, ties).
    """
    geom = geometry(rows, cols)
    pa, pb = _policy(spec_a, rows, cols), _policy(spec_b, rows, cols)
    won_first = won_second = ties = 0
    for i in range(n_games):
        if i % 2 == 0:
            s_a, s_b = _play(geom, pa, pb, rng)
        else:
            s_b, s_a = _play(geom, pb, pa, rng)
        if s_a > s_b:
            if i % 2 == 0:
                won_first += 1
            else:
                won_second += 1
        elif s_a == s_b:
            ties += 1
    return won_first, won_second, ties


def net_scores(params, mask: int) -> list[float]:
    return move_scores(tuple(a.tolist() for a in params), mask)
