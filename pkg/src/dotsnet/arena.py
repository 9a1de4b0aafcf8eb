"""Running games between arbitrary players.

Players that carry a kernel ``spec`` are handed to the game kernel; anything
else that satisfies the ``choose(state, rng)`` contract is driven move by
move through :mod:`dotsnet.game_core`, which validates every move.
"""
from __future__ import annotations

from . import kernels
from .game_core import BoardState, InvalidMoveError, apply_move, geometry
from .rng import RngStream

MOVE_RETRIES = 3


def _specs(*players):
    specs = [getattr(p, "spec", None) for p in players]
    return None if any(s is None for s in specs) else specs


def play_game(first, second, rng: RngStream, rows: int = 3, cols: int = 3) -> tuple[int, int]:
    """Play one game; returns (first mover's boxes, second mover's boxes)."""
    specs = _specs(first, second)
    if specs is not None:
        return kernels.play_game(rows, cols, specs[0], specs[1], rng)
    return play_managed(first, second, rng, rows, cols).score


def play_managed(first, second, rng: RngStream, rows: int = 3, cols: int = 3) -> BoardState:
    """Referee a game move by move and return the final position.

    An illegal choice is rejected and the player asked again, up to
    ``MOVE_RETRIES`` times, before the error propagates.
    """
    state = BoardState(geometry(rows, cols))
    players = (first, second)
    while not state.terminal:
        player = players[state.to_move]
        for attempt in range(MOVE_RETRIES + 1):
            try:
                state, _ = apply_move(state, player.choose(state, rng))
                break
            except InvalidMoveError:
                if attempt == MOVE_RETRIES:
                    raise
    return state


def play_series(a, b, n_games: int, rng: RngStream, rows: int = 3, cols: int = 3) -> tuple[int, int, int]:
    """``n_games`` games, ``a`` moving first in games 0, 2, 4, ...

    Returns (a's wins moving first, a's wins moving second, ties).
    """
    specs = _specs(a, b)
    if specs is not None:
        return kernels.play_games(rows, cols, specs[0], specs[1], n_games, rng)
    won_first = won_second = ties = 0
    for i in range(n_games):
        if i % 2 == 0:
            s_a, s_b = play_managed(a, b, rng, rows, cols).score
        else:
            s_b, s_a = play_managed(b, a, rng, rows, cols).score
        if s_a > s_b:
            if i % 2 == 0:
                won_first += 1
            else:
                won_second += 1
        elif s_a == s_b:
            ties += 1
    return won_first, won_second, ties
