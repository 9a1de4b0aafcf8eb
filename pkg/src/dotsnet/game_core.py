"""Dots-and-Boxes rules on a rectangular grid of boxes.

Edges are numbered horizontal-first, row-major::

    h(r, c) = r * cols + c                                  r in [0, rows], c in [0, cols)
    v(r, c) = cols * (rows + 1) + r * (cols + 1) + c        r in [0, rows), c in [0, cols]

Box ``(r, c)`` (index ``r * cols + c``) is bounded by ``h(r, c)``,
``h(r + 1, c)``, ``v(r, c)`` and ``v(r, c + 1)``.

Board states are immutable; :func:`apply_move` returns a new state.  Occupancy
is held as an integer bitmask, bit ``e`` set when edge ``e`` is drawn.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

P1 = 0
P2 = 1


class InvalidMoveError(ValueError):
    """Raised when a move names an occupied or nonexistent edge."""


class GameResult(enum.Enum):
    ONGOING = "ongoing"
    WIN_P1 = "win_p1"
    WIN_P2 = "win_p2"
    TIE = "tie"


@dataclass(frozen=True)
class BoardGeometry:
    rows: int
    cols: int
    edge_count: int = field(init=False)
    box_count: int = field(init=False)
    # box index -> its four edges (top, bottom, left, right)
    box_edges: tuple[tuple[int, int, int, int], ...] = field(init=False, repr=False, compare=False)
    # edge index -> the one or two boxes it bounds
    edge_boxes: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    box_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (isinstance(self.rows, int) and isinstance(self.cols, int)):
            raise TypeError("board dimensions must be integers")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"board needs at least one box row and column, got {self.rows}x{self.cols}")
        rows, cols = self.rows, self.cols
        n_edges = cols * (rows + 1) + rows * (cols + 1)
        box_edges = []
        edge_boxes: list[list[int]] = [[] for _ in range(n_edges)]
        for r in range(rows):
            for c in range(cols):
                b = r * cols + c
                edges = (self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1))
                box_edges.append(edges)
                for e in edges:
                    edge_boxes[e].append(b)
        set_ = object.__setattr__
        set_(self, "edge_count", n_edges)
        set_(self, "box_count", rows * cols)
        set_(self, "box_edges", tuple(box_edges))
        set_(self, "edge_boxes", tuple(tuple(bs) for bs in edge_boxes))
        set_(self, "box_masks", tuple(sum(1 << e for e in es) for es in box_edges))

    def h(self, r: int, c: int) -> int:
        """Index of the horizontal edge on dot row ``r`` right of dot column ``c``."""
        if not (0 <= r <= self.rows and 0 <= c < self.cols):
            raise IndexError(f"no horizontal edge h({r},{c}) on a {self.rows}x{self.cols} board")
        return r * self.cols + c

    def v(self, r: int, c: int) -> int:
        """Index of the vertical edge below dot ``(r, c)``."""
        if not (0 <= r < self.rows and 0 <= c <= self.cols):
            raise IndexError(f"no vertical edge v({r},{c}) on a {self.rows}x{self.cols} board")
        return self.cols * (self.rows + 1) + r * (self.cols + 1) + c

    @property
    def full_mask(self) -> int:
        return (1 << self.edge_count) - 1


@lru_cache(maxsize=None)
def geometry(rows: int, cols: int) -> BoardGeometry:
    return BoardGeometry(rows, cols)


@dataclass(frozen=True)
class BoardState:
    geometry: BoardGeometry
    mask: int = 0
    score: tuple[int, int] = (0, 0)
    to_move: int = P1
    moves_played: int = 0

    @property
    def edges(self) -> tuple[bool, ...]:
        """Occupancy per edge index."""
        m = self.mask
        return tuple(bool(m >> e & 1) for e in range(self.geometry.edge_count))

    def occupied(self, e: int) -> bool:
        return bool(self.mask >> e & 1)

    def sides(self, box: int) -> int:
        """Number of drawn sides of ``box``."""
        return (self.mask & self.geometry.box_masks[box]).bit_count()

    @property
    def terminal(self) -> bool:
        return self.mask == self.geometry.full_mask

    def __str__(self) -> str:
        return render(self)


def new_board(rows: int = 3, cols: int = 3) -> BoardState:
    return BoardState(geometry(rows, cols))


def state_from_edges(geom: BoardGeometry, edges: Iterable[int], to_move: int = P1) -> BoardState:
    """Build a position by setting edges directly.

    Any boxes already closed are credited to P1 so the score total matches
    the edge set.  Meant for fixtures and analysis, not for replaying games.
    """
    mask = 0
    for e in edges:
        if not 0 <= e < geom.edge_count:
            raise InvalidMoveError(f"edge {e} out of range")
        mask |= 1 << e
    done = sum(1 for bm in geom.box_masks if mask & bm == bm)
    return BoardState(geom, mask, (done, 0), to_move, mask.bit_count())


def legal_moves(state: BoardState) -> list[int]:
    """Unoccupied edges in ascending index order."""
    m = state.mask
    return [e for e in range(state.geometry.edge_count) if not m >> e & 1]


def boxes_completed_by(state: BoardState, e: int) -> int:
    if state.mask >> e & 1:
        raise InvalidMoveError(f"edge {e} is already drawn")
    geom = state.geometry
    m = state.mask
    return sum(1 for b in geom.edge_boxes[e] if (m & geom.box_masks[b]).bit_count() == 3)


def apply_move(state: BoardState, e: int) -> tuple[BoardState, int]:
    geom = state.geometry
    if not isinstance(e, int) or not 0 <= e < geom.edge_count:
        raise InvalidMoveError(f"edge {e!r} does not exist on a {geom.rows}x{geom.cols} board")
    if state.mask >> e & 1:
        raise InvalidMoveError(f"edge {e} is already drawn")
    gained = boxes_completed_by(state, e)
    mask = state.mask | (1 << e)
    score = list(state.score)
    score[state.to_move] += gained
    to_move = state.to_move
    if gained == 0 or mask == geom.full_mask:
        to_move = 1 - to_move
    return BoardState(geom, mask, (score[0], score[1]), to_move, state.moves_played + 1), gained


def game_result(state: BoardState) -> GameResult:
    if not state.terminal:
        return GameResult.ONGOING
    a, b = state.score
    if a > b:
        return GameResult.WIN_P1
    if b > a:
        return GameResult.WIN_P2
    return GameResult.TIE


def completed_boxes(state: BoardState) -> int:
    """Recount finished boxes from the edge set alone."""
    m = state.mask
    return sum(1 for bm in state.geometry.box_masks if m & bm == bm)


def render(state: BoardState) -> str:
    """ASCII picture: ``.`` dots, ``_`` horizontal edges, ``!`` vertical edges.

    One text line per dot row.  A vertical edge is drawn in place of the dot
    at its lower end, so a 2x3 board renders as three lines of seven
    characters.
    """
    geom = state.geometry
    lines = []
    for r in range(geom.rows + 1):
        chars = []
        for c in range(geom.cols + 1):
            if r > 0 and state.occupied(geom.v(r - 1, c)):
                chars.append("!")
            else:
                chars.append(".")
            if c < geom.cols:
                chars.append("_" if state.occupied(geom.h(r, c)) else " ")
        lines.append("".join(chars))
    return "\n".join(lines)


def parse_board(text: str, to_move: int = P1) -> BoardState:
    """Inverse of :func:`render` (scores follow :func:`state_from_edges`)."""
    lines = [ln.rstrip() for ln in text.strip("\n").splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("empty board picture")
    rows = len(lines) - 1
    width = max(len(ln) for ln in lines)
    if width % 2 == 0 or rows < 1:
        raise ValueError("malformed board picture")
    cols = (width - 1) // 2
    geom = geometry(rows, cols)
    edges = []
    for r, ln in enumerate(lines):
        ln = ln.ljust(width)
        for c in range(cols + 1):
            ch = ln[2 * c]
            if ch == "!":
                if r == 0:
                    raise ValueError("vertical edge on the top dot row")
                edges.append(geom.v(r - 1, c))
            elif ch != ".":
                raise ValueError(f"unexpected dot character {ch!r}")
            if c < cols:
                ch = ln[2 * c + 1]
                if ch == "_":
                    edges.append(geom.h(r, c))
                elif ch != " ":
                    raise ValueError(f"unexpected edge character {ch!r}")
    return state_from_edges(geom, edges, to_move)
