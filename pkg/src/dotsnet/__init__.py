"""Neural networks evolved and trained to play 3x3 Dots-and-Boxes."""
from .game_core import (
    BoardGeometry,
    BoardState,
    GameResult,
    InvalidMoveError,
    apply_move,
    boxes_completed_by,
    game_result,
    legal_moves,
    new_board,
    render,
)
from .kernels import BACKEND
from .rng import RngStream

__version__ = "0.1.0"
