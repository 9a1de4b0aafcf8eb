"""Back-propagation baseline.

Training positions come from games between a box-completing player and a
random one.  For each position the box-completing player faces, every edge
gets a target: illegal if drawn, otherwise the number of boxes it would
close.  Positions where no edge closes a box are dropped.  Illegal edges
carry zero error during training.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .game_core import BoardState, apply_move, boxes_completed_by, geometry
from .network import N_INPUT, Network, encode_board, hidden_activations
from .players import level0_choose, level1_choose
from .rng import RngStream

ILLEGAL = -1


@dataclass(frozen=True, eq=False)
class TrainingExample:
    board: np.ndarray    # (24,) of 0.0 / 1.0
    targets: np.ndarray  # (24,) int8; ILLEGAL or boxes closed (0, 1, 2)

    @property
    def legal(self) -> np.ndarray:
        return self.targets != ILLEGAL

    def __eq__(self, other):
        return (
            isinstance(other, TrainingExample)
            and np.array_equal(self.board, other.board)
            and np.array_equal(self.targets, other.targets)
        )


@dataclass
class TrainerConfig:
    learning_rate: float = 0.1
    epochs: int = 20
    seed: int = 0
    target_scale: float = 0.5
    init_scale: float = 0.5
    n_games: int = 800

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.n_games < 1:
            raise ValueError("epochs must be >= 0 and n_games >= 1")
        if not self.target_scale > 0 or self.init_scale < 0:
            raise ValueError("target_scale must be positive and init_scale non-negative")


def example_for(state: BoardState) -> TrainingExample:
    targets = np.full(N_INPUT, ILLEGAL, dtype=np.int8)
    for e in range(N_INPUT):
        if not state.occupied(e):
            targets[e] = boxes_completed_by(state, e)
    return TrainingExample(encode_board(state), targets)


def record_game(rng: RngStream, teacher_first: bool) -> list[TrainingExample]:
    """Every position the box-completing player moves from, unfiltered."""
    state = BoardState(geometry(3, 3))
    teacher = 0 if teacher_first else 1
    out = []
    while not state.terminal:
        if state.to_move == teacher:
            out.append(example_for(state))
            e = level1_choose(state, rng)
        else:
            e = level0_choose(state, rng)
        state, _ = apply_move(state, e)
    return out


def useful(example: TrainingExample) -> bool:
    return bool(np.any(example.targets >= 1))


def generate_training_set(n_games: int, rng: RngStream, filtered: bool = True) -> list[TrainingExample]:
    """Positions from ``n_games`` games; the teacher moves first in even games."""
    if n_games < 1:
        raise ValueError("need at least one game")
    data = []
    for i in range(n_games):
        data.extend(record_game(rng.derive(i), teacher_first=(i % 2 == 0)))
    return [x for x in data if useful(x)] if filtered else data


def masked_error(outputs, example: TrainingExample, target_scale: float = 0.5) -> tuple[np.ndarray, float]:
    """Per-output errors and the loss ``0.5 * sum(error ** 2)``.

    Outputs on illegal edges get zero error whatever their value.
    """
    legal = example.legal
    err = np.where(legal, np.asarray(outputs, dtype=np.float64) - target_scale * example.targets, 0.0)
    return err, 0.5 * float(err @ err)


def loss_and_gradient(net: Network, example: TrainingExample, target_scale: float = 0.5):
    """Masked loss and its gradient as ``(hidden_w, hidden_t, output_w, output_t)`` arrays."""
    x = example.board
    h = hidden_activations(net, x)
    o = 1.0 / (1.0 + np.exp(-(net.output_w @ h - net.output_t)))
    err, loss = masked_error(o, example, target_scale)
    d_out = err * o * (1.0 - o)
    d_hid = (net.output_w.T @ d_out) * h * (1.0 - h)
    grads = (np.outer(d_hid, x), -d_hid, np.outer(d_out, h), -d_out)
    return loss, grads


def dataset_loss(net: Network, data: Sequence[TrainingExample], target_scale: float = 0.5) -> float:
    if not data:
        return 0.0
    x = np.stack([d.board for d in data])
    t = np.stack([d.targets for d in data]).astype(np.float64)
    h = hidden_activations(net, x)
    o = 1.0 / (1.0 + np.exp(-(h @ net.output_w.T - net.output_t)))
    err = np.where(t != ILLEGAL, o - target_scale * t, 0.0)
    return 0.5 * float(np.sum(err * err))


def train_backprop(net: Network, data: Sequence[TrainingExample], cfg: TrainerConfig, rng: RngStream) -> Network:
    """Online gradient descent, reshuffling the examples every epoch."""
    cfg.validate()
    if not data:
        raise ValueError("no training data")
    lr, scale = cfg.learning_rate, cfg.target_scale
    hw, ht = net.hidden_w.copy(), net.hidden_t.copy()
    ow, ot = net.output_w.copy(), net.output_t.copy()
    boards = np.stack([d.board for d in data])
    targets = np.stack([d.targets for d in data]).astype(np.float64)
    legal = targets != ILLEGAL
    goal = scale * targets
    for _ in range(cfg.epochs):
        for i in rng.gen.permutation(len(data)):
            x = boards[i]
            h = 1.0 / (1.0 + np.exp(-(hw @ x - ht)))
            o = 1.0 / (1.0 + np.exp(-(ow @ h - ot)))
            err = np.where(legal[i], o - goal[i], 0.0)
            d_out = err * o * (1.0 - o)
            d_hid = (ow.T @ d_out) * h * (1.0 - h)
            ow -= lr * np.outer(d_out, h)
            ot += lr * d_out
            hw -= lr * np.outer(d_hid, x)
            ht += lr * d_hid
    return Network(hw, ht, ow, ot)


# --- training-set files -----------------------------------------------------------

_TOKENS = {ILLEGAL: "x", 0: "0", 1: "1", 2: "2"}
_VALUES = {v: k for k, v in _TOKENS.items()}


def format_example(x: TrainingExample) -> str:
    board = "".join("1" if b else "0" for b in x.board)
    return board + " " + ",".join(_TOKENS[int(t)] for t in x.targets)


def parse_example(line: str) -> TrainingExample:
    board, targets = line.split()
    toks = targets.split(",")
    if len(board) != N_INPUT or len(toks) != N_INPUT or set(board) - {"0", "1"}:
        raise ValueError(f"malformed training line {line!r}")
    t = np.array([_VALUES[tok] for tok in toks], dtype=np.int8)
    b = np.array([float(ch) for ch in board])
    if not np.array_equal(t == ILLEGAL, b == 1.0):
        raise ValueError(f"illegal flags disagree with the board in {line!r}")
    return TrainingExample(b, t)


def write_training_set(data: Iterable[TrainingExample], path: str | Path) -> None:
    Path(path).write_text("".join(format_example(x) + "\n" for x in data))


def read_training_set(path: str | Path) -> list[TrainingExample]:
    return [parse_example(ln) for ln in Path(path).read_text().splitlines() if ln.strip()]
