"""Feed-forward 24-9-24 network player for the 3x3 board.

Each hidden unit stands for a box and each input/output unit for an edge,
indexed as in :mod:`dotsnet.game_core`.  Units are logistic and subtract
their threshold (a weight on a constant input of -1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .game_core import BoardState, InvalidMoveError, geometry
from .players import NETWORK, PlayerSpec
from .rng import RngStream

N_INPUT = 24
N_HIDDEN = 9
N_OUTPUT = 24
N_PARAMS = N_HIDDEN * (N_INPUT + 1) + N_OUTPUT * (N_HIDDEN + 1)
ARCH_HEADER = f"{N_INPUT} {N_HIDDEN} {N_OUTPUT}"

assert N_HIDDEN * N_INPUT + N_OUTPUT * N_HIDDEN == 432
assert N_PARAMS == 465


def _frozen(a, shape) -> np.ndarray:
    out = np.array(a, dtype=np.float64, order="C")
    if out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("network parameters must be finite")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Network:
    hidden_w: np.ndarray  # (9, 24): hidden unit j, input edge e
    hidden_t: np.ndarray  # (9,)
    output_w: np.ndarray  # (24, 9): output edge k, hidden unit j
    output_t: np.ndarray  # (24,)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "hidden_w", _frozen(self.hidden_w, (N_HIDDEN, N_INPUT)))
        set_(self, "hidden_t", _frozen(self.hidden_t, (N_HIDDEN,)))
        set_(self, "output_w", _frozen(self.output_w, (N_OUTPUT, N_HIDDEN)))
        set_(self, "output_t", _frozen(self.output_t, (N_OUTPUT,)))

    @classmethod
    def zeros(cls) -> "Network":
        return cls(np.zeros((9, 24)), np.zeros(9), np.zeros((24, 9)), np.zeros(24))

    @classmethod
    def random(cls, rng: RngStream, scale: float = 0.5) -> "Network":
        """Uniform parameters on ``[-scale, scale]``."""
        g = rng.gen
        return cls(
            g.uniform(-scale, scale, (9, 24)),
            g.uniform(-scale, scale, 9),
            g.uniform(-scale, scale, (24, 9)),
            g.uniform(-scale, scale, 24),
        )

    @classmethod
    def from_vector(cls, vec) -> "Network":
        """Inverse of :meth:`to_vector`."""
        v = np.asarray(vec, dtype=np.float64)
        if v.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameters, got {v.shape}")
        hidden = v[: N_HIDDEN * 25].reshape(N_HIDDEN, 25)
        output = v[N_HIDDEN * 25 :].reshape(N_OUTPUT, 10)
        return cls(hidden[:, :24], hidden[:, 24], output[:, :9], output[:, 9])

    def to_vector(self) -> np.ndarray:
        """Parameters in genome layout order.

        Hidden unit 0's 24 input weights then its threshold, through hidden
        unit 8; then output unit 0's 9 weights then its threshold, through
        output unit 23.
        """
        hidden = np.hstack([self.hidden_w, self.hidden_t[:, None]])
        output = np.hstack([self.output_w, self.output_t[:, None]])
        return np.concatenate([hidden.ravel(), output.ravel()])

    @property
    def spec(self) -> PlayerSpec:
        return PlayerSpec(NETWORK, (self.hidden_w, self.hidden_t, self.output_w, self.output_t))

    def permuted(self, order) -> "Network":
        """Same function with hidden units relabelled by ``order``."""
        order = np.asarray(order)
        return Network(
            self.hidden_w[order], self.hidden_t[order], self.output_w[:, order], self.output_t
        )


def encode_board(state: BoardState) -> np.ndarray:
    geom = state.geometry
    if (geom.rows, geom.cols) != (3, 3):
        raise ValueError(f"network boards are 3x3, got {geom.rows}x{geom.cols}")
    m = state.mask
    return np.array([float(m >> e & 1) for e in range(N_INPUT)])


def hidden_activations(net: Network, enc: np.ndarray) -> np.ndarray:
    return expit(np.asarray(enc) @ net.hidden_w.T - net.hidden_t)


def forward(net: Network, enc: np.ndarray) -> np.ndarray:
    """Output activations for one encoding, or a batch of shape (n, 24)."""
    h = hidden_activations(net, enc)
    return expit(h @ net.output_w.T - net.output_t)


def _logistic(s: float) -> float:
    if s >= 0.0:
        return 1.0 / (1.0 + math.exp(-s))
    z = math.exp(s)
    return z / (1.0 + z)


def move_scores(params, mask: int) -> list[float]:
    """Output activations computed in the compiled kernel's summation order.

    ``params`` holds nested lists ``(hidden_w, hidden_t, output_w, output_t)``.
    Only drawn edges contribute to hidden sums, in ascending edge order; the
    threshold is subtracted last.
    """
    hw, ht, ow, ot = params
    on = [e for e in range(N_INPUT) if mask >> e & 1]
    hidden = []
    for j in range(N_HIDDEN):
        row = hw[j]
        s = 0.0
        for e in on:
            s += row[e]
        hidden.append(_logistic(s - ht[j]))
    out = []
    for k in range(N_OUTPUT):
        row = ow[k]
        s = 0.0
        for j in range(N_HIDDEN):
            s += row[j] * hidden[j]
        out.append(_logistic(s - ot[k]))
    return out


def choose_from_scores(scores, mask: int, rng: RngStream) -> int:
    best = -1.0
    cands: list[int] = []
    for e in range(N_OUTPUT):
        if mask >> e & 1:
            continue
        v = scores[e]
        if v > best:
            best = v
            cands = [e]
        elif v == best:
            cands.append(e)
    return rng.pick(cands)


def param_lists(net: Network):
    return (net.hidden_w.tolist(), net.hidden_t.tolist(), net.output_w.tolist(), net.output_t.tolist())


def choose_move(net: Network, state: BoardState, rng: RngStream, _lists=None) -> int:
    """Highest-output legal edge; exact ties resolved uniformly."""
    if state.terminal:
        raise InvalidMoveError("no move to choose on a finished board")
    encode_board(state)  # geometry check
    params = _lists if _lists is not None else param_lists(net)
    return choose_from_scores(move_scores(params, state.mask), state.mask, rng)


class NetworkPlayer:
    def __init__(self, net: Network, name: str = "net"):
        self.net = net
        self.name = name
        self.spec = net.spec
        self._lists = param_lists(net)

    def choose(self, state: BoardState, rng: RngStream) -> int:
        return choose_move(self.net, state, rng, self._lists)

    def __repr__(self) -> str:
        return f"NetworkPlayer({self.name!r})"


def build_level1_network(
    edge_weight: float = 8.0,
    hidden_threshold: float = 20.0,
    output_weight: float = 10.0,
    output_threshold: float = 2.0,
) -> Network:
    """Sparse network whose box units fire on boxes with three or more sides.

    Each output edge is driven by the units of its adjacent boxes, so the
    missing side of a three-sided box outscores every non-completing edge.
    """
    geom = geometry(3, 3)
    hw = np.zeros((N_HIDDEN, N_INPUT))
    ow = np.zeros((N_OUTPUT, N_HIDDEN))
    for b, edges in enumerate(geom.box_edges):
        hw[b, list(edges)] = edge_weight
    for e, boxes in enumerate(geom.edge_boxes):
        ow[e, list(boxes)] = output_weight
    return Network(hw, np.full(N_HIDDEN, hidden_threshold), ow, np.full(N_OUTPUT, output_threshold))


def save_network(net: Network, path: str | Path) -> None:
    lines = [ARCH_HEADER] + [repr(float(x)) for x in net.to_vector()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_network(path: str | Path) -> Network:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].split() != ARCH_HEADER.split():
        raise ValueError(f"{path}: expected architecture header {ARCH_HEADER!r}")
    values = [float(x) for x in lines[1:]]
    if len(values) != N_PARAMS:
        raise ValueError(f"{path}: expected {N_PARAMS} parameters, found {len(values)}")
    return Network.from_vector(values)
