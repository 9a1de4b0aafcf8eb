"""Benchmark tournaments, snapshot evaluation, an exact small-board solver and CSV output."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from . import kernels
from .arena import play_series
from .evolution import Snapshot
from .game_core import BoardState
from .genome import decode
from .network import NetworkPlayer, load_network
from .players import HeuristicPlayer, PlayerSpec
from .rng import RngStream

BLOCK_GAMES = 100


@dataclass(frozen=True)
class EvalRecord:
    subject: str
    opponent: str
    games: int
    wins: int
    win_rate: float
    ci95: float
    # per-role split; not part of the CSV row
    wins_first: int = field(default=0, compare=False)
    wins_second: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CurvePoint:
    variant: str
    cumulative_games: int
    best_win_rate: float


def halfwidth95(wins: int, games: int) -> float:
    p = wins / games
    return 1.959963984540054 * math.sqrt(p * (1.0 - p) / games)


def make_player(selector: str):
    """``level0``/``level1``/``level2`` or ``net:<path to network file>``."""
    if selector in ("level0", "level1", "level2"):
        return HeuristicPlayer(int(selector[-1]))
    if selector.startswith("net:"):
        return NetworkPlayer(load_network(selector[4:]), name=selector)
    raise ValueError(f"unknown player {selector!r}; use level0, level1, level2 or net:<file>")


# --- win rates --------------------------------------------------------------


def _blocks(n_games: int) -> list[int]:
    sizes = [BLOCK_GAMES] * (n_games // BLOCK_GAMES)
    if n_games % BLOCK_GAMES:
        sizes.append(n_games % BLOCK_GAMES)
    return sizes


def _series_task(task) -> tuple[int, int, int]:
    spec_a, spec_b, n, key = task
    return kernels.play_games(3, 3, spec_a, spec_b, n, RngStream.from_key(key))


def _pool_map(tasks, workers: int):
    if workers <= 1:
        return [_series_task(t) for t in tasks]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(_series_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def evaluate_winrate(a, b, n_games: int, rng: RngStream, workers: int = 1) -> EvalRecord:
    """``n_games`` games with alternating first mover, in blocks of ``BLOCK_GAMES``.

    Block ``k`` draws from ``rng.derive(k)``, which makes the record
    independent of ``workers``.
    """
    if n_games < 2 or n_games % 2:
        raise ValueError("n_games must be even and at least 2")
    sizes = _blocks(n_games)
    streams = [rng.derive(k) for k in range(len(sizes))]
    spec_a, spec_b = getattr(a, "spec", None), getattr(b, "spec", None)
    if spec_a is None or spec_b is None:
        parts = [play_series(a, b, n, s) for n, s in zip(sizes, streams)]
    else:
        parts = _pool_map([(spec_a, spec_b, n, s.key) for n, s in zip(sizes, streams)], workers)
    wf = sum(p[0] for p in parts)
    ws = sum(p[1] for p in parts)
    wins = wf + ws
    return EvalRecord(a.name, b.name, n_games, wins, wins / n_games, halfwidth95(wins, n_games), wf, ws)


def member_win_rates(snapshot: Snapshot, opponent_level: int, games_per_member: int,
                     rng: RngStream, workers: int = 1) -> list[float]:
    """Win rate of every member; member ``i`` uses ``rng.derive(generation, i)``."""
    if games_per_member < 2 or games_per_member % 2:
        raise ValueError("games_per_member must be even and at least 2")
    opp = PlayerSpec(opponent_level)
    tasks = [
        (decode(g).spec, opp, games_per_member, rng.derive(snapshot.generation, i).key)
        for i, g in enumerate(snapshot.genomes)
    ]
    return [(wf + ws) / games_per_member for wf, ws, _ in _pool_map(tasks, workers)]


def evaluate_snapshots(snapshots: Iterable[Snapshot], opponent_level: int, games_per_member: int,
                       rng: RngStream, workers: int = 1) -> list[CurvePoint]:
    """Best member's win rate against a heuristic opponent for each snapshot."""
    out = []
    for s in snapshots:
        rates = member_win_rates(s, opponent_level, games_per_member, rng, workers)
        out.append(CurvePoint(s.variant, s.cumulative_games, max(rates)))
    out.sort(key=lambda p: p.cumulative_games)
    return out


# --- exact solver -------------------------------------------------------------


class OracleLimitError(ValueError):
    pass


@lru_cache(maxsize=None)
def _box_masks(rows: int, cols: int) -> tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]:
    """Box edge masks built from dot pairs, without the engine's tables."""
    dots = [(r, c) for r in range(rows + 1) for c in range(cols + 1)]
    segments = [((r, c), (r, c + 1)) for r, c in dots if c < cols]
    segments += [((r, c), (r + 1, c)) for r, c in dots if r < rows]
    index = {seg: i for i, seg in enumerate(segments)}
    boxes = []
    for r in range(rows):
        for c in range(cols):
            sides = [((r, c), (r, c + 1)), ((r + 1, c), (r + 1, c + 1)), ((r, c), (r + 1, c)), ((r, c + 1), (r + 1, c + 1))]
            boxes.append(sum(1 << index[s] for s in sides))
    touching = tuple(tuple(bm for bm in boxes if bm >> e & 1) for e in range(len(segments)))
    return tuple(boxes), touching


def closes(rows: int, cols: int, mask: int, e: int) -> int:
    """Boxes finished by drawing ``e`` on ``mask``, by the solver's own rules."""
    _, touching = _box_masks(rows, cols)
    after = mask | (1 << e)
    return sum(1 for bm in touching[e] if after & bm == bm)


@lru_cache(maxsize=None)
def _negamax(rows: int, cols: int, mask: int) -> int:
    n_edges = cols * (rows + 1) + rows * (cols + 1)
    full = (1 << n_edges) - 1
    if mask == full:
        return 0
    best = -(rows * cols + 1)
    for e in range(n_edges):
        if mask >> e & 1:
            continue
        gained = closes(rows, cols, mask, e)
        nxt = mask | (1 << e)
        rest = _negamax(rows, cols, nxt)
        value = gained + rest if gained and nxt != full else gained - rest
        if value > best:
            best = value
    return best


def minimax_oracle(state: BoardState, max_remaining: int = 12) -> int:
    """Mover's boxes minus opponent's boxes from here on, under perfect play.

    Every legal edge is searched, including declining an available box.
    """
    geom = state.geometry
    remaining = geom.edge_count - state.mask.bit_count()
    if remaining > max_remaining:
        raise OracleLimitError(f"{remaining} open edges exceeds the search bound {max_remaining}")
    return _negamax(geom.rows, geom.cols, state.mask)


def oracle_moves(state: BoardState) -> list[int]:
    """Edges achieving the oracle value for the mover."""
    geom = state.geometry
    rows, cols, mask = geom.rows, geom.cols, state.mask
    full = geom.full_mask
    target = _negamax(rows, cols, mask)
    best = []
    for e in range(geom.edge_count):
        if mask >> e & 1:
            continue
        gained = closes(rows, cols, mask, e)
        nxt = mask | (1 << e)
        rest = _negamax(rows, cols, nxt)
        if (gained + rest if gained and nxt != full else gained - rest) == target:
            best.append(e)
    return best


# --- CSV ------------------------------------------------------------------------

CURVE_COLUMNS = ["variant", "cumulative_games", "best_win_rate"]
RECORD_COLUMNS = ["subject", "opponent", "games", "wins", "win_rate", "ci95"]


def export_csv(rows: Sequence[CurvePoint | EvalRecord], path: str | Path, kind: str | None = None) -> None:
    """Header plus one line per item; ``kind`` ("curve"/"records") is needed only for empty input."""
    if kind is None:
        if not rows:
            raise ValueError("kind must be given for an empty table")
        kind = "curve" if isinstance(rows[0], CurvePoint) else "records"
    columns = CURVE_COLUMNS if kind == "curve" else RECORD_COLUMNS
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for item in rows:
                d = asdict(item)
                w.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path: str | Path) -> list[CurvePoint | EvalRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header == CURVE_COLUMNS:
        return [CurvePoint(v, int(g), float(r)) for v, g, r in rows]
    if header == RECORD_COLUMNS:
        return [EvalRecord(s, o, int(g), int(w), float(r), float(c)) for s, o, g, w, r, c in rows]
    raise ValueError(f"{path}: unrecognised header {header}")
