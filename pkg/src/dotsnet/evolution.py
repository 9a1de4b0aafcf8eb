"""Genetic algorithm over network genomes.

Three ways of scoring a population are supported:

* ``direct:<level>`` -- ten two-game matches against a heuristic player,
  followed by linear fitness scaling;
* ``roundrobin`` -- every pair meets once;
* ``ifs`` -- antibody/antigen sampling with implicit fitness sharing.

Every match draws from its own stream, ``eval_rng.derive(1, ordinal)``, so a
generation's fitness does not depend on how matches are spread over worker
processes.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .arena import play_series
from .genome import Genome, crossover, decode, mutate
from .network import NetworkPlayer
from .players import HeuristicPlayer
from .rng import RngStream

log = logging.getLogger(__name__)

VARIANTS = ("direct:0", "direct:1", "direct:2", "roundrobin", "ifs")

# stream keys under the master seed
_INIT, _EVAL, _BREED = 0, 1, 2
# stream keys under a generation's evaluation stream
_PAIRING, _MATCH = 0, 1


@dataclass(frozen=True)
class MatchResult:
    points: tuple[float, float]
    games_won: tuple[int, int]


def match_result(wins_a: int, wins_b: int) -> MatchResult:
    """Whoever won more games takes the point; equal records split it."""
    if wins_a > wins_b:
        points = (1.0, 0.0)
    elif wins_b > wins_a:
        points = (0.0, 1.0)
    else:
        points = (0.5, 0.5)
    return MatchResult(points, (wins_a, wins_b))


def play_match(a, b, rng: RngStream) -> MatchResult:
    """Two games on fresh 3x3 boards, ``a`` moving first in the first."""
    won_first, won_second, ties = play_series(a, b, 2, rng)
    wins_a = won_first + won_second
    return match_result(wins_a, 2 - wins_a - ties)


@dataclass
class EvolutionConfig:
    population_size: int = 100
    crossover_prob: float = 0.6
    mutation_prob: float = 0.005
    variant: str = "direct:0"
    direct_matches_per_individual: int = 10
    ifs_antigen_fraction: float = 0.25
    ifs_antibody_fraction: float = 0.33
    ifs_pool_points: float = 33.0
    ifs_shares_win_win: int = 4
    ifs_shares_win_loss: int = 1
    fitness_floor: float = 1e-6
    scaling_best_share: float = 0.10
    generations: int = 100
    snapshot_interval: int = 10
    master_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("ifs_antigen_fraction", "ifs_antibody_fraction", "scaling_best_share"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        for name in ("population_size", "direct_matches_per_individual", "generations", "snapshot_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {', '.join(VARIANTS)}")
        if self.fitness_floor < 0 or self.ifs_pool_points <= 0:
            raise ValueError("fitness_floor must be >= 0 and ifs_pool_points > 0")
        if self.ifs_shares_win_win < 0 or self.ifs_shares_win_loss < 0:
            raise ValueError("share counts must be non-negative")
        if self.variant == "roundrobin" and self.population_size < 2:
            raise ValueError("round-robin needs at least 2 individuals")
        if self.variant == "ifs":
            if self.population_size < 4:
                raise ValueError("implicit fitness sharing needs at least 4 individuals")
            if self.n_antigens < 1 or self.n_antibodies < 1:
                raise ValueError("population too small for the antigen/antibody fractions")
        if self.variant.startswith("direct") and self.scaling_best_share * self.population_size <= 1:
            raise ValueError("linear scaling needs scaling_best_share * population_size > 1")

    @property
    def opponent_level(self) -> int | None:
        return int(self.variant.split(":")[1]) if self.variant.startswith("direct") else None

    @property
    def n_antigens(self) -> int:
        return _fraction_count(self.ifs_antigen_fraction, self.population_size)

    @property
    def n_antibodies(self) -> int:
        return min(_fraction_count(self.ifs_antibody_fraction, self.population_size), self.population_size - 1)

    def games_per_generation(self) -> int:
        n = self.population_size
        if self.variant == "roundrobin":
            return n * (n - 1)
        if self.variant == "ifs":
            return self.n_antigens * self.n_antibodies * 2
        return n * self.direct_matches_per_individual * 2


def _fraction_count(fraction: float, n: int) -> int:
    # 0.33 * 100 must give 33, not 32
    return int(math.floor(fraction * n + 1e-9))


@dataclass
class FitnessVector:
    raw: np.ndarray
    scaled: np.ndarray
    games_consumed: int


# --- match scheduling -------------------------------------------------------


def _run_chunk(tasks) -> list[tuple[int, int, int]]:
    out = []
    for spec_a, spec_b, key in tasks:
        out.append(kernels.play_games(3, 3, spec_a, spec_b, 2, RngStream.from_key(key)))
    return out


class MatchRunner:
    """Plays batches of two-game matches, optionally in worker processes.

    Results are returned in task order and every match owns a derived
    stream, so the outcome is the same for any worker count.
    """

    def __init__(self, workers: int = 1, chunk_size: int = 200):
        self.workers = max(1, int(workers))
        self.chunk_size = chunk_size
        self._pool: ProcessPoolExecutor | None = None

    def __enter__(self) -> "MatchRunner":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def run(self, pairs: Sequence[tuple[object, object]], rng: RngStream) -> list[MatchResult]:
        streams = [rng.derive(_MATCH, m) for m in range(len(pairs))]
        specs = [(getattr(a, "spec", None), getattr(b, "spec", None)) for a, b in pairs]
        if self.workers == 1 or any(sa is None or sb is None for sa, sb in specs):
            return [play_match(a, b, s) for (a, b), s in zip(pairs, streams)]
        tasks = [(sa, sb, s.key) for (sa, sb), s in zip(specs, streams)]
        chunks = [tasks[i : i + self.chunk_size] for i in range(0, len(tasks), self.chunk_size)]
        if self._pool is None:
            self._pool = ProcessPoolExecutor(self.workers)
        results = []
        for part in self._pool.map(_run_chunk, chunks):
            for won_first, won_second, ties in part:
                wins_a = won_first + won_second
                results.append(match_result(wins_a, 2 - wins_a - ties))
        return results


# --- fitness ----------------------------------------------------------------


def fitness_direct(
    players: Sequence,
    opponent_level: int,
    rng: RngStream,
    matches: int = 10,
    floor: float = 1e-6,
    best_share: float = 0.10,
    runner: MatchRunner | None = None,
) -> FitnessVector:
    opponent = HeuristicPlayer(opponent_level)
    pairs = [(p, opponent) for p in players for _ in range(matches)]
    results = (runner or MatchRunner()).run(pairs, rng)
    pts = np.array([r.points[0] for r in results]).reshape(len(players), matches)
    raw = pts.sum(axis=1) + floor
    return FitnessVector(raw, linear_scale(raw, best_share), len(pairs) * 2)


def fitness_roundrobin(players: Sequence, rng: RngStream, floor: float = 0.0,
                       runner: MatchRunner | None = None) -> FitnessVector:
    n = len(players)
    if n < 2:
        raise ValueError("round-robin needs at least 2 players")
    index = [(i, j) for i in range(n) for j in range(i + 1, n)]
    results = (runner or MatchRunner()).run([(players[i], players[j]) for i, j in index], rng)
    raw = np.full(n, float(floor))
    for (i, j), r in zip(index, results):
        raw[i] += r.points[0]
        raw[j] += r.points[1]
    return FitnessVector(raw, raw.copy(), len(index) * 2)


def ifs_awards(antibody_wins: Sequence[int], pool: float = 33.0, win_win: int = 4, win_loss: int = 1) -> list[float]:
    """Split one antigen's point pool among its antibodies by shares.

    ``antibody_wins`` holds each antibody's games won (0, 1 or 2) in its
    two-game match against the antigen.
    """
    table = {0: 0, 1: win_loss, 2: win_win}
    shares = [table[w] for w in antibody_wins]
    total = sum(shares)
    if total == 0:
        return [0.0] * len(shares)
    return [pool * s / total for s in shares]


def sample_ifs_pairings(n: int, n_antigens: int, n_antibodies: int, rng: RngStream) -> list[tuple[int, list[int]]]:
    """Antigens without replacement; per antigen, antibodies from everyone else."""
    g = rng.gen
    antigens = g.choice(n, n_antigens, replace=False)
    out = []
    for ag in antigens:
        others = np.delete(np.arange(n), ag)
        out.append((int(ag), [int(x) for x in g.choice(others, n_antibodies, replace=False)]))
    return out


def fitness_ifs(
    players: Sequence,
    rng: RngStream,
    antigen_fraction: float = 0.25,
    antibody_fraction: float = 0.33,
    pool: float = 33.0,
    win_win: int = 4,
    win_loss: int = 1,
    floor: float = 1e-6,
    runner: MatchRunner | None = None,
) -> FitnessVector:
    n = len(players)
    if n < 4:
        raise ValueError("implicit fitness sharing needs at least 4 players")
    n_ag = _fraction_count(antigen_fraction, n)
    n_ab = min(_fraction_count(antibody_fraction, n), n - 1)
    pairings = sample_ifs_pairings(n, n_ag, n_ab, rng.derive(_PAIRING))
    pairs = [(players[ab], players[ag]) for ag, abs_ in pairings for ab in abs_]
    results = iter((runner or MatchRunner()).run(pairs, rng))
    raw = np.full(n, float(floor))
    for ag, abs_ in pairings:
        wins = [next(results).games_won[0] for _ in abs_]
        for ab, pts in zip(abs_, ifs_awards(wins, pool, win_win, win_loss)):
            raw[ab] += pts
    return FitnessVector(raw, raw.copy(), len(pairs) * 2)


def linear_scale(raw, best_share: float = 0.10) -> np.ndarray:
    """Affine rescaling that keeps the mean and sets max = C * mean.

    ``C = best_share * len(raw)``, so the best individual expects
    ``best_share`` of the roulette draws.  When that map would push the
    weakest individual below zero, the map fixing the minimum at zero is used
    instead.
    """
    f = np.asarray(raw, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("raw fitness must be non-negative")
    if not np.any(f > 0):
        raise ValueError("raw fitness is all zero")
    c = best_share * len(f)
    if c <= 1:
        raise ValueError(f"scaling multiple {c} must exceed 1")
    fmax, fmin, favg = f.max(), f.min(), f.mean()
    if fmax == favg:
        return f.copy()
    if fmin > (c * favg - fmax) / (c - 1.0):
        delta = fmax - favg
        a = (c - 1.0) * favg / delta
        b = favg * (fmax - c * favg) / delta
    else:
        delta = favg - fmin
        a = favg / delta
        b = -fmin * favg / delta
    return np.maximum(a * f + b, 0.0)


def roulette(fitness, n_draws: int, rng: RngStream) -> np.ndarray:
    """Indices drawn with replacement, probability proportional to fitness."""
    f = np.asarray(fitness, dtype=np.float64)
    total = f.sum()
    if not total > 0:
        raise ValueError("roulette needs positive total fitness")
    cum = np.cumsum(f)
    idx = np.searchsorted(cum, rng.gen.random(n_draws) * cum[-1], side="right")
    return np.minimum(idx, len(f) - 1)


def next_generation(
    genomes: Sequence[Genome], fitness, crossover_prob: float, mutation_prob: float, rng: RngStream
) -> list[Genome]:
    """Elite copy, then roulette selection, paired crossover and mutation."""
    f = np.asarray(fitness, dtype=np.float64)
    n = len(genomes)
    if len(f) != n:
        raise ValueError("fitness and population sizes differ")
    if np.any(f < 0) or not np.any(f > 0):
        raise ValueError("fitness must be non-negative and not all zero")
    elite = int(np.argmax(f))
    chosen = [genomes[i] for i in roulette(f, n - 1, rng)]
    children: list[Genome] = []
    for i in range(0, len(chosen) - 1, 2):
        a, b = chosen[i], chosen[i + 1]
        if rng.gen.random() < crossover_prob:
            a, b = crossover(a, b, rng)
        children += [a, b]
    if len(chosen) % 2:
        children.append(chosen[-1])
    children = [mutate(c, mutation_prob, rng) for c in children]
    return [genomes[elite]] + children


# --- snapshots and the main loop -----------------------------------------------


@dataclass
class Snapshot:
    generation: int
    cumulative_games: int
    genomes: list[Genome]
    raw_fitness: list[float]
    variant: str = ""
    seed: int = 0

    def best_index(self) -> int:
        return int(np.argmax(self.raw_fitness))


def format_snapshot(s: Snapshot) -> str:
    lines = [f"gen={s.generation} games={s.cumulative_games} variant={s.variant} seed={s.seed}"]
    lines += [f"{g.hex()} {float(f)!r}" for g, f in zip(s.genomes, s.raw_fitness)]
    return "\n".join(lines) + "\n"


def parse_snapshot(text: str) -> Snapshot:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty snapshot")
    try:
        head = dict(tok.split("=", 1) for tok in lines[0].split())
        gen, games, variant, seed = int(head["gen"]), int(head["games"]), head["variant"], int(head["seed"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad snapshot header {lines[0]!r}") from exc
    genomes, raw = [], []
    for ln in lines[1:]:
        hex_, fit = ln.split()
        genomes.append(Genome.from_hex(hex_))
        raw.append(float(fit))
    return Snapshot(gen, games, genomes, raw, variant, seed)


def write_snapshot(s: Snapshot, path: str | Path) -> None:
    Path(path).write_text(format_snapshot(s))


def read_snapshot(path: str | Path) -> Snapshot:
    return parse_snapshot(Path(path).read_text())


def snapshot_filename(generation: int) -> str:
    return f"snapshot_{generation:06d}.txt"


def evaluate_population(players: Sequence, cfg: EvolutionConfig, rng: RngStream,
                        runner: MatchRunner | None = None) -> FitnessVector:
    if cfg.variant == "roundrobin":
        return fitness_roundrobin(players, rng, runner=runner)
    if cfg.variant == "ifs":
        return fitness_ifs(
            players, rng, cfg.ifs_antigen_fraction, cfg.ifs_antibody_fraction, cfg.ifs_pool_points,
            cfg.ifs_shares_win_win, cfg.ifs_shares_win_loss, cfg.fitness_floor, runner=runner,
        )
    return fitness_direct(
        players, cfg.opponent_level, rng, cfg.direct_matches_per_individual,
        cfg.fitness_floor, cfg.scaling_best_share, runner=runner,
    )


def run_evolution(
    cfg: EvolutionConfig,
    workers: int = 1,
    on_snapshot: Callable[[Snapshot], None] | None = None,
) -> list[Snapshot]:
    """Evolve ``cfg.generations`` generations and return the snapshots taken.

    Snapshots are taken at generation 0, every ``snapshot_interval``
    generations and at the last generation.  A snapshot's ``cumulative_games``
    counts the games spent producing that population, so it equals
    ``games_per_generation * generation``.
    """
    cfg.validate()
    root = RngStream(cfg.master_seed)
    init = root.derive(_INIT)
    genomes = [Genome.random(init) for _ in range(cfg.population_size)]
    games = 0
    snaps: list[Snapshot] = []
    with MatchRunner(workers) as runner:
        for gen in range(cfg.generations + 1):
            players = [NetworkPlayer(decode(g)) for g in genomes]
            fit = evaluate_population(players, cfg, root.derive(_EVAL, gen), runner)
            if gen % cfg.snapshot_interval == 0 or gen == cfg.generations:
                snap = Snapshot(gen, games, list(genomes), [float(x) for x in fit.raw], cfg.variant, cfg.master_seed)
                snaps.append(snap)
                if on_snapshot is not None:
                    on_snapshot(snap)
            log.debug("gen %d games %d best raw %.4f mean %.4f", gen, games, fit.raw.max(), fit.raw.mean())
            if gen == cfg.generations:
                break
            games += fit.games_consumed
            genomes = next_generation(
                genomes, fit.scaled, cfg.crossover_prob, cfg.mutation_prob, root.derive(_BREED, gen)
            )
    return snaps


def config_fields() -> list[str]:
    return [f.name for f in fields(EvolutionConfig)]
