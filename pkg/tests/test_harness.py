import csv
from functools import lru_cache

import pytest

from dotsnet.evolution import Snapshot
from dotsnet.game_core import apply_move, geometry, legal_moves, new_board, parse_board, state_from_edges
from dotsnet.genome import Genome, encode
from dotsnet.harness import (
    CURVE_COLUMNS,
    CurvePoint,
    EvalRecord,
    OracleLimitError,
    closes,
    evaluate_snapshots,
    evaluate_winrate,
    export_csv,
    halfwidth95,
    make_player,
    member_win_rates,
    minimax_oracle,
    oracle_moves,
    read_csv,
)
from dotsnet.network import NetworkPlayer, build_level1_network
from dotsnet.players import HeuristicPlayer
from dotsnet.rng import RngStream

FIG2 = """\
. ._. .
! !_._!
!_._._."""


# --- win rates --------------------------------------------------------------------


def test_winrate_deterministic_and_balanced():
    a, b = HeuristicPlayer(2), HeuristicPlayer(1)
    r1 = evaluate_winrate(a, b, 1000, RngStream(0))
    r2 = evaluate_winrate(a, b, 1000, RngStream(0))
    assert r1 == r2
    assert r1.wins == r1.wins_first + r1.wins_second
    assert r1.win_rate == r1.wins / 1000
    assert r1.ci95 == pytest.approx(halfwidth95(r1.wins, 1000))


def test_winrate_rejects_odd_games():
    with pytest.raises(ValueError):
        evaluate_winrate(HeuristicPlayer(0), HeuristicPlayer(0), 301, RngStream(0))


def test_winrate_independent_of_workers():
    a, b = HeuristicPlayer(1), HeuristicPlayer(0)
    assert evaluate_winrate(a, b, 1000, RngStream(3), 1) == evaluate_winrate(a, b, 1000, RngStream(3), 3)


def test_winrate_managed_players_match_kernel():
    """A player without a kernel spec goes through the referee and gives the same games."""
    class Wrapped:
        def __init__(self, inner):
            self.inner, self.name, self.spec = inner, inner.name, None

        def choose(self, state, rng):
            return self.inner.choose(state, rng)

    a, b = HeuristicPlayer(2), HeuristicPlayer(0)
    direct = evaluate_winrate(a, b, 200, RngStream(5))
    managed = evaluate_winrate(Wrapped(a), b, 200, RngStream(5))
    assert (direct.wins_first, direct.wins_second) == (managed.wins_first, managed.wins_second)


def test_make_player(tmp_path):
    from dotsnet.network import save_network

    assert make_player("level2").name == "level2"
    path = tmp_path / "n.txt"
    save_network(build_level1_network(), path)
    assert make_player(f"net:{path}").spec is not None
    with pytest.raises(ValueError):
        make_player("level9")


# --- snapshot evaluation ---------------------------------------------------------------


def test_level1_network_genome_evaluates_high():
    g = encode(build_level1_network())
    snap = Snapshot(0, 0, [g], [1.0], "direct:0", 0)
    curve = evaluate_snapshots([snap], 0, 300, RngStream(0))
    assert curve[0].best_win_rate >= 0.99


def test_random_population_best_beats_chance():
    rng = RngStream(2)
    pop = [Genome.random(rng) for _ in range(100)]
    rates = member_win_rates(Snapshot(0, 0, pop, [1.0] * 100, "ifs", 2), 0, 100, RngStream(1))
    assert max(rates) > 0.55
    assert len(rates) == 100


def test_evaluate_snapshots_sorted_and_empty():
    rng = RngStream(4)
    pop = [Genome.random(rng) for _ in range(4)]
    snaps = [Snapshot(g, 100 * g, pop, [1.0] * 4, "ifs", 0) for g in (3, 1)]
    curve = evaluate_snapshots(snaps, 1, 20, RngStream(0))
    assert [p.cumulative_games for p in curve] == [100, 300]
    assert evaluate_snapshots([], 0, 20, RngStream(0)) == []


# --- oracle ---------------------------------------------------------------------------------


def _engine_negamax(state):
    """Game value from the engine's own move rules, for cross-checking."""
    @lru_cache(maxsize=None)
    def value(mask, to_move, s1, s2):
        st = type(state)(state.geometry, mask, (s1, s2), to_move)
        if st.terminal:
            return 0
        best = None
        for e in legal_moves(st):
            nxt, gained = apply_move(st, e)
            rest = value(nxt.mask, nxt.to_move, *nxt.score)
            v = gained + rest if nxt.to_move == st.to_move else gained - rest
            best = v if best is None else max(best, v)
        return best
    return value(state.mask, state.to_move, *state.score)


def _all_positions(rows, cols):
    geom = geometry(rows, cols)
    seen, stack, out = set(), [new_board(rows, cols)], []
    while stack:
        s = stack.pop()
        if (s.mask, s.to_move, s.score) in seen:
            continue
        seen.add((s.mask, s.to_move, s.score))
        out.append(s)
        for e in legal_moves(s):
            stack.append(apply_move(s, e)[0])
    return geom, out


@pytest.mark.parametrize("rows,cols", [(1, 1), (1, 2)])
def test_oracle_agrees_with_engine_tree(rows, cols):
    _, states = _all_positions(rows, cols)
    for s in states:
        assert minimax_oracle(s) == _engine_negamax(s)


def test_oracle_empty_1x1():
    assert minimax_oracle(new_board(1, 1)) == -1


def test_oracle_terminal_is_zero():
    g = geometry(2, 2)
    assert minimax_oracle(state_from_edges(g, range(g.edge_count))) == 0


def test_oracle_single_remaining_edge():
    g = geometry(1, 2)
    s = state_from_edges(g, [e for e in range(g.edge_count) if e != g.v(0, 1)])
    assert minimax_oracle(s) == 2
    assert oracle_moves(s) == [g.v(0, 1)]


def test_oracle_bound():
    with pytest.raises(OracleLimitError):
        minimax_oracle(new_board(3, 3), max_remaining=12)


def test_oracle_fig2_position():
    s = parse_board(FIG2)
    assert minimax_oracle(s) == 2
    assert oracle_moves(s) == [2]


def test_closes_matches_engine():
    from dotsnet.game_core import boxes_completed_by
    from conftest import random_states

    states = _all_positions(1, 1)[1] + _all_positions(1, 2)[1] + random_states(300, 2, 2, seed=3)
    for s in states:
        g = s.geometry
        for e in legal_moves(s):
            assert closes(g.rows, g.cols, s.mask, e) == boxes_completed_by(s, e)


def test_greedy_vs_optimal_never_beats_value():
    """A greedy mover against an optimal opponent cannot exceed the oracle value."""
    from dotsnet.players import level1_choose

    geom = geometry(2, 2)
    rng = RngStream(9)
    base = RngStream(10)
    for i in range(200):
        edges = [e for e in range(geom.edge_count) if base.derive(i).gen.random() < 0.5]
        start = state_from_edges(geom, edges[:geom.edge_count - 3] if len(edges) > 9 else edges)
        if start.terminal:
            continue
        v = minimax_oracle(start)
        s, me = start, start.to_move
        while not s.terminal:
            e = level1_choose(s, rng) if s.to_move == me else oracle_moves(s)[0]
            s = apply_move(s, e)[0]
        diff = (s.score[me] - start.score[me]) - (s.score[1 - me] - start.score[1 - me])
        assert diff <= v


def test_optimal_play_realises_value():
    geom = geometry(2, 2)
    base = RngStream(12)
    for i in range(100):
        rng = base.derive(i)
        s = state_from_edges(geom, [e for e in range(geom.edge_count) if rng.gen.random() < 0.45])
        if s.terminal:
            continue
        v, me, start = minimax_oracle(s), s.to_move, s
        while not s.terminal:
            s = apply_move(s, oracle_moves(s)[0])[0]
        assert (s.score[me] - start.score[me]) - (s.score[1 - me] - start.score[1 - me]) == v


# --- CSV ------------------------------------------------------------------------------------------


def test_csv_empty_writes_header(tmp_path):
    path = tmp_path / "c.csv"
    export_csv([], path, kind="curve")
    assert path.read_text() == ",".join(CURVE_COLUMNS) + "\n"
    assert read_csv(path) == []
    with pytest.raises(ValueError):
        export_csv([], path)


def test_csv_single_row(tmp_path):
    path = tmp_path / "c.csv"
    export_csv([CurvePoint("ifs", 1650, 0.1 + 0.2)], path)
    assert path.read_text().splitlines()[1] == "ifs,1650,0.30000000000000004"


def test_csv_records_roundtrip(tmp_path):
    recs = [EvalRecord(f"s{i}", "level0", 300, i, i / 300, halfwidth95(i, 300)) for i in range(100)]
    path = tmp_path / "r.csv"
    export_csv(recs, path)
    assert read_csv(path) == recs
    with open(path) as fh:
        assert len(list(csv.reader(fh))) == 101


def test_csv_unwritable(tmp_path):
    with pytest.raises(OSError):
        export_csv([CurvePoint("ifs", 0, 0.5)], tmp_path / "missing" / "c.csv")
