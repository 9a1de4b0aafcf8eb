"""One test per acceptance criterion, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import numpy as np
import pytest

from conftest import ACCEPTANCE
from dotsnet.cli import main
from dotsnet.evolution import EvolutionConfig, fitness_ifs, run_evolution, sample_ifs_pairings, _PAIRING
from dotsnet.game_core import apply_move, boxes_completed_by, legal_moves, new_board
from dotsnet.genome import GENOME_BYTES, Genome, decode, encode, quant_value
from dotsnet.harness import evaluate_winrate, member_win_rates, minimax_oracle
from dotsnet.network import N_PARAMS, Network, NetworkPlayer, build_level1_network
from dotsnet.players import HeuristicPlayer, level0_choose
from dotsnet.rng import RngStream
from dotsnet.supervised import (
    TrainerConfig,
    generate_training_set,
    loss_and_gradient,
    train_backprop,
)
from test_evolution import Named, ScriptedRunner
from test_harness import _all_positions, _engine_negamax
from test_supervised import _flat, _numeric_grad


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    assert ok, detail


def test_c1_heuristic_ladder():
    rng = RngStream(2024)
    l0, l1, l2 = (HeuristicPlayer(k) for k in range(3))
    r10 = evaluate_winrate(l1, l0, 20000, rng.derive(0)).win_rate
    r20 = evaluate_winrate(l2, l0, 20000, rng.derive(1)).win_rate
    r21 = evaluate_winrate(l2, l1, 20000, rng.derive(2)).win_rate
    ok = r10 >= 0.99 and r20 >= 0.99 and abs(r21 - 0.8383) <= 0.03
    record(1, ok, f"L1>L0 {r10:.4f}, L2>L0 {r20:.4f}, L2>L1 {r21:.4f} (need >=0.99, >=0.99, 0.8383+-0.03)")


def test_c2_level1_network():
    net = NetworkPlayer(build_level1_network())
    rng = RngStream(7)
    violations = positions = 0
    for g in range(1000):
        game = rng.derive(0, g)
        s = new_board()
        while not s.terminal:
            can_close = any(boxes_completed_by(s, e) for e in legal_moves(s))
            choice = net.choose(s, game)
            positions += 1
            violations += can_close != (boxes_completed_by(s, choice) > 0)
            s = apply_move(s, level0_choose(s, game))[0]
    rate = evaluate_winrate(net, HeuristicPlayer(0), 20000, rng.derive(1)).win_rate
    record(2, violations == 0 and rate >= 0.99,
           f"{violations} violations over {positions} positions; win rate vs L0 {rate:.4f} (need 0, >=0.99)")


def test_c3_genome_exactness():
    rng = RngStream(3)
    genomes = [encode(decode(Genome.random(rng))) for _ in range(1000)]
    roundtrip = all(encode(decode(g)) == g for g in genomes)
    x = np.random.default_rng(3).uniform(-64, 64, (200, N_PARAMS))
    err = max(np.max(np.abs(decode(encode(Network.from_vector(v))).to_vector() - v)) for v in x)
    ok = (len(genomes[0].data) == GENOME_BYTES == 582 and quant_value(0) == -64.0
          and quant_value(1023) == 64.0 and roundtrip and err <= 64 / 1023)
    record(3, ok, f"{GENOME_BYTES} bytes, q(0)={quant_value(0)}, q(1023)={quant_value(1023)}, "
                  f"round-trip {roundtrip}, max error {err:.6f} <= {64 / 1023:.6f}")


def test_c4_games_per_generation():
    got = {}
    for variant, n in (("direct:0", 2000), ("roundrobin", 9900), ("ifs", 1650)):
        cfg = EvolutionConfig(variant=variant, generations=1, snapshot_interval=1, master_seed=4)
        got[variant] = run_evolution(cfg)[-1].cumulative_games
    ok = got == {"direct:0": 2000, "roundrobin": 9900, "ifs": 1650}
    record(4, ok, f"cumulative games after one generation {got}")


def test_c5_ifs_arithmetic():
    players = [Named(str(i)) for i in range(8)]
    (ag, (x, y)), _ = sample_ifs_pairings(8, 2, 2, RngStream(0).derive(_PAIRING))

    def wins(a, b):
        if b.name == str(ag):
            return 2 if a.name == str(x) else 1
        return 0

    fit = fitness_ifs(players, RngStream(0), antigen_fraction=0.25, antibody_fraction=0.25,
                      runner=ScriptedRunner(wins), floor=0.0)
    ok = fit.raw[x] == 26.4 and fit.raw[y] == 6.6
    record(5, ok, f"2-0 antibody {fit.raw[x]}, 1-1 antibody {fit.raw[y]} (need 26.4, 6.6)")


def test_c6_gradient_check():
    rng = RngStream(6)
    pool = generate_training_set(20, rng.derive(0), filtered=False)
    worst = 0.0
    for i in range(20):
        net = Network.random(rng.derive(1, i), 1.0)
        ex = pool[(11 * i) % len(pool)]
        a = _flat(net, loss_and_gradient(net, ex)[1])
        n = _numeric_grad(net, ex)
        worst = max(worst, np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))
    record(6, worst <= 1e-4, f"max relative error {worst:.2e} over 20 pairs (need <=1e-4)")


def test_c7_engine_vs_oracle():
    checked = mismatches = 0
    for rows, cols in ((1, 1), (1, 2)):
        for s in _all_positions(rows, cols)[1]:
            checked += 1
            mismatches += minimax_oracle(s) != _engine_negamax(s)
    empty = minimax_oracle(new_board(1, 1))
    record(7, mismatches == 0 and empty == -1,
           f"{mismatches} disagreements over {checked} positions; oracle(empty 1x1) = {empty} (need 0, -1)")


EVO_SEEDS = (0, 1, 2)
EVO_RUNS = {"direct:0": 149, "ifs": 180}


@pytest.mark.slow
def test_c8_evolution_trend():
    best = {}
    for variant, gens in EVO_RUNS.items():
        for seed in EVO_SEEDS:
            cfg = EvolutionConfig(variant=variant, generations=gens, mutation_prob=0.00072,
                                  master_seed=seed, snapshot_interval=gens)
            final = run_evolution(cfg)[-1]
            assert final.cumulative_games + cfg.games_per_generation() <= 300000
            best[variant, seed] = max(member_win_rates(final, 0, 300, RngStream(seed)))
    hits = {v: sum(best[v, s] >= 0.80 for s in EVO_SEEDS) for v in EVO_RUNS}
    detail = "; ".join(f"{v}: " + ", ".join(f"{best[v, s]:.3f}" for s in EVO_SEEDS) for v in EVO_RUNS)
    record(8, all(h >= 2 for h in hits.values()), f"best member vs L0 per seed, {detail} (need >=0.80 on 2 of 3)")


def test_c9_supervised_trend():
    deltas = []
    for seed in range(5):
        cfg = TrainerConfig(seed=seed)
        root = RngStream(seed)
        data = generate_training_set(cfg.n_games, root.derive(0))
        assert 0.75 * 7250 <= len(data) <= 1.25 * 7250
        net0 = Network.random(root.derive(1), cfg.init_scale)
        net = train_backprop(net0, data, cfg, root.derive(2))
        before = evaluate_winrate(NetworkPlayer(net0), HeuristicPlayer(0), 300, root.derive(3)).win_rate
        after = evaluate_winrate(NetworkPlayer(net), HeuristicPlayer(0), 300, root.derive(3)).win_rate
        deltas.append((before, after))
    mean_before = np.mean([b for b, _ in deltas])
    mean_after = np.mean([a for _, a in deltas])
    record(9, mean_after > mean_before,
           f"mean win rate vs L0 untrained {mean_before:.3f} -> trained {mean_after:.3f} over 5 seeds")


def test_c10_determinism(tmp_path):
    outputs = {}
    for run, workers in (("a", 1), ("b", 1), ("c", 2)):
        d = tmp_path / run
        argv = ["evolve", "--variant", "ifs", "--generations", "4", "--seed", "10",
                "--workers", str(workers), "--out", str(d / "snaps")]
        cfg = tmp_path / "small.cfg"
        cfg.write_text("population_size = 20\nsnapshot_interval = 2\n")
        assert main(argv + ["--config", str(cfg)]) == 0
        assert main(["evaluate", str(d / "snaps"), "--games", "40", "--seed", "3",
                     "--workers", str(workers), "--out", str(d / "curve.csv")]) == 0
        outputs[run] = {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
    same = outputs["a"] == outputs["b"] == outputs["c"]
    record(10, same and len(outputs["a"]) == 4,
           f"{len(outputs['a'])} files byte-identical across repeat and 1 vs 2 workers: {same}")
