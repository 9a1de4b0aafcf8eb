"""Command-line driver.

Exit status is 0 on success, 1 for usage or configuration errors and 2 when
a run fails.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .config import ConfigError, load_config
from .evolution import EvolutionConfig, read_snapshot, run_evolution, snapshot_filename, write_snapshot
from .game_core import parse_board, render
from .harness import (
    OracleLimitError,
    evaluate_snapshots,
    evaluate_winrate,
    export_csv,
    make_player,
    minimax_oracle,
    oracle_moves,
)
from .network import Network, save_network
from .rng import RngStream
from .supervised import (
    TrainerConfig,
    dataset_loss,
    generate_training_set,
    read_training_set,
    train_backprop,
    write_training_set,
)

log = logging.getLogger("dotsnet")

LADDER = [("level1", "level0"), ("level2", "level0"), ("level2", "level1"), ("level0", "level0")]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--out", default=None, help=out_help)
    p.add_argument("--config", default=None, help="key=value configuration file")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dotsnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="heuristic benchmark tournaments")
    _common(p, "CSV of win-rate records (default: print only)")
    p.add_argument("--games", type=int, default=20000)
    p.add_argument("--pair", action="append", metavar="A,B",
                   help="subject,opponent player selectors; repeatable (default: the level ladder)")

    p = sub.add_parser("evolve", help="run a genetic-algorithm variant")
    _common(p, "directory for snapshot files (required)")
    p.add_argument("--variant", default=None, help="override the configured variant")
    p.add_argument("--generations", type=int, default=None)

    p = sub.add_parser("train", help="back-propagation baseline")
    _common(p, "network file to write (required)")
    p.add_argument("--data", default=None, help="read the training set from this file instead of generating it")
    p.add_argument("--save-data", default=None, help="also write the generated training set here")

    p = sub.add_parser("evaluate", help="evaluate snapshots against a heuristic player")
    _common(p, "CSV curve file (required)")
    p.add_argument("snapshots", nargs="+", help="snapshot files or directories of them")
    p.add_argument("--opponent", type=int, choices=(0, 1), default=0)
    p.add_argument("--games", type=int, default=300, help="games per population member")

    p = sub.add_parser("oracle", help="solve a small position exactly")
    _common(p, "write the result here as well as printing it")
    p.add_argument("position", help="file holding an ASCII board picture")
    p.add_argument("--max-remaining", type=int, default=12)
    p.add_argument("--to-move", type=int, choices=(1, 2), default=1)
    return parser


def _seed(args, default: int = 0) -> int:
    return default if args.seed is None else args.seed


def _emit(text: str, out: str | None) -> None:
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def cmd_simulate(args) -> None:
    if args.config:
        raise UsageError("simulate takes no config file")
    pairs = [tuple(s.split(",")) for s in args.pair] if args.pair else LADDER
    if any(len(p) != 2 for p in pairs):
        raise UsageError("--pair expects two comma-separated selectors")
    rng = RngStream(_seed(args))
    records = []
    for k, (a, b) in enumerate(pairs):
        rec = evaluate_winrate(make_player(a), make_player(b), args.games, rng.derive(k), args.workers)
        records.append(rec)
        print(f"{rec.subject} vs {rec.opponent}: {rec.wins}/{rec.games} = {rec.win_rate:.4f} +- {rec.ci95:.4f}")
    if args.out:
        export_csv(records, args.out, kind="records")


def cmd_evolve(args) -> None:
    if not args.out:
        raise UsageError("evolve needs --out DIRECTORY")
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.variant is not None:
        overrides["variant"] = args.variant
    if args.generations is not None:
        overrides["generations"] = args.generations
    cfg = load_config(args.config, EvolutionConfig, overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("evolving %s", asdict(cfg))

    def save(s):
        write_snapshot(s, out / snapshot_filename(s.generation))
        log.info("snapshot gen=%d games=%d best raw=%.4f", s.generation, s.cumulative_games, max(s.raw_fitness))

    snaps = run_evolution(cfg, workers=args.workers, on_snapshot=save)
    print(f"wrote {len(snaps)} snapshots to {out}")


def cmd_train(args) -> None:
    if not args.out:
        raise UsageError("train needs --out FILE")
    overrides = {} if args.seed is None else {"seed": args.seed}
    cfg = load_config(args.config, TrainerConfig, overrides)
    root = RngStream(cfg.seed)
    if args.data:
        data = read_training_set(args.data)
    else:
        data = generate_training_set(cfg.n_games, root.derive(0))
    if args.save_data:
        write_training_set(data, args.save_data)
    net0 = Network.random(root.derive(1), cfg.init_scale)
    net = train_backprop(net0, data, cfg, root.derive(2))
    save_network(net, args.out)
    print(f"{len(data)} examples; loss {dataset_loss(net0, data, cfg.target_scale):.2f} -> "
          f"{dataset_loss(net, data, cfg.target_scale):.2f}; wrote {args.out}")


def _snapshot_paths(items) -> list[Path]:
    paths = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("snapshot_*.txt")))
        elif p.exists():
            paths.append(p)
        else:
            raise UsageError(f"no such snapshot file or directory: {item}")
    if not paths:
        raise UsageError("no snapshot files found")
    return paths


def cmd_evaluate(args) -> None:
    if not args.out:
        raise UsageError("evaluate needs --out FILE")
    if args.config:
        raise UsageError("evaluate takes no config file")
    if args.games < 2 or args.games % 2:
        raise UsageError("--games must be even and at least 2")
    snaps = [read_snapshot(p) for p in _snapshot_paths(args.snapshots)]
    curve = evaluate_snapshots(snaps, args.opponent, args.games, RngStream(_seed(args)), args.workers)
    export_csv(curve, args.out, kind="curve")
    for pt in curve:
        print(f"{pt.variant} games={pt.cumulative_games} best={pt.best_win_rate:.4f}")


def cmd_oracle(args) -> None:
    if args.config:
        raise UsageError("oracle takes no config file")
    try:
        text = Path(args.position).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.position}: {exc.strerror}") from None
    try:
        state = parse_board(text, to_move=args.to_move - 1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    value = minimax_oracle(state, args.max_remaining)
    _emit(f"{render(state)}\nvalue={value} best_moves={','.join(map(str, oracle_moves(state)))}", args.out)


COMMANDS = {
    "simulate": cmd_simulate,
    "evolve": cmd_evolve,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigError, OracleLimitError) as exc:
        print(f"dotsnet {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report any run failure as exit 2
        log.debug("run failed", exc_info=True)
        print(f"dotsnet {args.command}: failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
