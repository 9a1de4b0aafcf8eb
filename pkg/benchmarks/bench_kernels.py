"""Compare the compiled kernel with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--games N] [--repeat R]

Both backends consume the same random draws, so the game outcomes printed
for each backend must agree exactly; only the timings should differ.
"""
import argparse
import time

from dotsnet import kernels
from dotsnet.genome import Genome, decode
from dotsnet.players import PlayerSpec
from dotsnet.rng import RngStream


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--games", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    net = decode(Genome.random(RngStream(1))).spec
    cases = {
        "level2 vs level1": (PlayerSpec(2), PlayerSpec(1)),
        "network vs level0": (net, PlayerSpec(0)),
    }
    names = ["python"]
    try:
        kernels.backend("cython")
        names.insert(0, "cython")
    except ImportError:
        print("compiled kernel not built; timing the Python fallback only")

    print(f"{'case':20} {'backend':8} {'games/s':>12} {'outcome':>20}")
    for case, (a, b) in cases.items():
        rates = {}
        for name in names:
            k = kernels.backend(name)
            secs, out = _time(lambda: k.play_games(3, 3, a, b, args.games, RngStream(0)), args.repeat)
            rates[name] = args.games / secs
            print(f"{case:20} {name:8} {rates[name]:12.0f} {str(out):>20}")
        if len(rates) == 2:
            print(f"{'':20} speed-up {rates['cython'] / rates['python']:.1f}x")


if __name__ == "__main__":
    main()
