import random

import pytest

from dotsnet import kernels
from dotsnet.game_core import BoardState, apply_move, geometry, legal_moves
from dotsnet.rng import RngStream

BACKENDS = ["python"]
try:
    kernels.backend("cython")
    BACKENDS.insert(0, "cython")
except ImportError:
    pass


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.backend(request.param)


def random_states(n, rows=3, cols=3, seed=0, include_terminal=False):
    """Positions reached by random play, one per random stopping point."""
    r = random.Random(seed)
    out = []
    geom = geometry(rows, cols)
    while len(out) < n:
        state = BoardState(geom)
        stop = r.randrange(geom.edge_count + (1 if include_terminal else 0))
        for _ in range(stop):
            state, _ = apply_move(state, r.choice(legal_moves(state)))
        out.append(state)
    return out


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
