# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled game kernel.

Plays complete games between heuristic and network players without touching
Python objects inside the move loop.  Random draws come from the caller's
numpy bit generator and are reduced exactly as :meth:`RngStream.pick` does,
so results match :mod:`dotsnet._pycore` game for game.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp
from libc.stdint cimport uint64_t
from numpy.random cimport bitgen_t

import numpy as np

BACKEND = "cython"

cdef enum:
    MAX_EDGES = 1024
    MAX_BOXES = 512
    NET_IN = 24
    NET_HID = 9
    NET_OUT = 24

cdef enum:
    LEVEL0 = 0
    LEVEL1 = 1
    LEVEL2 = 2
    NETWORK = 3


cdef struct Board:
    int rows
    int cols
    int n_edges
    int n_boxes
    int edge_boxes[MAX_EDGES][2]
    char occ[MAX_EDGES]
    int sides[MAX_BOXES]
    int score[2]
    int to_move
    int moves


cdef struct Net:
    const double* hw
    const double* ht
    const double* ow
    const double* ot


cdef struct Agent:
    int kind
    Net net


cdef inline int draw_below(bitgen_t* bg, int n) nogil:
    cdef uint64_t raw = bg.next_uint64(bg.state)
    return <int>(((raw >> 32) * <uint64_t>n) >> 32)


cdef inline int pick(bitgen_t* bg, int* cands, int n) nogil:
    if n == 1:
        return cands[0]
    return cands[draw_below(bg, n)]


cdef void board_init(Board* b, int rows, int cols) nogil:
    cdef int r, c, e, box, k
    cdef int n_h = cols * (rows + 1)
    b.rows = rows
    b.cols = cols
    b.n_edges = n_h + rows * (cols + 1)
    b.n_boxes = rows * cols
    for e in range(b.n_edges):
        b.edge_boxes[e][0] = -1
        b.edge_boxes[e][1] = -1
        b.occ[e] = 0
    for box in range(b.n_boxes):
        b.sides[box] = 0
    for r in range(rows):
        for c in range(cols):
            box = r * cols + c
            for k in range(4):
                if k == 0:
                    e = r * cols + c
                elif k == 1:
                    e = (r + 1) * cols + c
                elif k == 2:
                    e = n_h + r * (cols + 1) + c
                else:
                    e = n_h + r * (cols + 1) + c + 1
                if b.edge_boxes[e][0] < 0:
                    b.edge_boxes[e][0] = box
                else:
                    b.edge_boxes[e][1] = box
    b.score[0] = 0
    b.score[1] = 0
    b.to_move = 0
    b.moves = 0


cdef void board_reset(Board* b) nogil:
    cdef int i
    for i in range(b.n_edges):
        b.occ[i] = 0
    for i in range(b.n_boxes):
        b.sides[i] = 0
    b.score[0] = 0
    b.score[1] = 0
    b.to_move = 0
    b.moves = 0


cdef int board_apply(Board* b, int e) nogil:
    cdef int gained = 0
    cdef int i, box
    b.occ[e] = 1
    b.moves += 1
    for i in range(2):
        box = b.edge_boxes[e][i]
        if box >= 0:
            b.sides[box] += 1
            if b.sides[box] == 4:
                gained += 1
    b.score[b.to_move] += gained
    if gained == 0 or b.moves == b.n_edges:
        b.to_move = 1 - b.to_move
    return gained


cdef int choose_heuristic(Board* b, int level, bitgen_t* bg) nogil:
    cdef int legal[MAX_EDGES]
    cdef int completing[MAX_EDGES]
    cdef int safe[MAX_EDGES]
    cdef int n_legal = 0, n_comp = 0, n_safe = 0
    cdef int best = 0
    cdef int e, i, box, closes, third, n
    for e in range(b.n_edges):
        if b.occ[e]:
            continue
        legal[n_legal] = e
        n_legal += 1
        if level == LEVEL0:
            continue
        closes = 0
        third = 0
        for i in range(2):
            box = b.edge_boxes[e][i]
            if box >= 0:
                n = b.sides[box]
                if n == 3:
                    closes += 1
                elif n == 2:
                    third = 1
        if closes:
            if closes > best:
                best = closes
                completing[0] = e
                n_comp = 1
            elif closes == best:
                completing[n_comp] = e
                n_comp += 1
        elif not third:
            safe[n_safe] = e
            n_safe += 1
    if level != LEVEL0 and n_comp:
        return pick(bg, completing, n_comp)
    if level == LEVEL2 and n_safe:
        return pick(bg, safe, n_safe)
    return pick(bg, legal, n_legal)


cdef inline double logistic(double s) nogil:
    cdef double z
    if s >= 0.0:
        return 1.0 / (1.0 + exp(-s))
    z = exp(s)
    return z / (1.0 + z)


cdef void net_outputs(const Net* net, const char* occ, double* out) nogil:
    cdef double hidden[NET_HID]
    cdef double s
    cdef int j, e, k
    for j in range(NET_HID):
        s = 0.0
        for e in range(NET_IN):
            if occ[e]:
                s += net.hw[j * NET_IN + e]
        hidden[j] = logistic(s - net.ht[j])
    for k in range(NET_OUT):
        s = 0.0
        for j in range(NET_HID):
            s += net.ow[k * NET_HID + j] * hidden[j]
        out[k] = logistic(s - net.ot[k])


cdef int choose_network(Board* b, const Net* net, bitgen_t* bg) nogil:
    cdef double out[NET_OUT]
    cdef int cands[NET_OUT]
    cdef int n = 0
    cdef double best = -1.0
    cdef int e
    net_outputs(net, b.occ, out)
    for e in range(NET_OUT):
        if b.occ[e]:
            continue
        if out[e] > best:
            best = out[e]
            cands[0] = e
            n = 1
        elif out[e] == best:
            cands[n] = e
            n += 1
    return pick(bg, cands, n)


cdef int choose(Board* b, const Agent* agent, bitgen_t* bg) nogil:
    if agent.kind == NETWORK:
        return choose_network(b, &agent.net, bg)
    return choose_heuristic(b, agent.kind, bg)


cdef void play_one(Board* b, const Agent* first, const Agent* second, bitgen_t* bg) nogil:
    cdef int e
    board_reset(b)
    while b.moves < b.n_edges:
        if b.to_move == 0:
            e = choose(b, first, bg)
        else:
            e = choose(b, second, bg)
        board_apply(b, e)


cdef class _Holder:
    """Keeps the parameter arrays a Net points into alive."""
    cdef object arrays
    cdef Agent agent

    def __cinit__(self, int kind, params, int rows, int cols):
        cdef const double[::1] hw, ht, ow, ot
        if kind not in (LEVEL0, LEVEL1, LEVEL2, NETWORK):
            raise ValueError(f"unknown player kind {kind}")
        self.agent.kind = kind
        self.arrays = None
        if kind == NETWORK:
            if rows != 3 or cols != 3:
                raise ValueError("network players need a 3x3 board")
            arrays = tuple(np.ascontiguousarray(a, dtype=np.float64).ravel() for a in params)
            if tuple(a.shape[0] for a in arrays) != (NET_HID * NET_IN, NET_HID, NET_OUT * NET_HID, NET_OUT):
                raise ValueError("network parameter arrays have the wrong shapes")
            self.arrays = arrays
            hw, ht, ow, ot = arrays
            self.agent.net.hw = &hw[0]
            self.agent.net.ht = &ht[0]
            self.agent.net.ow = &ow[0]
            self.agent.net.ot = &ot[0]


cdef bitgen_t* _bitgen(rng) except NULL:
    return <bitgen_t*>PyCapsule_GetPointer(rng.bitgen.capsule, "BitGenerator")


def play_game(int rows, int cols, spec1, spec2, rng):
    """One game on a fresh board; returns (P1 boxes, P2 boxes)."""
    cdef Board b
    cdef _Holder h1, h2
    cdef bitgen_t* bg
    _check_size(rows, cols)
    h1 = _Holder(spec1.kind, spec1.params, rows, cols)
    h2 = _Holder(spec2.kind, spec2.params, rows, cols)
    bg = _bitgen(rng)
    board_init(&b, rows, cols)
    with rng.bitgen.lock:
        with nogil:
            play_one(&b, &h1.agent, &h2.agent, bg)
    return b.score[0], b.score[1]


def play_games(int rows, int cols, spec_a, spec_b, long n_games, rng):
    """``n_games`` games with ``a`` moving first in the even-numbered ones.

    Returns (a's wins moving first, a's wins moving second, ties).
    """
    cdef Board b
    cdef _Holder ha, hb
    cdef bitgen_t* bg
    cdef long i
    cdef long won_first = 0, won_second = 0, ties = 0
    cdef int s_a, s_b
    _check_size(rows, cols)
    ha = _Holder(spec_a.kind, spec_a.params, rows, cols)
    hb = _Holder(spec_b.kind, spec_b.params, rows, cols)
    bg = _bitgen(rng)
    board_init(&b, rows, cols)
    with rng.bitgen.lock:
        with nogil:
            for i in range(n_games):
                if i % 2 == 0:
                    play_one(&b, &ha.agent, &hb.agent, bg)
                    s_a = b.score[0]
                    s_b = b.score[1]
                else:
                    play_one(&b, &hb.agent, &ha.agent, bg)
                    s_a = b.score[1]
                    s_b = b.score[0]
                if s_a > s_b:
                    if i % 2 == 0:
                        won_first += 1
                    else:
                        won_second += 1
                elif s_a == s_b:
                    ties += 1
    return won_first, won_second, ties


def net_scores(params, int mask):
    """Output activations for the board given as an edge bitmask."""
    cdef _Holder h
    cdef char occ[NET_IN]
    cdef double out[NET_OUT]
    cdef int e
    h = _Holder(NETWORK, params, 3, 3)
    for e in range(NET_IN):
        occ[e] = (mask >> e) & 1
    net_outputs(&h.agent.net, occ, out)
    return [out[e] for e in range(NET_OUT)]


def _check_size(int rows, int cols):
    if rows < 1 or cols < 1:
        raise ValueError("board needs at least one box row and column")
    if cols * (rows + 1) + rows * (cols + 1) > MAX_EDGES or rows * cols > MAX_BOXES:
        raise ValueError("board too large for the compiled kernel")
