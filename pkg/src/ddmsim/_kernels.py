"""Hot inner loops: Viterbi add-compare-select and 2-D local-maximum search.

Each kernel has a numba ``@njit`` version and a pure-numpy version with
identical results.  ``DDMSIM_BACKEND=numpy`` (read at import) forces the
numpy path; it is also used automatically when numba cannot be imported.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKEND = os.environ.get("DDMSIM_BACKEND", "numba").strip().lower()
if BACKEND not in ("numba", "numpy"):
    raise ImportError(f"DDMSIM_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")
if not HAVE_NUMBA:
    BACKEND = "numpy"


# ---------------------------------------------------------------------------
# Viterbi, rate 1/n feedforward code with 2**m states.
# State = last m input bits, newest in the MSB.  From state s with input u
# the register is (u << m) | s and the next state is ((u << m) | s) >> 1.
# ``signs[r, j]`` is +1/-1 for coded bit j of register r being 0/1, so the
# branch metric for LLRs (positive => bit 0) is sum_j signs[r, j] * llr[j].
# ---------------------------------------------------------------------------


def viterbi_numpy(llr: np.ndarray, signs: np.ndarray, m: int) -> np.ndarray:
    n_out = signs.shape[1]
    n_steps = llr.shape[0] // n_out
    n_states = 1 << m
    half = n_states >> 1
    ns = np.arange(n_states)
    u = ns >> (m - 1)
    # predecessors of ns: ((ns & (half-1)) << 1) | b, b = 0/1
    p0 = (ns & (half - 1)) << 1
    p1 = p0 | 1
    r0 = (u << m) | p0
    r1 = (u << m) | p1
    metric = np.full(n_states, -np.inf)
    metric[0] = 0.0
    decisions = np.empty((n_steps, n_states), dtype=np.uint8)
    llr2 = llr.reshape(n_steps, n_out)
    for t in range(n_steps):
        bm = signs @ llr2[t]
        c0 = metric[p0] + bm[r0]
        c1 = metric[p1] + bm[r1]
        pick = c1 > c0
        decisions[t] = pick
        metric = np.where(pick, c1, c0)
    out = np.empty(n_steps, dtype=np.uint8)
    state = 0
    for t in range(n_steps - 1, -1, -1):
        out[t] = state >> (m - 1)
        state = ((state & (half - 1)) << 1) | decisions[t, state]
    return out


def local_maxima_numpy(power: np.ndarray) -> np.ndarray:
    """Boolean mask of cells >= all 8 neighbours (circular on both axes), ties broken toward lower index."""
    nr, nc = power.shape
    mask = np.ones(power.shape, dtype=bool)
    idx = np.arange(nr * nc).reshape(nr, nc)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            # neighbour at (r - dr, c - dc); strict against neighbours earlier in raster order
            nb = np.roll(power, (dr, dc), axis=(0, 1))
            earlier = np.roll(idx, (dr, dc), axis=(0, 1)) < idx
            mask &= np.where(earlier, power > nb, power >= nb)
    return mask


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def viterbi_numba(llr, signs, m):  # pragma: no cover - compiled
        n_out = signs.shape[1]
        n_steps = llr.shape[0] // n_out
        n_states = 1 << m
        half = n_states >> 1
        n_reg = signs.shape[0]
        metric = np.full(n_states, -np.inf)
        metric[0] = 0.0
        new = np.empty(n_states)
        bm = np.empty(n_reg)
        decisions = np.empty((n_steps, n_states), dtype=np.uint8)
        for t in range(n_steps):
            for r in range(n_reg):
                acc = 0.0
                for j in range(n_out):
                    acc += signs[r, j] * llr[t * n_out + j]
                bm[r] = acc
            for s in range(n_states):
                u = s >> (m - 1)
                p0 = (s & (half - 1)) << 1
                c0 = metric[p0] + bm[(u << m) | p0]
                c1 = metric[p0 | 1] + bm[(u << m) | p0 | 1]
                if c1 > c0:
                    new[s] = c1
                    decisions[t, s] = 1
                else:
                    new[s] = c0
                    decisions[t, s] = 0
            for s in range(n_states):
                metric[s] = new[s]
        out = np.empty(n_steps, dtype=np.uint8)
        state = 0
        for t in range(n_steps - 1, -1, -1):
            out[t] = state >> (m - 1)
            state = ((state & (half - 1)) << 1) | decisions[t, state]
        return out

    @njit(cache=True, nogil=True)
    def local_maxima_numba(power):  # pragma: no cover - compiled
        nr, nc = power.shape
        mask = np.zeros((nr, nc), dtype=np.bool_)
        for r in range(nr):
            for c in range(nc):
                v = power[r, c]
                ok = True
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        if dr == 0 and dc == 0:
                            continue
                        rr = (r - dr) % nr
                        cc = (c - dc) % nc
                        w = power[rr, cc]
                        if rr * nc + cc < r * nc + c:
                            if not v > w:
                                ok = False
                        elif not v >= w:
                            ok = False
                mask[r, c] = ok
        return mask


def viterbi(llr: np.ndarray, signs: np.ndarray, m: int) -> np.ndarray:
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    if BACKEND == "numba":
        return viterbi_numba(llr, signs, m)
    return viterbi_numpy(llr, signs, m)


def local_maxima(power: np.ndarray) -> np.ndarray:
    power = np.ascontiguousarray(power, dtype=np.float64)
    if BACKEND == "numba":
        return local_maxima_numba(power)
    return local_maxima_numpy(power)
