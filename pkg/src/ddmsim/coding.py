"""Bit chain: rate-1/2 convolutional code, interleaver, Gray QPSK and LLRs.

LLR sign convention: ``llr > 0`` means bit 0 is more likely.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

CONSTRAINT_LEN = 7
GENERATORS = (0o133, 0o171)
MEMORY = CONSTRAINT_LEN - 1
LLR_CAP = 1e4
_SQRT2 = np.sqrt(2.0)


def _taps(g: int) -> np.ndarray:
    """Generator taps, index 0 = newest input bit."""
    return np.array([(g >> (MEMORY - i)) & 1 for i in range(CONSTRAINT_LEN)], dtype=np.int64)


def _branch_signs() -> np.ndarray:
    reg = np.arange(1 << CONSTRAINT_LEN)
    cols = []
    for g in GENERATORS:
        parity = np.array([bin(r & g).count("1") & 1 for r in reg])
        cols.append(1.0 - 2.0 * parity)
    return np.stack(cols, axis=1)


_SIGNS = _branch_signs()


def coded_length(n_info: int) -> int:
    return len(GENERATORS) * (n_info + MEMORY)


def info_length(n_coded: int) -> int:
    """Largest payload whose terminated codeword fits in ``n_coded`` bits."""
    return n_coded // len(GENERATORS) - MEMORY


def conv_encode(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("payload must be a non-empty 1-D bit array")
    u = np.concatenate([bits, np.zeros(MEMORY, dtype=np.int64)])
    out = np.empty((u.size, len(GENERATORS)), dtype=np.int8)
    for j, g in enumerate(GENERATORS):
        out[:, j] = np.convolve(u, _taps(g))[: u.size] & 1
    return out.reshape(-1)


def viterbi_decode(llrs: np.ndarray) -> np.ndarray:
    """Soft-input ML decoding of a zero-terminated codeword; returns the payload bits."""
    llrs = np.asarray(llrs, dtype=np.float64)
    n_out = len(GENERATORS)
    if llrs.ndim != 1 or llrs.size % n_out or llrs.size // n_out <= MEMORY:
        raise ValueError(f"LLR length {llrs.size} is not a terminated rate-1/{n_out} codeword")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    decoded = _kernels.viterbi(llrs, _SIGNS, MEMORY)
    return decoded[:-MEMORY]


# --- interleaver -----------------------------------------------------------


def interleaver_perm(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def interleave(bits: np.ndarray, seed: int) -> np.ndarray:
    bits = np.asarray(bits)
    return bits[interleaver_perm(bits.size, seed)]


def deinterleave(values: np.ndarray, seed: int) -> np.ndarray:
    values = np.asarray(values)
    perm = interleaver_perm(values.size, seed)
    out = np.empty_like(values)
    out[perm] = values
    return out


# --- QPSK ------------------------------------------------------------------


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray mapping, unit energy: bit pair (b0, b1) -> ((1-2 b0) + j (1-2 b1)) / sqrt(2)."""
    bits = np.asarray(bits)
    if bits.size % 2:
        raise ValueError("QPSK needs an even number of bits")
    b = bits.reshape(-1, 2).astype(np.float64)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / _SQRT2


def qpsk_llr(y, h_eff, sigma2) -> tuple[np.ndarray, np.ndarray]:
    """Exact (= max-log for Gray QPSK) LLRs for ``y = h_eff * s + n``, ``n ~ CN(0, sigma2)``."""
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    if np.any(sigma2 <= 0):
        raise ValueError("noise variance must be positive")
    metric = 2 * _SQRT2 * np.conj(h_eff) * np.asarray(y) / sigma2
    return (
        np.clip(metric.real, -LLR_CAP, LLR_CAP),
        np.clip(metric.imag, -LLR_CAP, LLR_CAP),
    )


def qpsk_llr_stream(y, h_eff, sigma2) -> np.ndarray:
    """LLRs interleaved as [b0, b1, b0, b1, ...] in symbol order."""
    l0, l1 = qpsk_llr(y, h_eff, sigma2)
    return np.stack([np.ravel(l0), np.ravel(l1)], axis=1).reshape(-1)


def hard_bits(llrs: np.ndarray) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
