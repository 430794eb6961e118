"""DFT/IDFT, oscillation vectors and windowed-DFT responses.

Normalization convention used everywhere in the package: the forward
transform is unnormalized, ``[F_N]_{l,k} = exp(-j 2 pi l k / N)``, and the
inverse carries the 1/N factor so that ``idft(dft(x)) == x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

WINDOW_KINDS = ("rectangular", "hann", "hamming", "chebyshev")


def _check_pow2(n: int) -> None:
    if n < 1 or n & (n - 1):
        raise ValueError(f"transform length {n} is not a power of two")


def dft(x: np.ndarray, axis: int = 0) -> np.ndarray:
    x = np.asarray(x)
    _check_pow2(x.shape[axis])
    return np.fft.fft(x, axis=axis)


def idft(x: np.ndarray, axis: int = 0) -> np.ndarray:
    x = np.asarray(x)
    _check_pow2(x.shape[axis])
    return np.fft.ifft(x, axis=axis)


def dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def osc_vector(n: int, f: float) -> np.ndarray:
    """``[1, e^{j2 pi f}, ..., e^{j2 pi f (n-1)}]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.exp(2j * np.pi * f * np.arange(n))


def osc_matrix(n: int, f: float) -> np.ndarray:
    return np.diag(osc_vector(n, f))


@dataclass(frozen=True)
class Window:
    kind: str
    coeffs: np.ndarray

    def __len__(self) -> int:
        return len(self.coeffs)


def make_window(kind: str, n: int, cheb_atten: float = 60.0) -> Window:
    """DFT-even (periodic) windows, so on-grid tones leak into a fixed set of bins."""
    kind = kind.lower()
    if kind in ("rect", "rectangular", "boxcar"):
        return Window("rectangular", np.ones(n))
    if kind in ("hann", "hanning"):
        return Window("hann", get_window("hann", n, fftbins=True))
    if kind == "hamming":
        return Window("hamming", get_window("hamming", n, fftbins=True))
    if kind in ("cheb", "chebyshev", "chebwin"):
        return Window("chebyshev", get_window(("chebwin", cheb_atten), n, fftbins=True))
    raise ValueError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")


def windowed_response(n: int, f: float, w: Window) -> np.ndarray:
    """``F_N diag(w) d_N(f)``; peaks at bin ``f*N``."""
    if len(w) != n:
        raise ValueError(f"window length {len(w)} does not match N={n}")
    return dft(w.coeffs * osc_vector(n, f))
