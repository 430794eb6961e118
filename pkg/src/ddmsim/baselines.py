"""SISO and equidistant-subcarrier-interleaving (ESI) reference links.

The ESI receiver is the standard construction: per-antenna BLUE of the CIR
from that antenna's comb of preamble subcarriers, then single-tap LMMSE
equalization and the same pilot CPE synchronisation as the DDM receiver.
"""
from __future__ import annotations

import numpy as np

from .comm_rx import RxResult, blue_cir, receive_frame
from .frame import FrameLayout, SymbolFrame, build_frame
from .params import ConfigError, WaveformConfig


def esi_allocation(N_c: int, N_Tx: int) -> list[np.ndarray]:
    if N_c % N_Tx:
        raise ConfigError("N_c_esi", f"N_c={N_c} not divisible by N_Tx={N_Tx}")
    return [np.arange(k, N_c, N_Tx) for k in range(N_Tx)]


def esi_masks(N_c: int, N_Tx: int) -> np.ndarray:
    m = np.zeros((N_Tx, N_c))
    for k, comb in enumerate(esi_allocation(N_c, N_Tx)):
        m[k, comb] = 1.0
    return m


def esi_grids(S: np.ndarray, N_Tx: int) -> np.ndarray:
    """Antenna k sends only its comb, amplitude sqrt(N_Tx) so total power matches all-antenna DDM."""
    return np.sqrt(N_Tx) * esi_masks(S.shape[0], N_Tx)[:, :, None] * S[None]


def esi_frame(
    payload: np.ndarray, cfg: WaveformConfig, layout: FrameLayout | None = None
) -> tuple[SymbolFrame, np.ndarray]:
    if cfg.bundle_size != 1:
        raise ConfigError("bundle_size", "ESI frames carry no bundle redundancy (bundle_size must be 1)")
    fr = build_frame(payload, cfg, layout)
    return fr, esi_grids(fr.S, cfg.N_Tx)


def esi_effective_cfr(p: np.ndarray) -> np.ndarray:
    """Per-subcarrier channel seen by the receiver: sqrt(N_Tx) p_{n mod N_Tx}[n]; shape (1, N_c)."""
    n_tx, n_c = p.shape
    return (np.sqrt(n_tx) * p[np.arange(n_c) % n_tx, np.arange(n_c)])[None, :]


def esi_estimator(x_pr: np.ndarray, N_Tx: int, n_taps: int):
    n_c = len(x_pr)
    combs = esi_allocation(n_c, N_Tx)
    if n_c // N_Tx < n_taps:
        raise ConfigError("esi_comb", f"comb of {n_c // N_Tx} subcarriers cannot resolve {n_taps} taps")
    x_eff = np.sqrt(N_Tx) * x_pr

    def estimate(zbar: np.ndarray) -> np.ndarray:
        h = np.empty(n_c, dtype=np.complex128)
        for comb in combs:
            f_hat = blue_cir(zbar[0][comb], x_eff, n_taps, rows=comb)
            h[comb] = np.sqrt(N_Tx) * np.exp(-2j * np.pi * np.outer(comb, np.arange(n_taps)) / n_c) @ f_hat
        return h[None, :]

    return estimate


def esi_receive_chain(
    Y: np.ndarray,
    layout: FrameLayout,
    cfg: WaveformConfig,
    sigma2: float,
    *,
    coded: bool = True,
    h: np.ndarray | None = None,
    cpe: np.ndarray | None = None,
) -> RxResult:
    est = None if h is not None else esi_estimator(layout.x_pr, cfg.N_Tx, cfg.cir_len)
    return receive_frame(
        Y, layout, sigma2, n_taps=cfg.cir_len, fold_sign=1.0, coded=coded, h=h, cpe=cpe, estimator=est
    )


def siso_chain(
    Y: np.ndarray,
    layout: FrameLayout,
    cfg: WaveformConfig,
    sigma2: float,
    *,
    coded: bool = True,
    h: np.ndarray | None = None,
    cpe: np.ndarray | None = None,
) -> RxResult:
    if cfg.N_Tx != 1:
        raise ConfigError("N_Tx", "SISO chain needs N_Tx == 1")
    return receive_frame(Y, layout, sigma2, n_taps=cfg.cir_len, fold_sign=1.0, coded=coded, h=h, cpe=cpe)
