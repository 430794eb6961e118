"""Transmit frame: payload grid X, bundling S = X B, DDM phase coding, CP-OFDM."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coding
from .dsp import idft
from .params import ConfigError, WaveformConfig, derive_params

LAYOUT_SEED = 0x5EED
INTERLEAVER_SEED = 0x1EAF


@dataclass(frozen=True)
class DdmPhaseSet:
    p: np.ndarray  # integer velocity-bin shift per antenna
    N_sym: int

    @property
    def dpsi(self) -> np.ndarray:
        return 2 * np.pi * self.p / self.N_sym

    @property
    def N_Tx(self) -> int:
        return len(self.p)

    def symbol_phasors(self) -> np.ndarray:
        """(N_Tx, N_sym) array of exp(j mu dpsi_k), computed from p*mu mod N_sym."""
        mu = np.arange(self.N_sym)
        return np.exp(2j * np.pi * (np.outer(self.p, mu) % self.N_sym) / self.N_sym)


def ddm_phase_set(N_Tx: int, N_sym: int) -> DdmPhaseSet:
    """Phase increments that place antenna k at the centre of the k-th of N_Tx equal velocity areas."""
    if N_Tx < 1:
        raise ConfigError("N_Tx", "need at least one transmit antenna")
    if N_Tx > 1 and N_sym % (2 * N_Tx):
        raise ConfigError("N_sym_ddm", f"N_sym={N_sym} not divisible by 2*N_Tx={2 * N_Tx}")
    if N_Tx == 1:
        return DdmPhaseSet(np.zeros(1, dtype=np.int64), N_sym)
    k = np.arange(N_Tx)
    p = (2 * k + 1 - N_Tx) * (N_sym // (2 * N_Tx))
    return DdmPhaseSet(p.astype(np.int64), N_sym)


def phase_set_from_bins(p, N_sym: int) -> DdmPhaseSet:
    return DdmPhaseSet(np.asarray(p, dtype=np.int64), N_sym)


@dataclass(frozen=True)
class FrameLayout:
    N_c: int
    N_sym: int
    bundle: int
    N_pr: int
    pilot_idx: np.ndarray
    data_idx: np.ndarray
    x_pr: np.ndarray
    pilot_values: np.ndarray

    @property
    def n_cols(self) -> int:
        return self.N_sym // self.bundle

    @property
    def n_pr_cols(self) -> int:
        return self.N_pr // self.bundle

    @property
    def n_payload_cols(self) -> int:
        return self.n_cols - self.n_pr_cols

    @property
    def N_d(self) -> int:
        return len(self.data_idx)


def _unit_qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    return coding.qpsk_map(rng.integers(0, 2, 2 * n))


def pilot_indices(N_c: int, N_p: int, N_Tx: int = 1) -> np.ndarray:
    """Equidistant pilots; pilot i is offset by i mod N_Tx so combs of every antenna carry pilots."""
    if N_p == 0:
        return np.zeros(0, dtype=np.int64)
    step = N_c // N_p
    i = np.arange(N_p)
    return i * step + (i % N_Tx) % step


def make_layout(cfg: WaveformConfig, seed: int = LAYOUT_SEED) -> FrameLayout:
    cfg.validate()
    rng = np.random.default_rng(seed)
    x_pr = _unit_qpsk(rng, cfg.N_c)
    pilot_idx = pilot_indices(cfg.N_c, cfg.N_p, cfg.N_Tx)
    data_idx = np.setdiff1d(np.arange(cfg.N_c), pilot_idx)
    return FrameLayout(
        N_c=cfg.N_c,
        N_sym=cfg.N_sym,
        bundle=cfg.bundle_size,
        N_pr=cfg.N_pr,
        pilot_idx=pilot_idx,
        data_idx=data_idx,
        x_pr=x_pr,
        pilot_values=_unit_qpsk(rng, cfg.N_p),
    )


@dataclass(frozen=True)
class Capacity:
    data_symbols: int
    coded_bits: int
    info_bits: int


def frame_capacity(cfg: WaveformConfig) -> Capacity:
    N_d = cfg.N_c - cfg.N_p
    cols = (cfg.N_sym - cfg.N_pr) // cfg.bundle_size
    n_sym = N_d * cols
    coded = cfg.bits_per_symbol * n_sym
    info = coding.info_length(coded) if cfg.code_rate < 1 else coded
    return Capacity(n_sym, coded, info)


@dataclass(frozen=True)
class SymbolFrame:
    X: np.ndarray  # (N_c, N_sym/bundle)
    S: np.ndarray  # (N_c, N_sym)
    layout: FrameLayout
    payload: np.ndarray
    coded_bits: np.ndarray


def bundle_expand(X: np.ndarray, bundle: int) -> np.ndarray:
    """S = X B with B repeating every column ``bundle`` times."""
    return np.repeat(X, bundle, axis=1)


def build_frame(
    payload: np.ndarray,
    cfg: WaveformConfig,
    layout: FrameLayout | None = None,
    interleaver_seed: int = INTERLEAVER_SEED,
) -> SymbolFrame:
    layout = layout or make_layout(cfg)
    cap = frame_capacity(cfg)
    payload = np.asarray(payload, dtype=np.int8)
    if payload.size != cap.info_bits:
        raise ValueError(f"payload has {payload.size} bits, frame capacity is {cap.info_bits}")
    coded = coding.conv_encode(payload) if cfg.code_rate < 1 else payload.copy()
    mapped = coding.qpsk_map(coding.interleave(coded, interleaver_seed))

    X = np.empty((cfg.N_c, layout.n_cols), dtype=np.complex128)
    X[:, : layout.n_pr_cols] = layout.x_pr[:, None]
    body = X[:, layout.n_pr_cols :]
    body[layout.pilot_idx, :] = layout.pilot_values[:, None]
    # data symbols fill subcarriers first, then payload columns
    body[layout.data_idx, :] = mapped.reshape(layout.n_payload_cols, layout.N_d).T
    return SymbolFrame(X=X, S=bundle_expand(X, layout.bundle), layout=layout, payload=payload, coded_bits=coded)


def apply_ddm_coding(S: np.ndarray, phases: DdmPhaseSet) -> np.ndarray:
    """Per-antenna grids S_k = S diag(d(dpsi_k / 2 pi)), shape (N_Tx, N_c, N_sym)."""
    if S.shape[1] != phases.N_sym:
        raise ValueError(f"S has {S.shape[1]} symbols, phase set is for {phases.N_sym}")
    return S[None, :, :] * phases.symbol_phasors()[:, None, :]


def to_time_domain(S_k: np.ndarray, cfg: WaveformConfig, power_scale: float = 1.0) -> np.ndarray:
    """CP-OFDM sample streams, shape (N_Tx, N_sym * (N_c + N_cp))."""
    S_k = np.asarray(S_k)
    if S_k.ndim == 2:
        S_k = S_k[None]
    n_cp = derive_params(cfg).N_cp
    if S_k.shape[1:] != (cfg.N_c, cfg.N_sym):
        raise ValueError(f"grid shape {S_k.shape[1:]} does not match (N_c, N_sym)=({cfg.N_c}, {cfg.N_sym})")
    td = idft(S_k, axis=1) * power_scale
    with_cp = np.concatenate([td[:, td.shape[1] - n_cp :, :], td], axis=1)
    # column-major stacking: symbol after symbol
    return with_cp.transpose(0, 2, 1).reshape(S_k.shape[0], -1)


def remove_cp(samples: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Inverse of the CP framing for one stream: (N_sym*(N_c+N_cp),) -> (N_c, N_sym)."""
    n_cp = derive_params(cfg).N_cp
    blocks = np.asarray(samples).reshape(cfg.N_sym, cfg.N_c + n_cp)
    return blocks[:, n_cp:].T
