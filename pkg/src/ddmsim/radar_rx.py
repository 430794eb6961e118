"""Range-Doppler processing, detection and bin -> (range, velocity, antenna) mapping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dsp import dft, idft, make_window
from .frame import DdmPhaseSet
from .params import DerivedParams

GUARD = 3
SNR_CAP_DB = 300.0


@dataclass(frozen=True)
class RangeDopplerMap:
    Z: np.ndarray  # (N_c, N_sym); rows = range bins, cols = velocity bins (unshifted DFT order)
    range_window: str
    doppler_window: str
    phases: DdmPhaseSet | None = None

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.Z) ** 2


@dataclass(frozen=True)
class Detection:
    range_bin: int
    vel_bin: int  # signed, in [-N_sym/2, N_sym/2)
    amplitude: complex
    antenna: int = -1
    range_m: float = float("nan")
    velocity_mps: float = float("nan")

    @property
    def mag_db(self) -> float:
        return 20 * np.log10(max(abs(self.amplitude), 1e-300))


def compute_rdm(
    Y: np.ndarray,
    S: np.ndarray,
    range_window: str = "hann",
    doppler_window: str = "hann",
    phases: DdmPhaseSet | None = None,
) -> RangeDopplerMap:
    """Column DFT, division by the *uncoded* S, windowed range IDFT, windowed Doppler DFT."""
    Y = np.asarray(Y)
    S = np.asarray(S)
    if Y.shape != S.shape:
        raise ValueError(f"received grid {Y.shape} and symbol grid {S.shape} differ")
    zero = np.argwhere(S == 0)
    if len(zero):
        r, c = zero[0]
        raise ValueError(f"subcarrier symbol is zero at (subcarrier {r}, symbol {c}); cannot divide")
    n_c, n_sym = Y.shape
    w_r = make_window(range_window, n_c).coeffs
    w_d = make_window(doppler_window, n_sym).coeffs
    Z_f = dft(Y, axis=0) / S
    Z_r = idft(w_r[:, None] * Z_f, axis=0)
    Z = dft(Z_r * w_d[None, :], axis=1)
    return RangeDopplerMap(Z, range_window, doppler_window, phases)


def signed_bin(vbin, n_sym: int):
    return (np.asarray(vbin) + n_sym // 2) % n_sym - n_sym // 2


def noise_floor(power: np.ndarray, peaks: list[tuple[int, int]], guard: int = GUARD) -> float:
    """Median power outside +-guard cells (circular) around every peak."""
    keep = np.ones(power.shape, dtype=bool)
    n_r, n_v = power.shape
    off = np.arange(-guard, guard + 1)
    for r, v in peaks:
        keep[np.ix_((r + off) % n_r, (v + off) % n_v)] = False
    vals = power[keep]
    return float(np.median(vals)) if vals.size else 0.0


def extract_peaks(rdm: RangeDopplerMap, threshold_db: float = 13.0, max_peaks: int = 64) -> list[Detection]:
    """Local maxima exceeding ``threshold_db`` above the median noise floor, strongest first."""
    if threshold_db <= 0:
        raise ValueError("threshold must be positive (dB above the noise floor)")
    P = rdm.power
    n_sym = P.shape[1]
    thr = 10 ** (threshold_db / 10)
    cand_mask = _kernels.local_maxima(P)
    # floor relative to the strongest cell keeps round-off ripple of noiseless maps out
    rel = np.max(P) * 1e-12
    floor0 = max(float(np.median(P)), rel)
    cand = np.argwhere(cand_mask & (P > thr * floor0))
    floor = max(noise_floor(P, [tuple(c) for c in cand]), rel)
    hits = np.argwhere(cand_mask & (P > thr * floor))
    order = np.argsort(-P[hits[:, 0], hits[:, 1]], kind="stable")[:max_peaks]
    return [
        Detection(int(r), int(signed_bin(v, n_sym)), complex(rdm.Z[r, v]))
        for r, v in hits[order]
    ]


def area_of(vel_bin: int, N_sym: int, N_Tx: int) -> int:
    width = N_sym // N_Tx
    return int(((vel_bin + N_sym // 2) % N_sym) // width)


def bin_to_physical(
    range_bin: int, vel_bin: int, params: DerivedParams, phases: DdmPhaseSet
) -> tuple[float, float, int]:
    """Range [m], velocity [m/s] and antenna index for a signed velocity bin.

    The velocity axis is split into N_Tx equal areas centred on the antenna shifts p_k.
    A positive bin offset from the area centre is an approaching target (negative v).
    """
    n_sym = phases.N_sym
    k = area_of(vel_bin, n_sym, phases.N_Tx)
    order = np.argsort(phases.p)
    antenna = int(order[k])
    offset = int(signed_bin(vel_bin - phases.p[antenna], n_sym))
    return range_bin * params.delta_r, -offset * params.delta_v, antenna


def annotate(dets: list[Detection], params: DerivedParams, phases: DdmPhaseSet) -> list[Detection]:
    out = []
    for d in dets:
        r_m, v, k = bin_to_physical(d.range_bin, d.vel_bin, params, phases)
        out.append(Detection(d.range_bin, d.vel_bin, d.amplitude, k, r_m, v))
    return out


def rdm_snr(rdm: RangeDopplerMap, detections: list[Detection], guard: int = GUARD) -> np.ndarray:
    """Per-detection peak power over the median floor (guard cells excluded), in dB."""
    if not detections:
        raise ValueError("need at least one detection")
    P = rdm.power
    n_sym = P.shape[1]
    peaks = [(d.range_bin, d.vel_bin % n_sym) for d in detections]
    floor = noise_floor(P, peaks, guard)
    out = []
    for r, v in peaks:
        if floor <= 0 or P[r, v] <= 0:
            out.append(SNR_CAP_DB)
        else:
            out.append(min(10 * np.log10(P[r, v] / floor), SNR_CAP_DB))
    return np.array(out)


def compute_esi_rdms(
    Y: np.ndarray, S_k: np.ndarray, range_window: str = "hann", doppler_window: str = "hann"
) -> list[RangeDopplerMap]:
    """One map per antenna from its own comb of subcarriers (N_c/N_Tx x N_sym each)."""
    Yf = dft(Y, axis=0)
    maps = []
    n_tx = S_k.shape[0]
    for k in range(n_tx):
        comb = np.arange(k, Y.shape[0], n_tx)
        sub = S_k[k][comb]
        # back to a comb-local time grid so compute_rdm's DFT recovers the comb values
        maps.append(compute_rdm(idft(Yf[comb], axis=0), sub, range_window, doppler_window))
    return maps
