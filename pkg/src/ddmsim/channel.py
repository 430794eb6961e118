"""Propagation models for the radar round trip and the one-way communication link."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import dft, idft, osc_vector
from .frame import DdmPhaseSet
from .params import WaveformConfig, derive_params

# ---------------------------------------------------------------------------
# radar
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadarScene:
    """Point-scatterer paths.  ``distance`` is (N_path,) or (N_path, N_Tx) one-way range [m]."""

    gain: np.ndarray
    distance: np.ndarray
    velocity: np.ndarray

    @classmethod
    def single(cls, distance: float, velocity: float = 0.0, gain: complex = 1.0) -> "RadarScene":
        return cls(np.array([gain], complex), np.array([distance], float), np.array([velocity], float))

    @property
    def n_paths(self) -> int:
        return len(self.gain)

    def distances(self, n_tx: int) -> np.ndarray:
        d = np.asarray(self.distance, float)
        if d.ndim == 1:
            d = np.repeat(d[:, None], n_tx, axis=1)
        if d.shape != (self.n_paths, n_tx):
            raise ValueError(f"distance shape {d.shape} does not match ({self.n_paths}, {n_tx})")
        return d


def range_for_bin(cfg: WaveformConfig, rbin: float) -> float:
    """Distance whose normalized delay is rbin / N_c (an on-grid target for integer bins)."""
    return rbin * derive_params(cfg).delta_r


def velocity_for_bin(cfg: WaveformConfig, vbin: float) -> float:
    """Velocity producing a Doppler offset of ``vbin`` velocity bins (receding targets are negative bins)."""
    return -vbin * derive_params(cfg).delta_v


def radar_response(S_k: np.ndarray, scene: RadarScene, cfg: WaveformConfig, ici: bool = True) -> np.ndarray:
    """Noiseless received grid Y_tf,ts (N_c, N_sym) after CP removal."""
    dp = derive_params(cfg)
    S_k = np.asarray(S_k)
    if S_k.ndim == 2:
        S_k = S_k[None]
    n_tx = S_k.shape[0]
    if S_k.shape[1:] != (cfg.N_c, cfg.N_sym):
        raise ValueError("transmit grids do not match the configuration")
    dist = scene.distances(n_tx)
    tau = 2 * dist / cfg.c0
    if np.any(tau < 0) or np.any(tau * cfg.B > dp.N_cp + 1e-9):
        raise ValueError(f"path delay exceeds the CP of {dp.N_cp} samples (max range {dp.N_cp * dp.delta_r:.3f} m)")
    tau_bar = tau * dp.delta_f
    a_bar = scene.gain[:, None] * np.exp(-2j * np.pi * cfg.f_c * tau)
    fd_bar = (-2 * scene.velocity * cfg.f_c / cfg.c0) / dp.delta_f

    Y = np.zeros((cfg.N_c, cfg.N_sym), dtype=np.complex128)
    for i in range(scene.n_paths):
        Yf = np.zeros_like(Y)
        for k in range(n_tx):
            Yf += a_bar[i, k] * np.conj(osc_vector(cfg.N_c, tau_bar[i, k]))[:, None] * S_k[k]
        y = idft(Yf, axis=0) * osc_vector(cfg.N_sym, fd_bar[i] * dp.alpha)[None, :]
        if ici:
            y *= osc_vector(cfg.N_c, fd_bar[i] / cfg.N_c)[:, None]
        Y += y
    return Y


# ---------------------------------------------------------------------------
# communication link
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CirProfile:
    kind: str = "exponential"  # "exponential" | "awgn"
    decay: float = 32.0  # taps


def draw_comm_cirs(rng: np.random.Generator, profile: CirProfile, cfg: WaveformConfig) -> np.ndarray:
    """Independent Rayleigh tapped-delay lines, (N_Tx, cir_len), unit expected energy each."""
    n_f = cfg.cir_len
    if profile.kind == "awgn":
        f = np.zeros((cfg.N_Tx, n_f), dtype=np.complex128)
        f[:, 0] = 1.0
        return f
    if profile.kind != "exponential":
        raise ValueError(f"unknown CIR profile {profile.kind!r}")
    pdp = np.exp(-np.arange(n_f) / profile.decay)
    pdp /= pdp.sum()
    w = rng.standard_normal((cfg.N_Tx, n_f, 2))
    return (w[..., 0] + 1j * w[..., 1]) * np.sqrt(pdp / 2)


def cir_to_cfr(f: np.ndarray, N_c: int) -> np.ndarray:
    """p = F_N B_zp f along the last axis."""
    f = np.asarray(f)
    pad = np.zeros(f.shape[:-1] + (N_c,), dtype=np.complex128)
    pad[..., : f.shape[-1]] = f
    return dft(pad, axis=-1)


@dataclass(frozen=True)
class Ecfr:
    H: np.ndarray  # (N_c, N_sym)
    h: np.ndarray  # (bundle, N_c) folded columns
    g: np.ndarray  # (bundle, N_g) effective impulse responses
    fold_sign: float


def build_ecfr(f: np.ndarray, phases: DdmPhaseSet, N_c: int, bundle: int) -> Ecfr:
    """Effective SISO channel of the phase-coded antennas and its ``bundle``-column folding."""
    p = cir_to_cfr(f, N_c)
    ph = phases.symbol_phasors()  # (N_Tx, N_sym)
    H = np.einsum("kn,km->nm", p, ph)
    step = ph[:, bundle % phases.N_sym] if bundle < phases.N_sym else np.ones(len(ph))
    sign = step[0]
    if not (np.allclose(step, sign, atol=1e-12) and abs(abs(sign.real) - 1) < 1e-12 and abs(sign.imag) < 1e-12):
        raise ValueError("phase increments do not give a common +-1 step per bundle; ECFR cannot be folded")
    sign = float(np.round(sign.real))
    h = H[:, :bundle].T.copy()
    kappa = np.arange(phases.N_sym) // bundle
    gamma = np.arange(phases.N_sym) % bundle
    resid = H - (sign ** kappa)[None, :] * h[gamma].T
    if np.max(np.abs(resid)) > 1e-9 * max(1.0, np.max(np.abs(H))):
        raise ValueError("ECFR is not bundle-periodic up to sign; folding inconsistent")
    g = np.einsum("kl,kg->gl", f, ph[:, :bundle])
    return Ecfr(H=H, h=h, g=g, fold_sign=sign)


@dataclass(frozen=True)
class CommChannel:
    f: np.ndarray  # (N_Tx, N_f)
    N_c: int
    p: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p", cir_to_cfr(self.f, self.N_c))


def link_doppler_bar(velocity: float, cfg: WaveformConfig) -> float:
    """One-way Doppler normalized to the subcarrier spacing (receding => negative)."""
    return (-velocity * cfg.f_c / cfg.c0) / derive_params(cfg).delta_f


def cpe_sequence(N_sym: int, fd_bar: float, alpha: float, walk_std: float = 0.0, rng=None) -> np.ndarray:
    """phi_mu = 2 pi fd_bar alpha mu, optionally plus a Gaussian random walk."""
    phi = 2 * np.pi * fd_bar * alpha * np.arange(N_sym)
    if walk_std > 0:
        if rng is None:
            raise ValueError("random-walk CPE needs an rng")
        phi = phi + np.cumsum(rng.normal(0.0, walk_std, N_sym))
    return phi


def ici_common_phase(fd_bar: float, N_c: int) -> float:
    """Phase of the diagonal of the in-symbol Doppler modulation seen after the DFT."""
    return float(np.angle(np.mean(osc_vector(N_c, fd_bar / N_c))))


def comm_propagate(
    S_k: np.ndarray, chan: CommChannel, cpe: np.ndarray | None = None, ici_fd_bar: float | None = None
) -> np.ndarray:
    """Noiseless Y_tf,ts = sum_k F^-1 P_k S_k Lambda (+ fast-time Doppler when ``ici_fd_bar`` is set)."""
    S_k = np.asarray(S_k)
    if S_k.ndim == 2:
        S_k = S_k[None]
    Yf = np.einsum("kn,knm->nm", chan.p, S_k)
    if cpe is not None:
        Yf = Yf * np.exp(1j * np.asarray(cpe))[None, :]
    y = idft(Yf, axis=0)
    if ici_fd_bar is not None and ici_fd_bar != 0.0:
        y *= osc_vector(chan.N_c, ici_fd_bar / chan.N_c)[:, None]
    return y


def unit_noise(rng: np.random.Generator, shape) -> np.ndarray:
    w = rng.standard_normal(tuple(shape) + (2,))
    return (w[..., 0] + 1j * w[..., 1]) / np.sqrt(2)


@dataclass(frozen=True)
class NoiseSpec:
    ebn0_db: float
    b: int = 2
    r: float = 0.5
    zeta: float = 1.0
    nu: float = 1.0

    def variance(self, P_s: float) -> float:
        return noise_variance(self.ebn0_db, P_s, self.b, self.r, self.zeta, self.nu)


def noise_variance(ebn0_db: float, P_s: float, b: float, r: float, zeta: float, nu: float) -> float:
    """sigma_n^2 = P_s / ((Eb/N0) b r zeta nu)."""
    if min(P_s, b, r, zeta, nu) <= 0:
        raise ValueError("all calibration factors must be positive")
    return P_s / (10 ** (ebn0_db / 10) * b * r * zeta * nu)


def comm_receive(
    S_k: np.ndarray,
    chan: CommChannel,
    noise: NoiseSpec | None,
    rng: np.random.Generator | None = None,
    cpe: np.ndarray | None = None,
    ici_fd_bar: float | None = None,
) -> tuple[np.ndarray, float, float]:
    """Received grid with AWGN calibrated from the measured mean receive power.

    Returns ``(Y, sigma2, P_s)``; ``noise=None`` gives the noiseless grid and sigma2 = 0.
    """
    y = comm_propagate(S_k, chan, cpe, ici_fd_bar)
    P_s = float(np.mean(np.abs(y) ** 2))
    if noise is None:
        return y, 0.0, P_s
    sigma2 = noise.variance(P_s)
    return y + np.sqrt(sigma2) * unit_noise(rng, y.shape), sigma2, P_s
