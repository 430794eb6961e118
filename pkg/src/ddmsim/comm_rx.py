"""Communication receiver for bundled (phase-coded) OFDM frames.

Works on folded symbols ``z[kappa, gamma] = sign**kappa * DFT(y[kappa, gamma])``
so that the effective channel is described by ``bundle`` columns only.
With ``bundle == 1`` and ``sign == 1`` the same code is a plain OFDM receiver.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import coding
from .dsp import dft, idft
from .frame import INTERLEAVER_SEED, FrameLayout

# smallest noise variance handed to the demapper; noiseless runs saturate at LLR_CAP
_VAR_FLOOR = 1e-30


def fold(y: np.ndarray, kappa: int, sign: float = -1.0) -> np.ndarray:
    return sign**kappa * dft(y, axis=0)


def fold_grid(Y: np.ndarray, bundle: int, sign: float) -> np.ndarray:
    """Fold all columns; returns (N_sym/bundle, bundle, N_c) indexed [kappa, gamma, n]."""
    n_c, n_sym = Y.shape
    kappa = np.arange(n_sym) // bundle
    Z = dft(Y, axis=0) * (sign**kappa)[None, :]
    return Z.T.reshape(n_sym // bundle, bundle, n_c)


def preamble_sync(z_pre: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """De-rotate preamble symbols relative to kappa = 0 and average per gamma.

    ``z_pre`` is (n_bundles, bundle, N_c).  Returns ``(zbar, phi_hat)`` with
    zbar (bundle, N_c) and phi_hat (n_bundles, bundle).
    """
    z_pre = np.asarray(z_pre)
    inner = np.einsum("gn,kgn->kg", np.conj(z_pre[0]), z_pre)
    phi = np.angle(inner)
    zbar = np.mean(z_pre * np.exp(-1j * phi)[:, :, None], axis=0)
    return zbar, phi


@dataclass(frozen=True)
class EcfrEstimate:
    g: np.ndarray  # (bundle, N_g)
    h: np.ndarray  # (bundle, N_c)


def preamble_model(x_pr: np.ndarray, n_taps: int, rows: np.ndarray | None = None) -> np.ndarray:
    """M_pr = diag(x_pr) F B_zp restricted to ``rows``."""
    n_c = len(x_pr)
    rows = np.arange(n_c) if rows is None else np.asarray(rows)
    F = np.exp(-2j * np.pi * np.outer(rows, np.arange(n_taps)) / n_c)
    return x_pr[rows, None] * F


def blue_cir(zbar: np.ndarray, x_pr: np.ndarray, n_taps: int, rows: np.ndarray | None = None) -> np.ndarray:
    """BLUE of the impulse response(s) behind ``zbar`` (..., len(rows)) in white noise."""
    zbar = np.asarray(zbar)
    n_c = len(x_pr)
    if rows is None and np.allclose(np.abs(x_pr), 1.0, atol=1e-12):
        # unit-magnitude preamble: M^H M = N_c I
        return idft(np.conj(x_pr) * zbar, axis=-1)[..., :n_taps]
    M = preamble_model(x_pr, n_taps, rows)
    if np.linalg.matrix_rank(M) < n_taps:
        raise ValueError("preamble model is rank deficient (zero preamble entries or too few subcarriers)")
    G = M.conj().T @ M
    rhs = np.einsum("rl,...r->...l", M.conj(), zbar)
    return np.linalg.solve(G, rhs.T).T if rhs.ndim > 1 else np.linalg.solve(G, rhs)


def estimate_ecir(zbar: np.ndarray, x_pr: np.ndarray, n_taps: int) -> EcfrEstimate:
    g = blue_cir(zbar, x_pr, n_taps)
    n_c = len(x_pr)
    pad = np.zeros(g.shape[:-1] + (n_c,), dtype=np.complex128)
    pad[..., :n_taps] = g
    return EcfrEstimate(g=g, h=dft(pad, axis=-1))


@dataclass(frozen=True)
class CpeEstimate:
    phi: np.ndarray
    t_hat: np.ndarray
    weights: np.ndarray  # diagonal of W, unit trace per symbol


def pilot_cpe_sync(
    z_p: np.ndarray,
    h_p: np.ndarray,
    s_p: np.ndarray,
    sigma2: float,
    N_c: int,
    c_tt: float | np.ndarray = 1.0,
) -> CpeEstimate:
    """LMMSE pilot estimate, inverse-error-variance weighting and CPE extraction.

    All arrays broadcast over leading axes; the last axis runs over pilots.
    """
    z_p = np.asarray(z_p)
    h_p = np.broadcast_to(h_p, z_p.shape)
    lam = N_c * sigma2 / np.asarray(c_tt)
    denom = np.abs(h_p) ** 2 + lam
    safe = np.where(denom > 0, denom, 1.0)
    t_hat = np.where(denom > 0, np.conj(h_p) * z_p / safe, 0.0)
    # 1 / C_ee = denom / (N_c sigma2); the constant cancels in the unit-trace normalisation
    total = np.sum(denom, axis=-1, keepdims=True)
    dead = total[..., 0] <= 0
    if np.any(dead):
        warnings.warn("pilot channel estimate is zero; CPE estimation skipped for those symbols", RuntimeWarning)
    w = denom / np.where(total > 0, total, 1.0)
    phi = np.angle(np.sum(np.conj(s_p) * w * t_hat, axis=-1))
    phi = np.where(dead, 0.0, phi)
    return CpeEstimate(phi=phi, t_hat=t_hat, weights=w)


@dataclass(frozen=True)
class DataEstimate:
    x: np.ndarray  # LMMSE estimate
    gain: np.ndarray  # x = gain * x_true + noise
    noise_var: np.ndarray


def lmmse_data(z_d: np.ndarray, h_d: np.ndarray, sigma2: float, N_c: int, sigma_d2: float = 1.0) -> DataEstimate:
    """Stacked LMMSE over the bundle axis (axis 0); diagonal structure gives a per-subcarrier closed form."""
    z_d = np.asarray(z_d)
    h_d = np.asarray(h_d)
    if h_d.ndim < z_d.ndim:
        h_d = h_d.reshape(h_d.shape + (1,) * (z_d.ndim - h_d.ndim))
    num = np.sum(np.conj(h_d) * z_d, axis=0)
    A = np.sum(np.abs(h_d) ** 2, axis=0)
    lam = N_c * sigma2 / sigma_d2
    den = A + lam
    safe = np.where(den > 0, den, 1.0)
    x = np.where(den > 0, num / safe, 0.0)
    gain = np.where(den > 0, A / safe, 0.0)
    var = np.where(den > 0, A * N_c * sigma2 / safe**2, 0.0)
    return DataEstimate(x=np.broadcast_to(x, num.shape), gain=np.broadcast_to(gain, num.shape),
                        noise_var=np.broadcast_to(var, num.shape))


def dense_lmmse(z_stack: np.ndarray, H_stack: np.ndarray, sigma2: float, N_c: int, sigma_d2: float = 1.0) -> np.ndarray:
    """Reference solve of (H^H H + N_c sigma2 / sigma_d2 I)^-1 H^H z with explicit matrices."""
    n = H_stack.shape[1]
    A = H_stack.conj().T @ H_stack + (N_c * sigma2 / sigma_d2) * np.eye(n)
    return np.linalg.solve(A, H_stack.conj().T @ z_stack)


def demap(est: DataEstimate) -> np.ndarray:
    """LLR stream for a (N_d, n_cols) estimate grid in transmit order (column after column)."""
    var = np.maximum(est.noise_var, _VAR_FLOOR)
    return coding.qpsk_llr_stream(est.x.T, est.gain.T, var.T)


@dataclass
class RxResult:
    bits: np.ndarray
    llrs: np.ndarray
    h_used: np.ndarray
    cpe_hat: np.ndarray | None = None


def receive_frame(
    Y: np.ndarray,
    layout: FrameLayout,
    sigma2: float,
    *,
    n_taps: int,
    fold_sign: float = -1.0,
    coded: bool = True,
    h: np.ndarray | None = None,
    cpe: np.ndarray | None = None,
    estimator: Callable[[np.ndarray], np.ndarray] | None = None,
    interleaver_seed: int = INTERLEAVER_SEED,
) -> RxResult:
    """Full receiver for one frame.

    ``h`` (bundle, N_c) supplies perfect channel knowledge, otherwise the channel
    is estimated from the preamble (``estimator`` maps zbar -> h, BLUE by default).
    ``cpe`` (N_sym,) supplies perfect synchronisation, otherwise the CPE is
    estimated from preamble correlation and pilots.
    """
    G = layout.bundle
    N_c = layout.N_c
    Z = fold_grid(Y, G, fold_sign)  # (n_cols, G, N_c)
    if cpe is not None:
        Z = Z * np.exp(-1j * np.asarray(cpe)).reshape(-1, G)[:, :, None]

    if h is None:
        z_pre = Z[: layout.n_pr_cols]
        if len(z_pre) == 0:
            raise ValueError("channel estimation needs at least one preamble bundle")
        zbar = z_pre.mean(axis=0) if cpe is not None else preamble_sync(z_pre)[0]
        h = estimator(zbar) if estimator is not None else estimate_ecir(zbar, layout.x_pr, n_taps).h
    h = np.asarray(h)

    body = Z[layout.n_pr_cols :]  # (n_payload, G, N_c)
    cpe_hat = None
    if cpe is None:
        if len(layout.pilot_idx) == 0:
            raise ValueError("pilot synchronisation needs pilot subcarriers")
        est = pilot_cpe_sync(
            body[:, :, layout.pilot_idx], h[None, :, layout.pilot_idx], layout.pilot_values, sigma2, N_c
        )
        cpe_hat = est.phi
        body = body * np.exp(-1j * est.phi)[:, :, None]

    z_d = body[:, :, layout.data_idx].transpose(1, 2, 0)  # (G, N_d, n_payload)
    data = lmmse_data(z_d, h[:, layout.data_idx], sigma2, N_c)
    llrs = demap(data)
    if coded:
        bits = coding.viterbi_decode(coding.deinterleave(llrs, interleaver_seed))
    else:
        bits = coding.hard_bits(coding.deinterleave(llrs, interleaver_seed))
    return RxResult(bits=bits.astype(np.int8), llrs=llrs, h_used=h, cpe_hat=cpe_hat)
