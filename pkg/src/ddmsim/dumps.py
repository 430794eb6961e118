"""Raw grid dumps: header of three little-endian int64 (N_c, N_sym, N_Tx), then
interleaved re/im little-endian float64 samples in column-major order
(subcarrier fastest, then symbol, then antenna)."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

_HEADER = np.dtype("<i8")
_SAMPLE = np.dtype("<f8")


def write_grid_dump(path, grids: np.ndarray) -> None:
    g = np.asarray(grids, dtype=np.complex128)
    if g.ndim == 2:
        g = g[None]
    n_tx, n_c, n_sym = g.shape
    body = np.stack([g.real, g.imag], axis=-1)  # (N_Tx, N_c, N_sym, 2)
    body = body.transpose(0, 2, 1, 3)  # antenna, symbol, subcarrier, re/im  (C order == column-major grid)
    with open(path, "wb") as fh:
        fh.write(np.array([n_c, n_sym, n_tx], dtype=_HEADER).tobytes())
        fh.write(np.ascontiguousarray(body, dtype=_SAMPLE).tobytes())


def read_grid_dump(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    n_c, n_sym, n_tx = np.frombuffer(raw[:24], dtype=_HEADER)
    vals = np.frombuffer(raw[24:], dtype=_SAMPLE)
    if vals.size != 2 * n_c * n_sym * n_tx:
        raise ValueError(f"{path}: payload size does not match header ({n_c}, {n_sym}, {n_tx})")
    body = vals.reshape(n_tx, n_sym, n_c, 2)
    return (body[..., 0] + 1j * body[..., 1]).transpose(0, 2, 1)


DETECTION_FIELDS = ["range_bin", "vel_bin", "mag_db", "k", "range_m", "vel_mps"]


def write_detections_csv(path, detections) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DETECTION_FIELDS)
        for d in detections:
            w.writerow([d.range_bin, d.vel_bin, f"{d.mag_db:.6f}", d.antenna, f"{d.range_m:.6f}", f"{d.velocity_mps:.6f}"])
