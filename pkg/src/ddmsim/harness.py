"""Monte-Carlo BER sweeps for DDM / ESI / SISO links and the radar demo."""
from __future__ import annotations

import csv
import json
import logging
import math
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines, channel, comm_rx, radar_rx
from .dumps import write_detections_csv, write_grid_dump
from .frame import apply_ddm_coding, build_frame, ddm_phase_set, frame_capacity, make_layout
from .params import DESK, ConfigError, WaveformConfig, derive_params

log = logging.getLogger(__name__)

SYSTEMS = ("ddm", "esi", "siso")
SCENARIOS = ("perfect_csi", "est_channel", "pilot_sync", "no_ici", "full_rx")
CSV_FIELDS = ["ebn0_db", "system", "scenario", "frames", "bits", "errors", "ber", "ci_lo", "ci_hi"]


@dataclass(frozen=True)
class Scenario:
    system: str = "ddm"
    scenario: str = "perfect_csi"
    cfg: WaveformConfig = DESK
    profile: str = "exponential"
    decay: float | None = None  # taps; default cir_len / 8
    ebn0_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    coded: bool = True
    ici: bool | None = None  # default: on, except for the no_ici scenario
    max_velocity: float = 60.0
    cpe_walk_std: float = 0.0
    min_errors: int = 200
    max_frames: int = 200
    min_frames: int = 1
    seed: int = 1
    threads: int = 1

    def validate(self) -> "Scenario":
        if self.system not in SYSTEMS:
            raise ConfigError("system", f"unknown system {self.system!r}; expected one of {SYSTEMS}")
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.min_errors < 1 or self.max_frames < 1 or self.min_frames < 1:
            raise ConfigError("stop_rule", "min_errors, min_frames and max_frames must be positive")
        if self.profile not in ("exponential", "awgn"):
            raise ConfigError("profile", f"unknown channel profile {self.profile!r}")
        self.link_cfg()
        return self

    @property
    def ici_enabled(self) -> bool:
        return self.scenario != "no_ici" if self.ici is None else bool(self.ici)

    def link_cfg(self) -> WaveformConfig:
        """Configuration actually simulated, after system and scenario rules."""
        c = self.cfg
        if self.system == "ddm":
            c = replace(c, bundle_size=c.N_Tx)
        elif self.system == "esi":
            c = replace(c, bundle_size=1)
        else:
            c = replace(c, N_Tx=1, bundle_size=1)
        if self.scenario in ("est_channel", "full_rx"):
            c = replace(c, N_pr=16 if self.system == "ddm" else 4)
        if self.scenario in ("pilot_sync", "full_rx"):
            c = replace(c, N_p=64 if self.system == "ddm" else 16)
        c = replace(c, code_rate=0.5 if self.coded else 1.0)
        return c.validate()

    def cir_profile(self) -> channel.CirProfile:
        decay = self.decay if self.decay is not None else self.link_cfg().cir_len / 8
        return channel.CirProfile(self.profile, decay)


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    frames: int
    bits: int
    errors: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    @property
    def upper_bound(self) -> bool:
        return self.errors == 0

    @property
    def interval(self) -> tuple[float, float]:
        if self.errors == 0:
            return 0.0, 3.0 / self.bits  # rule of three, 95 %
        p = self.ber
        half = 1.96 * math.sqrt(p * (1 - p) / self.bits)
        return max(p - half, 0.0), p + half


@dataclass
class BerReport:
    system: str
    scenario: str
    points: list[BerPoint]
    meta: dict = field(default_factory=dict)

    def bers(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    def ebn0(self) -> np.ndarray:
        return np.array([p.ebn0_db for p in self.points])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for p in self.points:
                lo, hi = p.interval
                ber = f"<{hi:.6e}" if p.upper_bound else f"{p.ber:.6e}"
                w.writerow([f"{p.ebn0_db:g}", self.system, self.scenario, p.frames, p.bits, p.errors, ber,
                            f"{lo:.6e}", f"{hi:.6e}"])
        Path(str(path) + ".meta.json").write_text(json.dumps(self.meta, indent=2, sort_keys=True, default=str))


def build_id() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=Path(__file__).parent, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def fold_sign_for(phases, bundle: int) -> float:
    s = np.exp(1j * bundle * phases.dpsi[0])
    return float(np.round(s.real))


@dataclass
class FrameOutcome:
    errors: int
    bits: int


class LinkSimulator:
    """Everything frame-independent for one scenario, plus the per-frame Tx -> channel -> Rx run."""

    def __init__(self, scn: Scenario):
        self.scn = scn.validate()
        self.cfg = scn.link_cfg()
        self.dp = derive_params(self.cfg)
        self.layout = make_layout(self.cfg)
        self.cap = frame_capacity(self.cfg)
        self.profile = scn.cir_profile()
        self.phases = ddm_phase_set(self.cfg.N_Tx, self.cfg.N_sym) if scn.system != "esi" else None
        self.fold_sign = fold_sign_for(self.phases, self.cfg.bundle_size) if self.phases is not None else 1.0
        self.nu = 1.0 / self.cfg.bundle_size

    def frame_rngs(self, frame_idx: int):
        ss = np.random.SeedSequence([self.scn.seed, frame_idx])
        return [np.random.default_rng(s) for s in ss.spawn(4)]

    def transmit(self, payload: np.ndarray):
        if self.scn.system == "esi":
            fr, S_k = baselines.esi_frame(payload, self.cfg, self.layout)
        else:
            fr = build_frame(payload, self.cfg, self.layout)
            S_k = apply_ddm_coding(fr.S, self.phases)
        return fr, S_k

    def true_channel(self, f: np.ndarray, chan: channel.CommChannel) -> np.ndarray:
        if self.scn.system == "esi":
            return baselines.esi_effective_cfr(chan.p)
        return channel.build_ecfr(f, self.phases, self.cfg.N_c, self.cfg.bundle_size).h

    def run_frame(self, ebn0_db: float, frame_idx: int) -> FrameOutcome:
        cfg, scn = self.cfg, self.scn
        data_rng, chan_rng, noise_rng, motion_rng = self.frame_rngs(frame_idx)
        payload = data_rng.integers(0, 2, self.cap.info_bits).astype(np.int8)
        _, S_k = self.transmit(payload)

        f = channel.draw_comm_cirs(chan_rng, self.profile, cfg)
        chan = channel.CommChannel(f, cfg.N_c)
        v = motion_rng.uniform(-scn.max_velocity, scn.max_velocity)
        fd = channel.link_doppler_bar(v, cfg)
        cpe = channel.cpe_sequence(cfg.N_sym, fd, self.dp.alpha, scn.cpe_walk_std, motion_rng)
        ici_fd = fd if scn.ici_enabled else None

        noise = None
        if np.isfinite(ebn0_db):
            noise = channel.NoiseSpec(ebn0_db, cfg.bits_per_symbol, cfg.code_rate, self.dp.zeta, self.nu)
        Y, sigma2, _ = channel.comm_receive(S_k, chan, noise, noise_rng, cpe, ici_fd)

        cpe_true = cpe + (channel.ici_common_phase(fd, cfg.N_c) if ici_fd is not None else 0.0)
        h_true = self.true_channel(f, chan)
        perfect_h = scn.scenario in ("perfect_csi", "pilot_sync", "no_ici")
        perfect_sync = scn.scenario in ("perfect_csi", "est_channel", "no_ici")
        h = h_true if perfect_h else None
        sync = cpe_true if perfect_sync else None
        coded = cfg.code_rate < 1
        if scn.system == "esi":
            rx = baselines.esi_receive_chain(Y, self.layout, cfg, sigma2, coded=coded, h=h, cpe=sync)
        else:
            rx = comm_rx.receive_frame(Y, self.layout, sigma2, n_taps=cfg.cir_len, fold_sign=self.fold_sign,
                                       coded=coded, h=h, cpe=sync)
        return FrameOutcome(int(np.count_nonzero(rx.bits != payload)), int(payload.size))


def _run_point(sim: LinkSimulator, ebn0_db: float, pool: ThreadPoolExecutor | None) -> BerPoint:
    scn = sim.scn
    frames = bits = errors = 0
    chunk = max(scn.threads, 1)
    idx = 0
    while frames < scn.max_frames:
        batch = list(range(idx, min(idx + chunk, scn.max_frames)))
        idx += len(batch)
        if pool is None:
            outs = [sim.run_frame(ebn0_db, i) for i in batch]
        else:
            outs = list(pool.map(lambda i: sim.run_frame(ebn0_db, i), batch))
        for o in outs:  # frame-index order; later frames of the batch are dropped once the rule fires
            frames += 1
            bits += o.bits
            errors += o.errors
            if errors >= scn.min_errors and frames >= scn.min_frames:
                return BerPoint(ebn0_db, frames, bits, errors)
    return BerPoint(ebn0_db, frames, bits, errors)


def run_ber_sweep(scn: Scenario) -> BerReport:
    sim = LinkSimulator(scn)
    cfg = sim.cfg
    meta = {
        "build": build_id(),
        "seed": scn.seed,
        "system": scn.system,
        "scenario": scn.scenario,
        "ici": scn.ici_enabled,
        "coded": scn.coded,
        "profile": asdict(sim.profile),
        "waveform": asdict(cfg),
        "info_bits_per_frame": sim.cap.info_bits,
        "spectral_efficiency_bits_per_re": sim.cap.info_bits / (cfg.N_c * cfg.N_sym),
    }
    log.info("%s/%s: %d info bits per frame", scn.system, scn.scenario, sim.cap.info_bits)
    points = []
    pool = ThreadPoolExecutor(scn.threads) if scn.threads > 1 else None
    try:
        for e in scn.ebn0_db:
            pt = _run_point(sim, float(e), pool)
            log.info("Eb/N0 %5.2f dB: %d errors / %d bits (%d frames)", e, pt.errors, pt.bits, pt.frames)
            points.append(pt)
    finally:
        if pool is not None:
            pool.shutdown()
    report = BerReport(scn.system, scn.scenario, points, meta)
    _flag_inversions(report)
    return report


def _flag_inversions(report: BerReport) -> None:
    pts = [p for p in report.points if p.errors > 0]
    for a, b in zip(pts, pts[1:]):
        if b.ber > a.ber:
            sigma = math.sqrt(a.ber * (1 - a.ber) / a.bits + b.ber * (1 - b.ber) / b.bits)
            level = "within" if b.ber - a.ber < 2 * sigma else "beyond"
            log.warning("BER increases from %.2f to %.2f dB (%s 2 sigma)", a.ebn0_db, b.ebn0_db, level)
            report.meta.setdefault("inversions", []).append([a.ebn0_db, b.ebn0_db, level])


def ebn0_at_ber(report: BerReport, target: float) -> float:
    """Eb/N0 where the curve first crosses ``target``, linear in log10(BER)."""
    pts = [p for p in report.points if p.errors > 0]
    for a, b in zip(pts, pts[1:]):
        if a.ber >= target >= b.ber and a.ber > b.ber:
            la, lb, lt = math.log10(a.ber), math.log10(b.ber), math.log10(target)
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db)
    raise ValueError(f"{report.system}/{report.scenario}: BER curve does not bracket {target:g}")


# ---------------------------------------------------------------------------
# radar demo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadarDemo:
    cfg: WaveformConfig = DESK
    targets: tuple[tuple[float, float, complex], ...] = ((30.0, 0.0, 1.0),)  # (range m, velocity m/s, gain)
    noise_var: float = 1e-3
    range_window: str = "hann"
    doppler_window: str = "hann"
    threshold_db: float = 13.0
    max_peaks: int = 64
    ici: bool = True
    seed: int = 1


@dataclass
class RadarDemoResult:
    rdm: radar_rx.RangeDopplerMap
    detections: list[radar_rx.Detection]
    snr_db: np.ndarray


def run_radar_demo(demo: RadarDemo, dump_path=None, csv_path=None) -> RadarDemoResult:
    cfg = replace(demo.cfg, bundle_size=demo.cfg.N_Tx).validate()
    dp = derive_params(cfg)
    rng = np.random.default_rng(demo.seed)
    phases = ddm_phase_set(cfg.N_Tx, cfg.N_sym)
    cap = frame_capacity(cfg)
    fr = build_frame(rng.integers(0, 2, cap.info_bits), cfg)
    S_k = apply_ddm_coding(fr.S, phases)
    scene = channel.RadarScene(
        gain=np.array([t[2] for t in demo.targets], complex),
        distance=np.array([t[0] for t in demo.targets], float),
        velocity=np.array([t[1] for t in demo.targets], float),
    )
    Y = channel.radar_response(S_k, scene, cfg, ici=demo.ici)
    if demo.noise_var > 0:
        Y = Y + np.sqrt(demo.noise_var) * channel.unit_noise(rng, Y.shape)
    rdm = radar_rx.compute_rdm(Y, fr.S, demo.range_window, demo.doppler_window, phases)
    dets = radar_rx.annotate(radar_rx.extract_peaks(rdm, demo.threshold_db, demo.max_peaks), dp, phases)
    snr = radar_rx.rdm_snr(rdm, dets) if dets else np.zeros(0)
    if dump_path is not None:
        write_grid_dump(dump_path, rdm.Z)
    if csv_path is not None:
        write_detections_csv(csv_path, dets)
    return RadarDemoResult(rdm, dets, snr)
