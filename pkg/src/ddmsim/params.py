"""Waveform/system configuration and the derived OFDM radar quantities."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

C0 = 299_792_458.0


class ConfigError(ValueError):
    """Raised when a configuration violates one of its structural constraints."""

    def __init__(self, constraint: str, detail: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {detail}")


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class WaveformConfig:
    f_c: float = 77e9
    B: float = 1e9
    N_c: int = 1024
    T_cp: float = 1e-6
    N_sym: int = 512
    N_Tx: int = 4
    N_Rx: int = 1
    c0: float = C0
    bundle_size: int = 4
    N_pr: int = 16
    N_p: int = 64
    alphabet: str = "qpsk"
    code_rate: float = 0.5
    bits_per_symbol: int = 2
    cir_len: int = 256

    def validate(self) -> "WaveformConfig":
        if not _is_pow2(self.N_c):
            raise ConfigError("N_c_pow2", f"N_c={self.N_c} is not a power of two")
        if not _is_pow2(self.N_sym):
            raise ConfigError("N_sym_pow2", f"N_sym={self.N_sym} is not a power of two")
        if self.N_Tx < 1 or self.N_Rx != 1:
            raise ConfigError("antennas", f"need N_Tx >= 1 and N_Rx == 1, got {self.N_Tx}, {self.N_Rx}")
        if self.bundle_size not in (1, self.N_Tx):
            raise ConfigError(
                "bundle_size", f"bundle_size={self.bundle_size} must equal N_Tx={self.N_Tx} (or 1 without redundancy)"
            )
        if self.N_sym % (2 * self.bundle_size):
            raise ConfigError(
                "N_sym_bundle", f"N_sym={self.N_sym} not divisible by 2*bundle_size={2 * self.bundle_size}"
            )
        if self.N_sym % (2 * self.N_Tx) and self.N_Tx > 1:
            raise ConfigError("N_sym_ddm", f"N_sym={self.N_sym} not divisible by 2*N_Tx={2 * self.N_Tx}")
        if self.N_pr < 0 or self.N_pr % self.bundle_size:
            raise ConfigError("N_pr_bundle", f"N_pr={self.N_pr} not a multiple of bundle_size={self.bundle_size}")
        if self.N_pr >= self.N_sym:
            raise ConfigError("N_pr_frame", f"N_pr={self.N_pr} leaves no payload symbols in N_sym={self.N_sym}")
        if not 0 <= self.N_p < self.N_c:
            raise ConfigError("N_p_range", f"N_p={self.N_p} must satisfy 0 <= N_p < N_c={self.N_c}")
        if self.N_p and self.N_c % self.N_p:
            raise ConfigError("N_p_spacing", f"N_p={self.N_p} does not divide N_c={self.N_c}")
        n_cp = self.T_cp * self.B
        if n_cp < 0 or abs(n_cp - round(n_cp)) > 1e-6:
            raise ConfigError("T_cp_samples", f"T_cp/T_s={n_cp} is not an integer sample count")
        if self.alphabet.lower() != "qpsk" or self.bits_per_symbol != 2:
            raise ConfigError("alphabet", f"only QPSK (b=2) is supported, got {self.alphabet}/{self.bits_per_symbol}")
        if self.code_rate not in (0.5, 1.0):
            raise ConfigError("code_rate", f"code_rate must be 1/2 (coded) or 1 (uncoded), got {self.code_rate}")
        if not 1 <= self.cir_len <= self.N_c:
            raise ConfigError("cir_len", f"cir_len={self.cir_len} outside [1, N_c]")
        if self.cir_len - 1 > round(n_cp):
            raise ConfigError("cir_cp", f"CIR of {self.cir_len} taps exceeds the CP of {round(n_cp)} samples")
        if min(self.f_c, self.B, self.c0) <= 0:
            raise ConfigError("positive", "f_c, B and c0 must be positive")
        return self

    def with_(self, **changes) -> "WaveformConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class DerivedParams:
    T_s: float
    delta_f: float
    T: float
    alpha: float
    delta_r: float
    delta_v: float
    r_max: float
    v_max: float
    v_max_per_area: float
    zeta: float
    G_p_ddm: float
    G_p_esi: float
    N_cp: int
    N_d: int

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def derive_params(cfg: WaveformConfig) -> DerivedParams:
    cfg.validate()
    T_s = 1.0 / cfg.B
    delta_f = cfg.B / cfg.N_c
    T = 1.0 / delta_f
    N_cp = int(round(cfg.T_cp * cfg.B))
    delta_r = cfg.c0 / (2.0 * cfg.B)
    delta_v = cfg.c0 / (2.0 * cfg.f_c * cfg.N_sym * (T + cfg.T_cp))
    v_max = delta_v * cfg.N_sym / 2
    return DerivedParams(
        T_s=T_s,
        delta_f=delta_f,
        T=T,
        alpha=(T + cfg.T_cp) / T,
        delta_r=delta_r,
        delta_v=delta_v,
        r_max=delta_r * cfg.N_c,
        v_max=v_max,
        v_max_per_area=v_max / cfg.N_Tx,
        zeta=cfg.N_c / (N_cp + cfg.N_c),
        G_p_ddm=float(cfg.N_sym * cfg.N_c),
        G_p_esi=float(cfg.N_sym * cfg.N_c / cfg.N_Tx),
        N_cp=N_cp,
        N_d=cfg.N_c - cfg.N_p,
    )


# Full-size waveform and a desk-scale variant keeping delta_f, T and T_cp
# (so Doppler/ICI per subcarrier are unchanged) at a quarter of the bandwidth.
TABLE2 = WaveformConfig()
DESK = WaveformConfig(B=250e6, N_c=256, N_sym=128, N_p=16, cir_len=64)

