"""INI scenario files and ``key=value`` overrides mapped onto Scenario / RadarDemo.

Sections: ``[waveform]`` (WaveformConfig fields), ``[channel]``, ``[sim]``,
``[radar]`` and ``[output]``.  A bare override key is looked up across all
sections; ``section.key`` addresses one explicitly.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .harness import RadarDemo, Scenario
from .params import DESK, TABLE2, ConfigError, WaveformConfig

_WAVEFORM_KEYS = WaveformConfig.field_names()
_CHANNEL_KEYS = ["profile", "decay", "max_velocity", "cpe_walk_std", "ici"]
_SIM_KEYS = ["system", "scenario", "ebn0", "coded", "min_errors", "max_frames", "min_frames", "seed", "threads",
             "scale"]
_RADAR_KEYS = ["targets", "noise_var", "range_window", "doppler_window", "threshold_db", "max_peaks"]
_OUTPUT_KEYS = ["csv", "dump", "detections"]
SECTIONS = {
    "waveform": _WAVEFORM_KEYS,
    "channel": _CHANNEL_KEYS,
    "sim": _SIM_KEYS,
    "radar": _RADAR_KEYS,
    "output": _OUTPUT_KEYS,
}


@dataclass
class RunConfig:
    scenario: Scenario
    radar: RadarDemo
    outputs: dict = field(default_factory=dict)


def parse_ebn0(text: str) -> tuple[float, ...]:
    """``a:step:b`` (inclusive) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            a, step, b = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ConfigError("ebn0", f"bad range {text!r}")
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return tuple(float(round(a + i * step, 10)) for i in range(n))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("ebn0", f"cannot parse Eb/N0 grid {text!r}") from exc


def parse_targets(text: str) -> tuple[tuple[float, float, complex], ...]:
    """``range,velocity[,gain]; ...``"""
    out = []
    for item in text.split(";"):
        if not item.strip():
            continue
        parts = [p.strip() for p in item.split(",")]
        try:
            r, v = float(parts[0]), float(parts[1])
            g = complex(parts[2].replace(" ", "")) if len(parts) > 2 else 1.0
        except (ValueError, IndexError) as exc:
            raise ConfigError("targets", f"cannot parse target {item!r}") from exc
        out.append((r, v, g))
    if not out:
        raise ConfigError("targets", "no radar targets given")
    return tuple(out)


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _typed(cls, key: str, text: str):
    for f in fields(cls):
        if f.name == key:
            kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
            break
    else:
        raise ConfigError(key, "unknown key")
    try:
        if kind.startswith("int"):
            return int(float(text)) if float(text).is_integer() else int(text)
        if kind.startswith("float"):
            return float(text)
        if kind.startswith("bool"):
            return _bool(text, key)
        return text.strip()
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {text!r} as {kind}") from exc


def _section_of(key: str) -> str:
    hits = [s for s, keys in SECTIONS.items() if key in keys]
    if not hits:
        raise ConfigError(key, "unknown configuration key")
    return hits[0]


def read_raw(path=None, overrides=()) -> dict[str, dict[str, str]]:
    raw: dict[str, dict[str, str]] = {s: {} for s in SECTIONS}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError("config_file", f"{path} does not exist")
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keys like N_c are case sensitive
        try:
            cp.read(p)
        except configparser.Error as exc:
            raise ConfigError("config_file", str(exc)) from exc
        for sec in cp.sections():
            if sec not in SECTIONS:
                raise ConfigError("config_file", f"unknown section [{sec}]")
            for k, v in cp.items(sec):
                if k not in SECTIONS[sec]:
                    raise ConfigError(k, f"unknown key in [{sec}]")
                raw[sec][k] = v
    for item in overrides:
        if "=" not in item:
            raise ConfigError("override", f"expected key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        sec, _, name = key.rpartition(".")
        sec = sec or _section_of(name)
        if sec not in SECTIONS or name not in SECTIONS[sec]:
            raise ConfigError(name, f"unknown key in [{sec}]")
        raw[sec][name] = val
    return raw


def build_run_config(raw: dict[str, dict[str, str]], full_scale: bool = False) -> RunConfig:
    sim = raw["sim"]
    scale = "table2" if full_scale else sim.get("scale", "desk").strip().lower()
    if scale not in ("desk", "table2"):
        raise ConfigError("scale", f"scale must be desk or table2, got {scale!r}")
    base = TABLE2 if scale == "table2" else DESK
    wf = {k: _typed(WaveformConfig, k, v) for k, v in raw["waveform"].items()}
    cfg = replace(base, **wf)

    kw: dict = {"cfg": cfg}
    ch = raw["channel"]
    if "profile" in ch:
        kw["profile"] = ch["profile"].strip()
    if "decay" in ch:
        kw["decay"] = _typed(Scenario, "decay", ch["decay"])
    for k in ("max_velocity", "cpe_walk_std"):
        if k in ch:
            kw[k] = _typed(Scenario, k, ch[k])
    if "ici" in ch:
        kw["ici"] = _bool(ch["ici"], "ici")
    for k in ("system", "scenario"):
        if k in sim:
            kw[k] = sim[k].strip()
    if "ebn0" in sim:
        kw["ebn0_db"] = parse_ebn0(sim["ebn0"])
    if "coded" in sim:
        kw["coded"] = _bool(sim["coded"], "coded")
    for k in ("min_errors", "max_frames", "min_frames", "seed", "threads"):
        if k in sim:
            kw[k] = _typed(Scenario, k, sim[k])
    if full_scale and "max_frames" not in sim:
        kw["max_frames"] = 50
    scn = Scenario(**kw)

    rd = raw["radar"]
    rkw: dict = {"cfg": cfg, "seed": scn.seed}
    if "ici" in ch:
        rkw["ici"] = kw["ici"]
    if "targets" in rd:
        rkw["targets"] = parse_targets(rd["targets"])
    for k in ("noise_var", "threshold_db", "max_peaks", "range_window", "doppler_window"):
        if k in rd:
            rkw[k] = _typed(RadarDemo, k, rd[k])
    return RunConfig(scenario=scn, radar=RadarDemo(**rkw), outputs=dict(raw["output"]))


def load_run_config(path=None, overrides=(), full_scale: bool = False) -> RunConfig:
    return build_run_config(read_raw(path, overrides), full_scale)
