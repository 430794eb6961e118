"""Command-line entry point: ``ddmsim {ber,radar,params,validate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import load_run_config, parse_ebn0
from .harness import SCENARIOS, SYSTEMS, run_ber_sweep, run_radar_demo
from .params import ConfigError, derive_params

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI scenario file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario field (repeatable; 'section.key' or bare key)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker threads for frame-level parallelism")
    common.add_argument("--out", help="output path (CSV for ber/params, RDM dump stem for radar)")
    common.add_argument("--full-scale", action="store_true", help="start from the full-scale waveform")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ddmsim", description="DDM MIMO-OFDM joint radar/communication simulator")
    sub = p.add_subparsers(dest="command", required=True)
    ber = sub.add_parser("ber", parents=[common], help="Monte-Carlo BER sweep")
    ber.add_argument("--ebn0", help="Eb/N0 grid, 'a:step:b' or comma list [dB]")
    ber.add_argument("--system", choices=SYSTEMS)
    ber.add_argument("--scenario", choices=SCENARIOS)
    sub.add_parser("radar", parents=[common], help="radar range-Doppler demo")
    sub.add_parser("params", parents=[common], help="print derived waveform parameters")
    sub.add_parser("validate", parents=[common], help="check a scenario for constraint violations")
    return p


def _overrides(args) -> list[str]:
    ov = list(args.set)
    if args.seed is not None:
        ov.append(f"sim.seed={args.seed}")
    if args.threads is not None:
        ov.append(f"sim.threads={args.threads}")
    if getattr(args, "ebn0", None):
        parse_ebn0(args.ebn0)
        ov.append(f"sim.ebn0={args.ebn0}")
    if getattr(args, "system", None):
        ov.append(f"sim.system={args.system}")
    if getattr(args, "scenario", None):
        ov.append(f"sim.scenario={args.scenario}")
    return ov


def _cmd_params(run, args) -> None:
    dp = derive_params(run.scenario.cfg)
    text = json.dumps(dp.as_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def _cmd_validate(run, args) -> None:
    run.scenario.cfg.validate()
    run.scenario.validate()
    derive_params(run.scenario.cfg)
    print("ok")


def _cmd_ber(run, args) -> None:
    report = run_ber_sweep(run.scenario)
    out = args.out or run.outputs.get("csv")
    if out:
        report.write_csv(out)
    print("ebn0_db,ber,errors,bits,frames")
    for pt in report.points:
        ber = f"<{pt.interval[1]:.3e}" if pt.upper_bound else f"{pt.ber:.3e}"
        print(f"{pt.ebn0_db:g},{ber},{pt.errors},{pt.bits},{pt.frames}")


def _cmd_radar(run, args) -> None:
    stem = args.out
    dump = f"{stem}.rdm" if stem else run.outputs.get("dump")
    dets = f"{stem}.csv" if stem else run.outputs.get("detections")
    res = run_radar_demo(run.radar, dump_path=dump, csv_path=dets)
    print("range_bin,vel_bin,antenna,range_m,vel_mps,snr_db")
    for d, snr in zip(res.detections, res.snr_db):
        print(f"{d.range_bin},{d.vel_bin},{d.antenna},{d.range_m:.3f},{d.velocity_mps:.3f},{snr:.2f}")


COMMANDS = {"ber": _cmd_ber, "radar": _cmd_radar, "params": _cmd_params, "validate": _cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = load_run_config(args.config, _overrides(args), args.full_scale)
        if args.command != "validate":
            run.scenario.validate()
    except ConfigError as exc:
        print(f"config error [{exc.constraint}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](run, args)
    except ConfigError as exc:
        print(f"config error [{exc.constraint}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
