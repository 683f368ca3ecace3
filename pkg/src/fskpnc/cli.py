"""Command-line front end: BER sweeps and single-packet inspection.

Exit codes: 0 on success with no flagged records, 1 on runtime errors or
flagged (low-confidence) records, 2 on usage errors.  The default output
directory comes from FSKPNC_OUT_DIR (falling back to the cwd).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields
from typing import List, Optional

import numpy as np

from .detectors import bpd_detect, genie_detect, kd_detect, mpd_detect
from .estimator import kd_bpd, kd_mpd
from .harness import DETECTORS, ExperimentSpec, run_sweep, write_csv
from .model import (
    ChannelState,
    SystemConfig,
    random_source_pair,
    relative_phase,
    synthesize_packet,
)

_SPEC_FIELDS = {f.name: f.type for f in fields(ExperimentSpec)}


def _parse_snr_range(text: str) -> List[float]:
    """lo:hi:step in dB, inclusive of hi up to step rounding."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--snr expects lo:hi:step or a single value")
    lo, hi, step = map(float, parts)
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("--snr needs step > 0 and hi >= lo")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def _parse_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated values")
    return float(parts[0]), float(parts[1])


def _coerce(name: str, raw: str):
    if name in ("gains", "fading_mean_power"):
        return _parse_pair(raw)
    if name == "snr_points_db":
        return tuple(_parse_snr_range(raw))
    if name in ("phase_rad", "cfo_hz"):
        return None if raw in ("rand", "none") else float(raw)
    if name in ("symbol_duration_s", "cfo_bound_hz"):
        return float(raw)
    if name == "detector":
        return raw
    if name == "record_timing":
        return raw.lower() in ("1", "true", "yes")
    return int(raw)


def load_spec_file(path: str) -> dict:
    """Parse a `key = value` experiment file mirroring ExperimentSpec."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _SPEC_FIELDS:
                raise ValueError(f"{path}:{ln}: unknown key {key!r}")
            out[key] = _coerce(key, raw.strip())
    return out


def _out_path(name: str) -> str:
    if os.path.isabs(name) or os.path.dirname(name):
        return name
    return os.path.join(os.environ.get("FSKPNC_OUT_DIR", "."), name)


def _build_spec(args) -> ExperimentSpec:
    kw = load_spec_file(args.spec_file) if args.spec_file else {}
    for name in (
        "detector", "gains", "fading_mean_power", "block_len", "seed",
        "min_errors", "max_bits", "n_symbols", "record_timing",
    ):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    if args.phase is not None:
        kw["phase_rad"] = None if args.phase == "rand" else float(args.phase)
    if args.cfo_hz is not None:
        kw["cfo_hz"] = None if args.cfo_hz == "rand" else float(args.cfo_hz)
    if kw.get("gains") is None and kw.get("fading_mean_power") is None:
        kw["gains"] = (1.0, 1.0)
    if kw.get("gains") is not None and kw.get("fading_mean_power") is not None:
        kw.pop("gains")
    return ExperimentSpec(**kw)


def cmd_sweep(args) -> int:
    spec = _build_spec(args)
    snr_points = args.snr if args.snr is not None else []
    records = run_sweep(spec, snr_points)
    out = _out_path(args.out)
    write_csv(records, out)
    print(f"# {spec.detector}  {spec.scenario}  -> {out}")
    print(f"{'snr_db':>8} {'ber':>12} {'n_bits':>12} {'n_errors':>9} flagged")
    for r in records:
        print(
            f"{r.snr_db:8.2f} {r.ber:12.4e} {r.n_bits:12d} "
            f"{r.n_errors:9d} {int(r.flagged)}"
        )
    flagged = [r for r in records if r.flagged]
    if flagged:
        print(
            f"warning: {len(flagged)} record(s) hit max_bits before min_errors",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_inspect(args) -> int:
    config = SystemConfig(
        n_symbols=args.n_symbols,
        snr_db=args.snr_point,
    )
    gains = args.gains if args.gains is not None else (1.0, 1.0)
    channel = ChannelState(
        gain_a=gains[0],
        gain_b=gains[1],
        initial_phase_rad=float(args.phase) if args.phase not in (None, "rand") else 0.0,
        cfo_hz=float(args.cfo_hz) if args.cfo_hz not in (None, "rand") else 0.0,
    )
    rng = np.random.default_rng(args.seed)
    source = random_source_pair(config.n_symbols, rng)
    packet = synthesize_packet(source, channel, config, rng)
    det = args.detector
    if det == "genie":
        dec = genie_detect(packet, config)
    elif det == "mpd":
        dec = mpd_detect(packet, gains, config)
    elif det == "bpd":
        dec = bpd_detect(packet, gains, config, block_len=args.block_len)
    elif det == "kd":
        dec, _ = kd_detect(packet)
    elif det == "kd-mpd":
        dec = kd_mpd(packet, config)
    else:
        dec = kd_bpd(packet, config, block_len=args.block_len)

    n = np.arange(config.n_symbols)
    theta_true = relative_phase(n, channel, config)
    truth = source.xor_bits
    print(f"# {det}  gains={gains[0]:g}:{gains[1]:g}  snr={args.snr_point:g} dB")
    if dec.drift_hat is not None:
        drift_true = 2.0 * np.pi * channel.cfo_hz * config.symbol_duration_s
        print(f"# drift_hat={dec.drift_hat:+.6f} rad  (true {drift_true:+.6f})")
    print(f"{'n':>4} {'s':>2} {'s_hat':>5} {'theta':>8} {'theta_hat':>9} "
          f"{'|r1|':>8} {'|r2|':>8}")
    n_err = 0
    for i in range(config.n_symbols):
        th_hat = "" if dec.theta_hat is None else f"{dec.theta_hat[i]:9.4f}"
        print(
            f"{i:4d} {truth[i]:2d} {dec.xor_bits[i]:5d} {theta_true[i]:8.4f} "
            f"{th_hat:>9} {packet.mags[i, 0]:8.4f} {packet.mags[i, 1]:8.4f}"
        )
        n_err += int(dec.xor_bits[i] != truth[i])
    print(f"# symbol errors: {n_err}/{config.n_symbols}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fskpnc",
        description="BER experiments for noncoherent FSK network coding",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--detector", choices=DETECTORS, default=None)
        sp.add_argument("--gains", type=_parse_pair, default=None,
                        help="fixed channel gains, e.g. 1,1")
        sp.add_argument("--phase", default=None,
                        help="initial relative phase in radians, or 'rand'")
        sp.add_argument("--cfo-hz", dest="cfo_hz", default=None,
                        help="carrier frequency offset in Hz, or 'rand'")
        sp.add_argument("--block-len", dest="block_len", type=int, default=None)
        sp.add_argument("--n-symbols", dest="n_symbols", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)

    sw = sub.add_parser("sweep", help="run a BER sweep and write a CSV")
    common(sw)
    sw.add_argument("--snr", type=_parse_snr_range, default=None,
                    help="SNR grid lo:hi:step in dB, or a single value")
    sw.add_argument("--rayleigh", dest="fading_mean_power", type=_parse_pair,
                    default=None, help="Rayleigh fading mean powers, e.g. 1,1")
    sw.add_argument("--min-errors", dest="min_errors", type=int, default=None)
    sw.add_argument("--max-bits", dest="max_bits", type=int, default=None)
    sw.add_argument("--record-timing", dest="record_timing",
                    action="store_true", default=None)
    sw.add_argument("--spec-file", default=None,
                    help="key = value file mirroring the experiment fields")
    sw.add_argument("--out", required=True, help="output CSV path")
    sw.set_defaults(func=cmd_sweep)

    ins = sub.add_parser("inspect", help="synthesize one packet and detect it")
    common(ins)
    ins.add_argument("--snr", dest="snr_point", type=float, default=30.0,
                     help="SNR of the single packet in dB")
    ins.set_defaults(func=cmd_inspect)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "inspect" and args.detector is None:
        args.detector = "bpd"
    if args.command == "inspect" and args.n_symbols is None:
        args.n_symbols = 128
    if args.command == "inspect" and args.block_len is None:
        args.block_len = 16
    if args.command == "inspect" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
