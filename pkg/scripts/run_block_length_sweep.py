"""BER vs SNR for the known-gain detectors at a fixed relative phase.

Reproduces the block-length comparison: genie phase detector, phase
marginalization, and blockwise phase tracking with L = 4, 8, 16.
Writes one CSV per detector plus a combined semilog figure.

Usage: python scripts/run_block_length_sweep.py --out-dir results \
           --snr 8:18:1 --min-errors 100
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fskpnc.cli import _parse_snr_range
from fskpnc.harness import ExperimentSpec, run_sweep, write_csv

PHASE = 0.2 * math.pi

CURVES = (
    ("genie", 16, "perfpd"),
    ("bpd", 16, "bpd16"),
    ("bpd", 8, "bpd8"),
    ("bpd", 4, "bpd4"),
    ("mpd", 16, "mpd"),
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--snr", type=_parse_snr_range, default="8:18:1")
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--max-bits", type=int, default=200_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-figure", action="store_true")
    args = ap.parse_args(argv)
    snrs = args.snr if isinstance(args.snr, list) else _parse_snr_range(args.snr)

    os.makedirs(args.out_dir, exist_ok=True)
    paths = []
    for detector, block_len, tag in CURVES:
        spec = ExperimentSpec(
            detector=detector, gains=(1.0, 1.0), phase_rad=PHASE, cfo_hz=0.0,
            block_len=block_len, min_errors=args.min_errors,
            max_bits=args.max_bits, seed=args.seed,
        )
        path = os.path.join(args.out_dir, f"block_len_{tag}.csv")
        write_csv(run_sweep(spec, snrs), path)
        paths.append(path)
        print(f"wrote {path}")

    if not args.no_figure:
        from plots import FigureSpec, plot_ber

        out = os.path.join(args.out_dir, "ber_vs_snr_block_len.pdf")
        labels = {
            "genie": {"label": "PerfPD"},
            "mpd": {"label": "MPD"},
        }
        plot_ber(FigureSpec(tuple(paths), out, styles=labels))
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
