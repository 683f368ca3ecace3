"""BER vs SNR with unequal channel gains and no gain knowledge.

Compares the known-gain genie against the blind pipelines (K-means alone,
and K-means feeding gain estimates into the block phase tracker) for gain
ratios 1, 2 and 10 at a -2 kHz frequency offset.  Doubling both gains
shifts every curve left by about 6 dB, a pure power effect.

Usage: python scripts/run_gain_asymmetry.py --out-dir results
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fskpnc.cli import _parse_snr_range
from fskpnc.harness import ExperimentSpec, run_sweep, write_csv

PHASE = 0.2 * math.pi


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--snr", type=_parse_snr_range, default="4:16:1")
    ap.add_argument("--ratios", type=float, nargs="*", default=[1.0, 2.0, 10.0])
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--max-bits", type=int, default=100_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-figure", action="store_true")
    args = ap.parse_args(argv)
    snrs = args.snr if isinstance(args.snr, list) else _parse_snr_range(args.snr)

    os.makedirs(args.out_dir, exist_ok=True)
    for ratio in args.ratios:
        paths = []
        for detector in ("genie", "kd-bpd", "kd"):
            spec = ExperimentSpec(
                detector=detector, gains=(1.0, ratio), phase_rad=PHASE,
                cfo_hz=-2000.0, block_len=16, min_errors=args.min_errors,
                max_bits=args.max_bits, seed=args.seed,
            )
            path = os.path.join(
                args.out_dir, f"gains_1_{ratio:g}_{detector}.csv"
            )
            write_csv(run_sweep(spec, snrs), path)
            paths.append(path)
            print(f"wrote {path}")

        if not args.no_figure:
            from plots import FigureSpec, plot_ber

            out = os.path.join(args.out_dir, f"ber_vs_snr_ratio_{ratio:g}.pdf")
            plot_ber(
                FigureSpec(
                    tuple(paths), out,
                    styles={"genie": {"label": "PerfPGD"},
                            "kd-bpd": {"label": "KD-BPD"},
                            "kd": {"label": "KD"}},
                )
            )
            print(f"wrote {out}")


if __name__ == "__main__":
    main()
