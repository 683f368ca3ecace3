"""Locate the required-SNR crossings coarsely for every figure scenario.

Walks each BER curve in 1 dB steps with cheap capped probes until it
straddles the target, and dumps the brackets to JSON.  The acceptance
runs and the figure scripts start their bisections from these brackets
instead of scanning from scratch.

Usage: python scripts/calibrate.py [out.json]
"""

import json
import sys
import time
from dataclasses import replace

import numpy as np

from fskpnc.harness import ExperimentSpec, run_ber_point

PHASE = 0.2 * np.pi


def scan(spec, target, guess_db, step_db=1.0, min_errors=50, max_steps=40):
    """Bracket the SNR where BER crosses target; returns (lo, hi, probes)."""
    cap = int(np.ceil(1.5 * min_errors / target))
    s = replace(spec, min_errors=min_errors, max_bits=min(spec.max_bits, cap))
    probes = {}

    def ber(snr):
        if snr not in probes:
            probes[snr] = run_ber_point(s, snr).ber
        return probes[snr]

    snr = guess_db
    direction = 1.0 if ber(snr) > target else -1.0
    for _ in range(max_steps):
        nxt = snr + direction * step_db
        above_now = ber(snr) > target
        above_nxt = ber(nxt) > target
        if above_now != above_nxt:
            lo, hi = sorted((snr, nxt))
            return lo, hi, probes
        snr = nxt
    raise RuntimeError(f"no crossing found near {guess_db} dB")


def scenarios():
    out = []
    fig5 = dict(gains=(1.0, 1.0), phase_rad=PHASE, cfo_hz=0.0)
    out += [
        ("fig5/genie", ExperimentSpec("genie", **fig5), 1e-5, 15.0),
        ("fig5/mpd", ExperimentSpec("mpd", **fig5), 1e-5, 17.0),
        ("fig5/bpd4", ExperimentSpec("bpd", block_len=4, **fig5), 1e-5, 16.0),
        ("fig5/bpd8", ExperimentSpec("bpd", block_len=8, **fig5), 1e-5, 16.0),
        ("fig5/bpd16", ExperimentSpec("bpd", block_len=16, **fig5), 1e-5, 15.0),
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        sp = ExperimentSpec("mpd", gains=(1.0, 1.0),
                            phase_rad=frac * np.pi, cfo_hz=0.0)
        out.append((f"fig6/mpd_th{frac:g}pi", sp, 1e-5, 17.0))
    out.append((
        "fig6/bpd16_th0",
        ExperimentSpec("bpd", gains=(1.0, 1.0), phase_rad=0.0, cfo_hz=0.0),
        1e-5, 15.0,
    ))
    for cfo in (-2000.0, -9000.0):
        base = dict(gains=(1.0, 1.0), phase_rad=PHASE, cfo_hz=cfo)
        tag = f"fig7/cfo{int(cfo)}"
        out += [
            (f"{tag}_genie", ExperimentSpec("genie", **base), 1e-5, 15.0),
            (f"{tag}_mpd", ExperimentSpec("mpd", **base), 1e-5, 17.0),
            (f"{tag}_bpd16", ExperimentSpec("bpd", **base), 1e-5, 15.0),
        ]
    for hb in (1.0, 2.0, 10.0):
        base = dict(gains=(1.0, hb), phase_rad=PHASE, cfo_hz=-2000.0)
        tag = f"fig10/hb{hb:g}"
        out += [
            (f"{tag}_genie", ExperimentSpec("genie", **base), 1e-4, 13.0),
            (f"{tag}_kd", ExperimentSpec("kd", **base), 1e-4, 16.0),
            (f"{tag}_kdbpd", ExperimentSpec("kd-bpd", **base), 1e-4, 13.0),
        ]
    out.append((
        "fig10/hb2x_kdbpd",
        ExperimentSpec("kd-bpd", gains=(2.0, 2.0), phase_rad=PHASE,
                       cfo_hz=-2000.0),
        1e-4, 7.0,
    ))
    fig11 = dict(fading_mean_power=(1.0, 1.0), phase_rad=PHASE, cfo_hz=-2000.0)
    out += [
        ("fig11/kdbpd", ExperimentSpec("kd-bpd", **fig11), 1e-3, 22.0),
        ("fig11/kdmpd", ExperimentSpec("kd-mpd", **fig11), 1e-3, 23.0),
    ]
    return out


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "calibration.json"
    results = {}
    for name, spec, target, guess in scenarios():
        t0 = time.time()
        lo, hi, probes = scan(spec, target, guess)
        results[name] = {
            "lo_db": lo,
            "hi_db": hi,
            "target_ber": target,
            "probes": {f"{k:g}": v for k, v in sorted(probes.items())},
        }
        print(f"{name:24s} [{lo:5.1f}, {hi:5.1f}] dB  ({time.time()-t0:.0f}s)",
              flush=True)
        with open(out_path, "w") as fh:
            json.dump(results, fh, indent=1, sort_keys=True)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
