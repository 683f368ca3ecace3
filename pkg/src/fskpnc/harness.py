"""Monte Carlo BER harness: single points, target-BER search, CSV sweeps.

Runtime cost is dominated by the low-BER points, so everything is batched:
packets are simulated and detected in groups of `batch_packets`, and the
stopping rule (collect `min_errors` errors, bail out at `max_bits`) is
checked only between batches.  All randomness derives from
np.random.SeedSequence spawned off (seed, snr, batch index), so a record
is reproducible in isolation, independent of which other points ran.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .detectors import PhaseGrid, bpd_decide, genie_decide, kd_decide, mpd_decide
from .estimator import EstimatorParams, estimate_gains
from .model import Packet, snr_db_to_n0, synthesize_magnitudes

TWO_PI = 2.0 * np.pi

DETECTORS = ("genie", "mpd", "bpd", "kd", "kd-mpd", "kd-bpd")

CSV_HEADER = "detector,scenario,snr_db,ber,n_bits,n_errors,seed,flagged,wall_time_s"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that defines one BER curve except the SNR axis.

    Exactly one of `gains` (fixed channel gains) and `fading_mean_power`
    (per-user Rayleigh fading, E[|h|^2] given) must be set.  `phase_rad`
    or `cfo_hz` set to None means: draw uniformly per packet (phase over
    [0, 2*pi), CFO over [-cfo_bound_hz, +cfo_bound_hz]).
    """

    detector: str
    snr_points_db: Tuple[float, ...] = ()
    gains: Optional[Tuple[float, float]] = None
    fading_mean_power: Optional[Tuple[float, float]] = None
    phase_rad: Optional[float] = 0.0
    cfo_hz: Optional[float] = 0.0
    block_len: int = 16
    n_symbols: int = 128
    symbol_duration_s: float = 1e-6
    cfo_bound_hz: float = 10_000.0
    n_theta: int = 40
    n_drift: int = 40
    min_errors: int = 200
    max_bits: int = 500_000_000
    batch_packets: int = 256
    seed: int = 0
    record_timing: bool = False

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if (self.gains is None) == (self.fading_mean_power is None):
            raise ValueError("set exactly one of gains / fading_mean_power")
        if self.min_errors < 50:
            raise ValueError("min_errors must be >= 50")
        if self.max_bits < self.n_symbols:
            raise ValueError("max_bits must cover at least one packet")
        if not all(np.isfinite(s) for s in (self.snr_points_db or ())):
            raise ValueError("snr points must be finite")
        if self.batch_packets < 1:
            raise ValueError("batch_packets must be >= 1")
        if self.cfo_hz is not None and abs(self.cfo_hz) > self.cfo_bound_hz:
            raise ValueError("cfo_hz outside cfo_bound_hz")

    @property
    def grid(self) -> PhaseGrid:
        bound = TWO_PI * self.cfo_bound_hz * self.symbol_duration_s
        return PhaseGrid(
            n_theta=self.n_theta, n_drift=self.n_drift,
            drift_lo=-bound, drift_hi=bound,
        )

    @property
    def scenario(self) -> str:
        if self.gains is not None:
            chan = "gains=%g:%g" % self.gains
        else:
            chan = "rayleigh=%g:%g" % self.fading_mean_power
        phase = "rand" if self.phase_rad is None else "%g" % self.phase_rad
        cfo = "rand" if self.cfo_hz is None else "%g" % self.cfo_hz
        return f"{chan};phase={phase};cfo={cfo};L={self.block_len}"


@dataclass(frozen=True)
class BerRecord:
    """One measured BER point; `flagged` means max_bits hit short of
    min_errors, so the estimate is low-confidence."""

    detector: str
    scenario: str
    snr_db: float
    ber: float
    n_bits: int
    n_errors: int
    seed: int
    flagged: bool
    wall_time_s: float = 0.0


def _batch_rng(spec: ExperimentSpec, snr_db: float, batch_index: int):
    snr_key = int(round(snr_db * 1e6)) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(
        np.random.SeedSequence((spec.seed, snr_key, batch_index))
    )


def _draw_batch(spec: ExperimentSpec, n_packets: int, n0: float, rng):
    """Simulate one batch.  Returns (mags, xor_bits, theta, ga, gb) where
    the gains are scalars (fixed channel) or (B,) arrays (fading)."""
    B, N = n_packets, spec.n_symbols
    bits = rng.integers(0, 2, size=(2, B, N), dtype=np.uint8)
    if spec.gains is not None:
        ga, gb = float(spec.gains[0]), float(spec.gains[1])
        ga_bc, gb_bc = ga, gb
    else:
        pa, pb = spec.fading_mean_power
        z = rng.standard_normal((2, 2, B))
        ga = np.sqrt(pa / 2.0) * np.hypot(z[0, 0], z[0, 1])
        gb = np.sqrt(pb / 2.0) * np.hypot(z[1, 0], z[1, 1])
        ga_bc, gb_bc = ga[:, None], gb[:, None]
    phase = (
        rng.uniform(0.0, TWO_PI, size=B)
        if spec.phase_rad is None
        else np.full(B, spec.phase_rad)
    )
    cfo = (
        rng.uniform(-spec.cfo_bound_hz, spec.cfo_bound_hz, size=B)
        if spec.cfo_hz is None
        else np.full(B, spec.cfo_hz)
    )
    n = np.arange(N)
    theta = np.mod(
        TWO_PI * cfo[:, None] * n * spec.symbol_duration_s + phase[:, None], TWO_PI
    )
    mags = synthesize_magnitudes(bits[0], bits[1], ga_bc, gb_bc, theta, n0, rng)
    return mags, np.bitwise_xor(bits[0], bits[1]), theta, ga, gb


def _estimated_gain_arrays(mags, n0: float):
    B = mags.shape[0]
    h_min = np.empty(B)
    h_max = np.empty(B)
    params = EstimatorParams()
    for b in range(B):
        est = estimate_gains(Packet(mags[b]), n0, params)
        h_min[b], h_max[b] = est.h_min, est.h_max
    return h_min, h_max


def _detect_batch(spec: ExperimentSpec, mags, theta, ga, gb, n0: float):
    det = spec.detector
    if det == "genie":
        return genie_decide(mags, theta, (ga, gb), n0)
    if det == "mpd":
        return mpd_decide(mags, (ga, gb), n0, spec.grid)
    if det == "bpd":
        return bpd_decide(
            mags, (ga, gb), n0, spec.grid, spec.block_len,
            want_theta=False, dtype=np.float32,
        )[0]
    if det == "kd":
        return kd_decide(mags)
    h_min, h_max = _estimated_gain_arrays(mags, n0)
    if det == "kd-mpd":
        return mpd_decide(mags, (h_min, h_max), n0, spec.grid)
    return bpd_decide(
        mags, (h_min, h_max), n0, spec.grid, spec.block_len,
        want_theta=False, dtype=np.float32,
    )[0]


def run_ber_point(spec: ExperimentSpec, snr_db: float) -> BerRecord:
    """Measure BER at one SNR under the spec's stopping rule.

    Batches are consumed in a fixed order, so the result is deterministic
    for a given (spec, snr_db) regardless of context.
    """
    t0 = time.perf_counter() if spec.record_timing else 0.0
    n0 = snr_db_to_n0(snr_db)
    n_bits = 0
    n_errors = 0
    batch_index = 0
    while n_errors < spec.min_errors and n_bits < spec.max_bits:
        room = (spec.max_bits - n_bits + spec.n_symbols - 1) // spec.n_symbols
        B = int(min(spec.batch_packets, room))
        rng = _batch_rng(spec, snr_db, batch_index)
        mags, xor_bits, theta, ga, gb = _draw_batch(spec, B, n0, rng)
        hat = _detect_batch(spec, mags, theta, ga, gb, n0)
        n_errors += int(np.count_nonzero(hat != xor_bits))
        n_bits += B * spec.n_symbols
        batch_index += 1
    wall = time.perf_counter() - t0 if spec.record_timing else 0.0
    return BerRecord(
        detector=spec.detector,
        scenario=spec.scenario,
        snr_db=float(snr_db),
        ber=n_errors / n_bits,
        n_bits=n_bits,
        n_errors=n_errors,
        seed=spec.seed,
        flagged=n_errors < spec.min_errors,
        wall_time_s=wall,
    )


def snr_for_target_ber(
    spec: ExperimentSpec,
    target_ber: float,
    lo_db: float,
    hi_db: float,
    tol_db: float = 0.1,
    coarse_min_errors: int = 60,
):
    """SNR at which the BER curve crosses `target_ber`, by bisection.

    Assumes BER decreases in SNR over [lo_db, hi_db] and that the bracket
    straddles the target; raises ValueError otherwise.  While the bracket
    is wide (> 4*tol_db) probes use `coarse_min_errors`; the final probes
    use the spec's own min_errors.  Probe max_bits is capped near
    1.5*min_errors/target_ber: a point whose BER sits well below target
    then stops early (flagged), which still orders it correctly.

    Returns (snr_db, records) with snr_db the bracket midpoint.
    """
    if not (0.0 < target_ber < 1.0) or not lo_db < hi_db:
        raise ValueError("bad target or bracket")
    records: List[BerRecord] = []

    def probe(snr, min_errors):
        cap = int(np.ceil(1.5 * min_errors / target_ber))
        p = replace(spec, min_errors=min_errors,
                    max_bits=min(spec.max_bits, cap))
        rec = run_ber_point(p, snr)
        records.append(rec)
        return rec.ber

    if probe(lo_db, coarse_min_errors) <= target_ber:
        raise ValueError(f"BER at lo_db={lo_db} already <= target")
    if probe(hi_db, coarse_min_errors) > target_ber:
        raise ValueError(f"BER at hi_db={hi_db} still > target")
    while hi_db - lo_db > tol_db:
        mid = 0.5 * (lo_db + hi_db)
        me = coarse_min_errors if hi_db - lo_db > 4.0 * tol_db else spec.min_errors
        if probe(mid, me) > target_ber:
            lo_db = mid
        else:
            hi_db = mid
    return 0.5 * (lo_db + hi_db), records


def run_sweep(
    spec: ExperimentSpec,
    snr_points_db: Optional[Sequence[float]] = None,
) -> List[BerRecord]:
    """BER records along an SNR axis (default: the spec's own points)."""
    points = spec.snr_points_db if snr_points_db is None else snr_points_db
    return [run_ber_point(spec, s) for s in points]


def _fmt_record(r: BerRecord) -> str:
    return ",".join(
        (
            r.detector,
            r.scenario,
            repr(r.snr_db),
            repr(r.ber),
            str(r.n_bits),
            str(r.n_errors),
            str(r.seed),
            str(int(r.flagged)),
            "%.3f" % r.wall_time_s,
        )
    )


def write_csv(records: Sequence[BerRecord], path: str) -> None:
    """Atomic CSV dump: header always present, one line per record.

    Written via a temp file + os.replace so readers never see a partial
    file.  With record_timing off, output bytes depend only on the spec,
    the SNR points, and the seed.
    """
    out_dir = os.path.dirname(os.path.abspath(path)) or "."
    lines = [CSV_HEADER] + [_fmt_record(r) for r in records]
    body = "\n".join(lines) + "\n"
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".csv-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path: str) -> List[BerRecord]:
    """Inverse of write_csv."""
    records = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 9:
                raise ValueError(f"malformed CSV row in {path}")
            tail = parts[2:]
            records.append(
                BerRecord(
                    detector=parts[0],
                    scenario=parts[1],
                    snr_db=float(tail[0]),
                    ber=float(tail[1]),
                    n_bits=int(tail[2]),
                    n_errors=int(tail[3]),
                    seed=int(tail[4]),
                    flagged=bool(int(tail[5])),
                    wall_time_s=float(tail[6]),
                )
            )
    return records
