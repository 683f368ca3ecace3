"""Gain-estimator checks: moment stage, grid-search stage against an
independent argmax, fallback behaviour, and the composed pipelines."""

import numpy as np
import pytest

from fskpnc.detectors import PhaseGrid, bpd_decide, kd_detect, mpd_decide
from fskpnc.estimator import (
    EstimatorParams,
    GainEstimate,
    _fallback_i1,
    estimate_gains,
    fine_gains,
    kd_bpd,
    kd_mpd,
    rough_gains,
)
from fskpnc.likelihood import log_rician
from fskpnc.model import (
    ChannelState,
    Packet,
    SystemConfig,
    random_source_pair,
    synthesize_packet,
)

PHASE = 0.2 * np.pi


def make_packet(snr_db=20.0, gains=(1.0, 2.0), seed=0, cfo=-2000.0):
    config = SystemConfig(snr_db=snr_db)
    chan = ChannelState(gains[0], gains[1], initial_phase_rad=PHASE, cfo_hz=cfo)
    rng = np.random.default_rng(seed)
    source = random_source_pair(config.n_symbols, rng)
    return synthesize_packet(source, chan, config, rng), config, source


def test_rough_gains_noiseless():
    # pure s=1 symbols with no noise: moments recover the gains exactly
    # once the (zero) noise bias is removed
    mags = np.tile([[1.0, 2.0]], (32, 1))
    lo, hi = rough_gains(Packet(mags), np.arange(32), n0=0.0)
    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(2.0)


def test_rough_gains_subtracts_noise_bias():
    mags = np.tile([[1.0, 2.0]], (8, 1))
    lo, hi = rough_gains(Packet(mags), np.arange(8), n0=0.19)
    assert lo == pytest.approx(np.sqrt(1.0 - 0.19))
    assert hi == pytest.approx(np.sqrt(4.0 - 0.19))
    # bias larger than the moment clamps at zero instead of going complex
    lo2, _ = rough_gains(Packet(mags * 0.1), np.arange(8), n0=0.5)
    assert lo2 == 0.0


def test_rough_gains_empty_cluster_raises():
    with pytest.raises(ValueError):
        rough_gains(Packet(np.ones((4, 2))), np.array([], int), 0.1)


def test_fine_gains_matches_independent_argmax():
    packet, config, _ = make_packet(seed=3)
    _, (_, i1) = kd_detect(packet)
    rough = rough_gains(packet, i1, config.n0)
    params = EstimatorParams()
    est = fine_gains(packet, i1, rough, config.n0, params)

    # brute-force re-evaluation of the same candidate grid with a
    # test-local objective built straight from the Rician density
    def grid_for(r):
        b = params.beta(r)
        return np.linspace(max(r - b, 0.0), r + b, params.n_grid)

    cands_lo, cands_hi = grid_for(rough[0]), grid_for(rough[1])
    m1, m2 = packet.mags[i1, 0], packet.mags[i1, 1]
    best, arg = -np.inf, None
    for lo in cands_lo:
        for hi in cands_hi:
            ll = np.logaddexp(
                log_rician(m1, lo, config.n0) + log_rician(m2, hi, config.n0),
                log_rician(m1, hi, config.n0) + log_rician(m2, lo, config.n0),
            ) + np.log(0.5)
            total = ll.sum()
            if total > best:
                best, arg = total, (lo, hi)
    assert est.h_min == pytest.approx(min(arg), abs=1e-12)
    assert est.h_max == pytest.approx(max(arg), abs=1e-12)


def test_estimate_gains_consistency():
    errs = []
    for seed in range(60):
        packet, config, _ = make_packet(snr_db=20.0, gains=(1.0, 2.0),
                                        seed=seed)
        est = estimate_gains(packet, config.n0)
        errs.append((abs(est.h_min - 1.0), abs(est.h_max - 2.0)))
        assert not est.flagged
        assert est.n_used > 16
    errs = np.array(errs)
    assert np.median(errs[:, 0]) < 0.1
    assert np.median(errs[:, 1]) < 0.1


def test_estimate_gains_scale_equivariance():
    packet, config, _ = make_packet(seed=9)
    est1 = estimate_gains(packet, config.n0)
    est2 = estimate_gains(Packet(packet.mags * 2.0), config.n0 * 4.0)
    # same SNR, doubled amplitudes: the whole pipeline scales linearly
    assert est2.h_min == pytest.approx(2.0 * est1.h_min, rel=1e-9)
    assert est2.h_max == pytest.approx(2.0 * est1.h_max, rel=1e-9)


def test_fallback_takes_largest_quarter():
    rhat = np.array([0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.5])
    mags = np.stack([rhat, rhat + 1.0], axis=1)  # min along axis 1 is rhat
    idx = _fallback_i1(Packet(mags))
    assert len(idx) == 3  # ceil(9 / 4)
    assert set(idx) == {1, 3, 5}


def test_estimate_gains_flags_degenerate_packet():
    mags = np.tile([[2.0, 0.3]], (64, 1))
    est = estimate_gains(Packet(mags), 0.1)
    assert est.flagged
    assert est.n_used == 16


def test_gain_estimate_validation():
    with pytest.raises(ValueError):
        GainEstimate(h_min=2.0, h_max=1.0, rough_min=1.0, rough_max=1.0,
                     n_used=4)


def test_kd_bpd_composes_estimator_and_bpd():
    packet, config, _ = make_packet(seed=4)
    grid = PhaseGrid()
    dec, est = kd_bpd(packet, config, grid, return_estimate=True)
    bits = bpd_decide(
        packet.mags[None], (est.h_min, est.h_max), config.n0, grid, 16
    )[0][0]
    assert np.array_equal(dec.xor_bits, bits)


def test_kd_mpd_composes_estimator_and_mpd():
    packet, config, _ = make_packet(seed=4)
    grid = PhaseGrid()
    dec, est = kd_mpd(packet, config, grid, return_estimate=True)
    bits = mpd_decide(
        packet.mags[None], (est.h_min, est.h_max), config.n0, grid
    )[0]
    assert np.array_equal(dec.xor_bits, bits)


def test_kd_bpd_near_genie_at_high_snr():
    packet, config, source = make_packet(snr_db=25.0, seed=6)
    dec = kd_bpd(packet, config)
    assert np.mean(dec.xor_bits == source.xor_bits) > 0.97
