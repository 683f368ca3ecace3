"""Density-level checks: closed forms against mpmath, normalization by
quadrature, and exact structural symmetries."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fskpnc.likelihood import (
    LikelihoodContext,
    joint_log_lik_s1,
    log_i0,
    log_lik,
    log_lik_s0,
    log_lik_s1,
    log_rayleigh,
    log_rician,
    superposed_amplitude,
)

mpmath.mp.dps = 50


def mp_log_rician(r, amp, n0):
    r, amp, n0 = map(mpmath.mpf, (r, amp, n0))
    return float(
        mpmath.log(2 * r / n0)
        - (r * r + amp * amp) / n0
        + mpmath.log(mpmath.besseli(0, 2 * amp * r / n0))
    )


@pytest.mark.parametrize(
    "x", [0.0, 1e-8, 0.5, 1.0, 10.0, 100.0, 700.0, 5000.0, 2e6]
)
def test_log_i0_against_mpmath(x):
    ref = float(mpmath.log(mpmath.besseli(0, x)))
    assert log_i0(x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "r,amp,n0",
    [
        (0.5, 1.0, 0.1),
        (1.3, 0.7, 0.5),
        (2.0, 2.0, 0.01),
        (1.0, 1.0, 1e-6),  # Bessel argument 2e6, far past naive overflow
        (0.01, 3.0, 0.2),
    ],
)
def test_log_rician_against_mpmath(r, amp, n0):
    assert log_rician(r, amp, n0) == pytest.approx(
        mp_log_rician(r, amp, n0), rel=1e-11
    )


def test_log_rician_zero_amp_is_rayleigh_exactly():
    r = np.linspace(0.01, 5.0, 200)
    assert np.array_equal(log_rician(r, 0.0, 0.3), log_rayleigh(r, 0.3))


def test_nonpositive_magnitude_has_zero_density():
    assert log_rayleigh(0.0, 0.5) == -np.inf
    assert log_rician(-1.0, 1.0, 0.5) == -np.inf


def _trapz_1d(logf, lo, hi, n=20001):
    r = np.linspace(lo, hi, n)
    return np.trapezoid(np.exp(logf(r)), r)


@pytest.mark.parametrize("n0", [0.05, 0.5, 2.0])
def test_rayleigh_normalizes(n0):
    total = _trapz_1d(lambda r: log_rayleigh(r, n0), 1e-9, 12 * np.sqrt(n0))
    assert total == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("amp,n0", [(1.0, 0.1), (0.3, 0.5), (2.5, 0.05)])
def test_rician_normalizes(amp, n0):
    hi = amp + 12 * np.sqrt(n0)
    total = _trapz_1d(lambda r: log_rician(r, amp, n0), 1e-9, hi)
    assert total == pytest.approx(1.0, abs=1e-3)


def _joint_quadrature(logf, hi, n=801):
    r = np.linspace(1e-9, hi, n)
    z = np.exp(logf(r[:, None], r[None, :]))
    return np.trapezoid(np.trapezoid(z, r, axis=1), r)


@pytest.mark.parametrize("theta", [0.0, 0.7, np.pi, 4.0])
def test_joint_density_s0_normalizes(theta):
    ctx = LikelihoodContext(gain_a=1.0, gain_b=0.8, n0=0.3)
    hi = 2.0 + 12 * np.sqrt(ctx.n0)
    total = _joint_quadrature(
        lambda a, b: log_lik_s0(a, b, theta, ctx), hi
    )
    assert total == pytest.approx(1.0, abs=1e-3)


def test_joint_density_s1_normalizes():
    ctx = LikelihoodContext(gain_a=1.0, gain_b=0.8, n0=0.3)
    hi = 2.0 + 12 * np.sqrt(ctx.n0)
    total = _joint_quadrature(lambda a, b: log_lik_s1(a, b, ctx), hi)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_phase_reflection_symmetry():
    ctx = LikelihoodContext(gain_a=1.0, gain_b=1.4, n0=0.2)
    m1, m2 = 0.9, 1.7
    thetas = np.linspace(0.0, np.pi, 57)
    # cos is even, so negated phase matches bit for bit
    assert np.array_equal(
        log_lik_s0(m1, m2, thetas, ctx), log_lik_s0(m1, m2, -thetas, ctx)
    )
    np.testing.assert_allclose(
        log_lik_s0(m1, m2, thetas, ctx),
        log_lik_s0(m1, m2, 2 * np.pi - thetas, ctx),
        rtol=1e-12,
    )


def test_s1_independent_of_theta():
    ctx = LikelihoodContext(gain_a=0.9, gain_b=1.1, n0=0.4)
    obs = (1.2, 0.4)
    vals = {log_lik(obs, 1, th, ctx) for th in (0.0, 1.0, 3.0)}
    assert len(vals) == 1


def test_superposed_amplitude_extremes():
    assert superposed_amplitude(0.0, 1.0, 1.0) == pytest.approx(2.0)
    assert superposed_amplitude(np.pi, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert superposed_amplitude(np.pi / 2, 3.0, 4.0) == pytest.approx(5.0)


@given(
    m1=st.floats(0.01, 5.0),
    m2=st.floats(0.01, 5.0),
    theta=st.floats(0.0, 2 * np.pi),
    ga=st.floats(0.0, 3.0),
    gb=st.floats(0.0, 3.0),
)
@settings(max_examples=200, deadline=None)
def test_branch_swap_symmetry(m1, m2, theta, ga, gb):
    # the XOR symbol never reveals which branch carried which user
    ctx = LikelihoodContext(gain_a=ga, gain_b=gb, n0=0.5)
    assert log_lik_s0(m1, m2, theta, ctx) == log_lik_s0(m2, m1, theta, ctx)
    assert log_lik_s1(m1, m2, ctx) == log_lik_s1(m2, m1, ctx)


@given(ga=st.floats(0.0, 3.0), gb=st.floats(0.0, 3.0))
@settings(max_examples=100, deadline=None)
def test_gain_swap_symmetry(ga, gb):
    a = joint_log_lik_s1(1.1, 0.6, ga, gb, 0.3)
    b = joint_log_lik_s1(1.1, 0.6, gb, ga, 0.3)
    assert a == b


def test_context_validation():
    with pytest.raises(ValueError):
        LikelihoodContext(gain_a=1.0, gain_b=1.0, n0=0.0)
    with pytest.raises(ValueError):
        LikelihoodContext(gain_a=-0.1, gain_b=1.0, n0=0.5)
    with pytest.raises(ValueError):
        log_lik((1.0, 1.0), 2, 0.0, LikelihoodContext(1.0, 1.0, 0.5))
