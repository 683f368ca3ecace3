"""Log-domain conditional densities of the per-symbol magnitude pair.

Given the XOR symbol s, the relative phase theta, and the two channel
gains, each received magnitude is Rician (signal present on that branch)
or Rayleigh (noise only).  For s = 0 the two users share one frequency and
the signal amplitude on that branch is the phase-dependent superposition
sqrt(ga^2 + gb^2 + 2*ga*gb*cos(theta)); for s = 1 the branches carry the
two gains separately and the density does not depend on theta.  Both cases
are equal-weight two-term mixtures because the XOR symbol does not reveal
which user sent which bit.

Everything is computed in the log domain with log-sum-exp mixing; the
Bessel I0 factor is evaluated through the exponentially scaled i0e so that
arguments of order 2*a*r/N0 (easily > 700 at high SNR) never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0e

_LOG_HALF = float(np.log(0.5))


@dataclass(frozen=True)
class LikelihoodContext:
    """Conditioning variables shared by all per-symbol densities."""

    gain_a: float
    gain_b: float
    n0: float

    def __post_init__(self):
        if not (self.n0 > 0.0 and np.isfinite(self.n0)):
            raise ValueError(f"n0 must be positive and finite, got {self.n0}")
        for name in ("gain_a", "gain_b"):
            g = getattr(self, name)
            if not (g >= 0.0 and np.isfinite(g)):
                raise ValueError(f"{name} must be nonnegative and finite, got {g}")


def log_i0(x):
    """log of the modified Bessel function I0, stable for large x."""
    x = np.asarray(x, dtype=float)
    return np.log(i0e(x)) + x


def log_rayleigh(r, n0):
    """log density of |CN(0, n0)|; -inf at r <= 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0.0, np.log(2.0 * r / n0) - r * r / n0, -np.inf)
    return out


def log_rician(r, amp, n0):
    """log density of |amp * e^{j*phi} + CN(0, n0)|; -inf at r <= 0.

    amp = 0 reduces exactly to the Rayleigh density (I0(0) = 1).
    """
    r = np.asarray(r, dtype=float)
    amp = np.asarray(amp, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        body = (
            np.log(2.0 * r / n0)
            - (r * r + amp * amp) / n0
            + log_i0(2.0 * amp * r / n0)
        )
        out = np.where(r > 0.0, body, -np.inf)
    return out


def superposed_amplitude(theta, gain_a, gain_b):
    """Amplitude of the two-user superposition on a shared frequency."""
    theta = np.asarray(theta, dtype=float)
    a2 = gain_a * gain_a + gain_b * gain_b + 2.0 * gain_a * gain_b * np.cos(theta)
    return np.sqrt(np.maximum(a2, 0.0))


def log_lik_s0(mag1, mag2, theta, ctx: LikelihoodContext):
    """log Pr(r | s=0, theta, gains): superposition on one of the branches.

    Equal-weight mixture of (both users on frequency 1) and (both on
    frequency 2); the silent branch is Rayleigh.  Broadcasts over all
    array arguments.
    """
    amp = superposed_amplitude(theta, ctx.gain_a, ctx.gain_b)
    term1 = log_rician(mag1, amp, ctx.n0) + log_rayleigh(mag2, ctx.n0)
    term2 = log_rayleigh(mag1, ctx.n0) + log_rician(mag2, amp, ctx.n0)
    return np.logaddexp(term1, term2) + _LOG_HALF


def log_lik_s1(mag1, mag2, ctx: LikelihoodContext):
    """log Pr(r | s=1, gains): distinct frequencies, theta-independent."""
    return joint_log_lik_s1(mag1, mag2, ctx.gain_a, ctx.gain_b, ctx.n0)


def joint_log_lik_s1(mag1, mag2, hmin, hmax, n0):
    """log Pr(r | s=1, hmin, hmax): product Ricians, symmetrized over which
    branch carries which gain.  Used directly by the gain grid search."""
    term1 = log_rician(mag1, hmin, n0) + log_rician(mag2, hmax, n0)
    term2 = log_rician(mag1, hmax, n0) + log_rician(mag2, hmin, n0)
    return np.logaddexp(term1, term2) + _LOG_HALF


def log_lik(obs, s, theta, ctx: LikelihoodContext):
    """log Pr(obs | s, theta, ctx) for a single magnitude pair."""
    mag1, mag2 = obs
    if s == 0:
        return log_lik_s0(mag1, mag2, theta, ctx)
    if s == 1:
        return log_lik_s1(mag1, mag2, ctx)
    raise ValueError(f"s must be 0 or 1, got {s}")
