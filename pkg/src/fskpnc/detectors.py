"""XOR-symbol detectors: genie, phase-marginalizing, belief-propagation, K-means.

All detectors consume only the per-symbol magnitude pairs.  The belief
propagation detector (`bpd_detect`) exploits that the relative phase walks
linearly across a packet: per block of L symbols it runs an exact
forward/backward pass on the phase chain, once per hypothesized
per-symbol drift, and combines the drift hypotheses by their evidence.

Batch entry points (`*_decide`) operate on stacked magnitude arrays of
shape (B, N, 2) and are what the Monte Carlo harness calls; the
packet-level functions wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .likelihood import (
    log_rayleigh,
    log_rician,
    superposed_amplitude,
)
from .model import ChannelState, Packet, SystemConfig, relative_phase

_LOG_HALF = float(np.log(0.5))

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseGrid:
    """Discretization of the relative phase and its per-symbol drift."""

    n_theta: int = 40
    n_drift: int = 40
    drift_lo: float = -0.02 * np.pi
    drift_hi: float = 0.02 * np.pi

    def __post_init__(self):
        if self.n_theta < 2:
            raise ValueError("n_theta must be >= 2")
        if self.n_drift < 1:
            raise ValueError("n_drift must be >= 1")
        if self.drift_hi < self.drift_lo:
            raise ValueError("empty drift range")

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(self.n_theta) * (TWO_PI / self.n_theta)

    @property
    def drifts(self) -> np.ndarray:
        if self.n_drift == 1:
            return np.array([0.5 * (self.drift_lo + self.drift_hi)])
        return np.linspace(self.drift_lo, self.drift_hi, self.n_drift)


@dataclass(frozen=True)
class Decision:
    """Detected XOR bits plus optional phase-track estimates."""

    xor_bits: np.ndarray
    theta_hat: Optional[np.ndarray] = None
    drift_hat: Optional[float] = None


@dataclass(frozen=True)
class PosteriorGrid:
    """Discretized joint posterior over (s, theta) per drift hypothesis.

    `log_belief` has shape (N, n_drift, 2, n_theta) and is normalized per
    symbol: the drift-weighted sum over (s, theta, drift) of exp() is 1.
    `log_evidence` has shape (n_blocks, n_drift), up to a per-block
    constant.
    """

    log_belief: np.ndarray
    log_evidence: np.ndarray


# ---------------------------------------------------------------------------
# shared helpers


def _gain_arrays(gains):
    """Normalize gains to a pair of 0-d scalars or (B,) arrays."""
    ga = np.asarray(gains[0], dtype=float)
    gb = np.asarray(gains[1], dtype=float)
    if ga.ndim > 1 or gb.ndim > 1 or ga.shape != gb.shape:
        raise ValueError("gains must be scalars or matching (B,) arrays")
    return ga, gb


def _mix2(a, b):
    """Equal-weight log-mixture of two log-density terms."""
    return np.logaddexp(a, b) + _LOG_HALF


def _loglik_s1_pair(m1, m2, ga, gb, n0):
    return _mix2(
        log_rician(m1, ga, n0) + log_rician(m2, gb, n0),
        log_rician(m1, gb, n0) + log_rician(m2, ga, n0),
    )


def _loglik_s0_amp(m1, m2, amp, n0):
    return _mix2(
        log_rician(m1, amp, n0) + log_rayleigh(m2, n0),
        log_rayleigh(m1, n0) + log_rician(m2, amp, n0),
    )


def _upward_log_messages(mags, gains, n0, thetas):
    """Per-symbol log-likelihoods: s=0 on the theta grid, s=1 scalar.

    mags: (B, N, 2) -> ll0 (B, N, K), ll1 (B, N).  Gains may be scalars or
    per-packet (B,) arrays (fading scenarios, estimated gains).
    """
    ga, gb = _gain_arrays(gains)
    gaK, gbK = (ga[:, None, None], gb[:, None, None]) if ga.ndim else (ga, gb)
    gaN, gbN = (ga[:, None], gb[:, None]) if ga.ndim else (ga, gb)
    amp = superposed_amplitude(thetas, gaK, gbK)  # (K,) or (B, 1, K)
    ll0 = _loglik_s0_amp(mags[..., 0:1], mags[..., 1:2], amp, n0)
    ll1 = _loglik_s1_pair(mags[..., 0], mags[..., 1], gaN, gbN, n0)
    return ll0, ll1


def _logmeanexp(a, axis):
    amax = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.mean(np.exp(a - amax), axis=axis)) + np.squeeze(amax, axis=axis)
    return out


def _block_starts(n_symbols: int, block_len: int):
    """Block layout: full blocks of L; a short tail borrows from its left
    neighbour so every BP run spans exactly L symbols.  Returns a list of
    (start, n_decide) where the last n_decide symbols of the block are the
    ones whose decisions this block owns."""
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    if block_len > n_symbols:
        raise ValueError("block_len must not exceed the packet length")
    starts = [(i * block_len, block_len) for i in range(n_symbols // block_len)]
    rem = n_symbols % block_len
    if rem:
        starts.append((n_symbols - block_len, rem))
    return starts


# ---------------------------------------------------------------------------
# genie detector (perfect phase / perfect phase+gain benchmark)


def genie_decide(mags, theta_true, gains, n0):
    """Per-symbol MAP with the true relative phase supplied.

    mags (B, N, 2), theta_true (B, N); gains scalar or per-packet (B,).
    """
    ga, gb = _gain_arrays(gains)
    gaN, gbN = (ga[:, None], gb[:, None]) if ga.ndim else (ga, gb)
    amp = superposed_amplitude(theta_true, gaN, gbN)
    ll0 = _loglik_s0_amp(mags[..., 0], mags[..., 1], amp, n0)
    ll1 = _loglik_s1_pair(mags[..., 0], mags[..., 1], gaN, gbN, n0)
    return (ll1 > ll0).astype(np.uint8)


def genie_detect(
    packet: Packet,
    config: SystemConfig,
    channel: Optional[ChannelState] = None,
) -> Decision:
    """Benchmark detector with perfect knowledge of phase track and gains."""
    if channel is None:
        if packet.truth is None:
            raise ValueError("genie_detect requires packet.truth or an explicit channel")
        channel = packet.truth[1]
    n = np.arange(packet.n_symbols)
    theta = relative_phase(n, channel, config)
    bits = genie_decide(
        packet.mags[None], theta[None], (channel.gain_a, channel.gain_b), config.n0
    )[0]
    return Decision(xor_bits=bits, theta_hat=theta, drift_hat=None)


# ---------------------------------------------------------------------------
# marginalized-phase detector


def mpd_decide(mags, gains, n0, grid: PhaseGrid):
    """Symbol-by-symbol MAP after marginalizing theta uniformly per symbol."""
    ll0, ll1 = _upward_log_messages(mags, gains, n0, grid.thetas)
    stat0 = _logmeanexp(ll0, axis=-1)  # Riemann sum of the phase integral
    return (ll1 > stat0).astype(np.uint8)


def mpd_detect(
    packet: Packet,
    gains: Tuple[float, float],
    config: SystemConfig,
    grid: Optional[PhaseGrid] = None,
) -> Decision:
    grid = grid or PhaseGrid()
    bits = mpd_decide(packet.mags[None], gains, config.n0, grid)[0]
    return Decision(xor_bits=bits)


# ---------------------------------------------------------------------------
# belief propagation detector


def _shift_op(grid: PhaseGrid, sign: int, dtype):
    """Build v -> v(theta - sign*drift) for (..., D, K) grid functions.

    The drift magnitudes (<= 0.02*pi by default) are below one grid step,
    so a nearest-neighbour shift would alias them to zero; linear
    interpolation between the two straddling grid points keeps sub-bin
    drift.  When the integer parts stay in {-1, 0} (always true for
    sub-step drifts) the gather reduces to two rolls plus a lerp, which is
    the hot path of the whole detector.
    """
    k = grid.n_theta
    step = TWO_PI / k
    d = sign * grid.drifts / step  # shift in grid units
    m = np.floor(-d).astype(int)
    frac = (((-d) - m)[:, None]).astype(dtype)  # in [0, 1)

    if np.all((m == 0) | (m == -1)):
        neg = (m == -1)[:, None]
        c_prev = np.where(neg, 1.0 - frac, 0.0).astype(dtype)
        c_self = np.where(neg, frac, 1.0 - frac).astype(dtype)
        c_next = np.where(neg, 0.0, frac).astype(dtype)

        def shift(v):
            return (
                c_prev * np.roll(v, 1, axis=-1)
                + c_self * v
                + c_next * np.roll(v, -1, axis=-1)
            )

        return shift

    j = np.arange(k)
    idx0 = (j[None, :] + m[:, None]) % k
    idx1 = (idx0 + 1) % k

    def shift(v):
        g0 = np.take_along_axis(v, np.broadcast_to(idx0, v.shape), axis=-1)
        g1 = np.take_along_axis(v, np.broadcast_to(idx1, v.shape), axis=-1)
        return (1.0 - frac) * g0 + frac * g1

    return shift


def _bp_pass(
    e0b, e1b, fwd, bwd, cos_t, sin_t,
    post0, post1, th, block_logev, blk_belief, dtype,
):
    # th is None when the caller does not need phase estimates; the
    # circular-mean extraction is a sizable share of the pass otherwise
    """Forward/backward pass over one chunk of folded blocks.

    e0b (M, L, K), e1b (M, L); outputs are written into the provided
    views: per-symbol posterior masses post0/post1 (L, M), circular-mean
    phase th (L, M), per-drift block evidence block_logev (M, D), and
    optionally normalized log-beliefs blk_belief (L, M, D, 2, K).

    Messages are kept in the linear domain with per-step normalization;
    the accumulated log-scales accF/accG recombine the drift hypotheses
    with their correct relative weights.  Messages start out
    drift-independent with a singleton drift axis; the first shift
    broadcasts them to the full (M, D, K).
    """
    M, L, K = e0b.shape
    D = block_logev.shape[1]
    bsum = e0b + e1b[..., None]

    # forward pass, stored per symbol
    F = [None] * L
    accF = [None] * L
    f = np.full((M, 1, K), 1.0 / K, dtype=dtype)
    acc = np.zeros((M, 1))
    F[0], accF[0] = f, acc
    for i in range(1, L):
        f = fwd(f * bsum[:, i - 1, None, :])
        norm = f.sum(axis=-1)
        f = f / norm[..., None]
        acc = acc + np.log(norm)
        F[i], accF[i] = f, acc

    # backward pass fused with posterior extraction
    g = np.ones((M, 1, K), dtype=dtype)
    accG = np.zeros((M, 1))
    for i in range(L - 1, -1, -1):
        fg = np.broadcast_to(F[i] * g, (M, D, K))
        m0 = e0b[:, i, None, :] * fg
        z0 = m0.sum(axis=-1)  # (M, D)
        z1 = e1b[:, i, None] * fg.sum(axis=-1)
        logw = np.broadcast_to(accF[i] + accG, (M, D))
        w = np.exp(logw - logw.max(axis=1, keepdims=True))  # (M, D)
        post0[i] = (w * z0).sum(axis=1)
        post1[i] = (w * z1).sum(axis=1)
        if th is not None:
            # per-drift circular mean of the theta marginal; marginalizing
            # over the drift would cancel the mirrored tracks (the
            # magnitude model cannot tell theta from -theta), so the
            # caller picks its MAP drift's track instead
            ms = m0 + e1b[:, i, None, None] * fg  # (M, D, K)
            th[i] = np.arctan2(ms @ sin_t, ms @ cos_t)
        if i == 0:
            block_logev[...] = np.log(z0 + z1) + logw
        if blk_belief is not None:
            tot = (w * (z0 + z1)).sum(axis=1)
            bel = np.stack([m0, e1b[:, i, None, None] * fg], axis=2)
            blk_belief[i] = np.log(
                bel * (w[:, :, None, None] / tot[:, None, None, None])
            )
        if i > 0:
            g = bwd(g * bsum[:, i, None, :])
            norm = g.sum(axis=-1)
            g = g / norm[..., None]
            accG = accG + np.log(norm)


def bpd_decide(
    mags,
    gains,
    n0,
    grid: PhaseGrid,
    block_len: int = 16,
    want_posterior: bool = False,
    want_theta: bool = True,
    dtype=np.float64,
):
    """Blockwise BP over the (s, theta) chain, per drift hypothesis.

    mags: (B, N, 2).  Returns (bits (B, N), theta_hat (B, N),
    drift_hat (B,)) and, when requested, a list of per-packet
    PosteriorGrid objects.

    Per block and drift: upward messages are the per-symbol likelihoods on
    the theta grid; the forward and backward passes propagate beliefs
    through the deterministic phase-increment constraint (a sub-bin
    circular shift); the chain is a tree, so one pass is exact.  Drift
    hypotheses are combined by their per-block evidence under the uniform
    drift prior.  Blocks are independent, so they fold into the batch
    axis and the Python-level loop runs over the block length only.
    """
    B, N, _ = mags.shape
    K, D = grid.n_theta, grid.n_drift
    L = block_len
    thetas = grid.thetas

    ll0, ll1 = _upward_log_messages(mags, gains, n0, thetas)
    c = np.maximum(ll0.max(axis=-1), ll1)  # (B, N) per-symbol scaling
    if not np.all(np.isfinite(c)):
        raise ValueError("degenerate (all -inf) beliefs: impossible observations")
    e0 = np.exp((ll0 - c[..., None]).astype(dtype))  # (B, N, K)
    e1 = np.exp((ll1 - c).astype(dtype))  # (B, N)

    starts = _block_starts(N, L)
    nb = len(starts)
    idx = np.array([s for s, _ in starts])[:, None] + np.arange(L)  # (nb, L)
    owned = np.arange(L) >= (L - np.array([nd for _, nd in starts]))[:, None]
    cols = idx[owned]  # owned symbol index per (block, in-block slot)

    M = B * nb
    e0b = e0[:, idx].reshape(M, L, K)
    e1b = e1[:, idx].reshape(M, L)

    fwd = _shift_op(grid, +1, dtype)
    bwd = _shift_op(grid, -1, dtype)
    cos_t = np.cos(thetas).astype(dtype)
    sin_t = np.sin(thetas).astype(dtype)

    post0 = np.empty((L, M))
    post1 = np.empty((L, M))
    th = np.empty((L, M, D)) if want_theta else None
    block_logev = np.empty((M, D))
    if want_posterior:
        blk_belief = np.empty((L, M, D, 2, K))

    # chunk the folded axis so the per-step (chunk, D, K) messages stay
    # cache-resident; the passes are memory bound
    chunk = max(1, (4 << 20) // (D * K * np.dtype(dtype).itemsize))
    for lo in range(0, M, chunk):
        _bp_pass(
            e0b[lo : lo + chunk],
            e1b[lo : lo + chunk],
            fwd,
            bwd,
            cos_t,
            sin_t,
            post0[:, lo : lo + chunk],
            post1[:, lo : lo + chunk],
            th[:, lo : lo + chunk] if want_theta else None,
            block_logev[lo : lo + chunk],
            blk_belief[:, lo : lo + chunk] if want_posterior else None,
            dtype,
        )
    tot = post0 + post1
    if not np.all(np.isfinite(tot)) or np.any(tot <= 0.0):
        raise ValueError("degenerate beliefs in BP block")

    # unfold blocks; each owned slot maps to a unique symbol column
    bits_blk = np.swapaxes(post1 > post0, 0, 1).reshape(B, nb, L)
    bits = np.zeros((B, N), dtype=np.uint8)
    bits[:, cols] = bits_blk[:, owned]
    theta_hat = np.zeros((B, N))

    block_logev = block_logev.reshape(B, nb, D)
    total_ev = block_logev.sum(axis=1)  # (B, D)
    drift_idx = np.argmax(total_ev, axis=1)  # (B,)
    drift_hat = grid.drifts[drift_idx]

    if want_theta:
        # advanced indexing puts the packet axis first: (B, L, nb)
        th_sel = th.reshape(L, B, nb, D)[:, np.arange(B), :, drift_idx]
        th_blk = np.mod(th_sel.transpose(0, 2, 1), TWO_PI)
        theta_hat[:, cols] = th_blk[:, owned]

    if want_posterior:
        bel = blk_belief.transpose(1, 0, 2, 3, 4).reshape(B, nb, L, D, 2, K)
        grids = []
        for b in range(B):
            log_belief = np.empty((N, D, 2, K))
            log_belief[cols] = bel[b][owned]
            grids.append(
                PosteriorGrid(log_belief=log_belief, log_evidence=block_logev[b])
            )
        return bits, theta_hat, drift_hat, grids
    return bits, theta_hat, drift_hat


def bpd_detect(
    packet: Packet,
    gains: Tuple[float, float],
    config: SystemConfig,
    grid: Optional[PhaseGrid] = None,
    block_len: int = 16,
    want_posterior: bool = False,
):
    """Packet-level BPD.  Returns a Decision, or (Decision, PosteriorGrid)."""
    grid = grid or PhaseGrid()
    out = bpd_decide(
        packet.mags[None], gains, config.n0, grid, block_len,
        want_posterior=want_posterior,
    )
    if want_posterior:
        bits, theta_hat, drift_hat, grids = out
        dec = Decision(bits[0], theta_hat[0], float(drift_hat[0]))
        return dec, grids[0]
    bits, theta_hat, drift_hat = out
    return Decision(bits[0], theta_hat[0], float(drift_hat[0]))


# ---------------------------------------------------------------------------
# K-means clustering detector


def _kmeans_1d_two(values: np.ndarray, max_iter: int = 1000):
    """Two-cluster 1-D k-means, initialized at (min, max) of the data.

    Ties in the assignment go to the low cluster.  An emptied cluster
    keeps its previous mean.  Returns (labels, means, n_iter, objectives).
    """
    v = np.asarray(values, dtype=float)
    means = np.array([v.min(), v.max()])
    labels = np.zeros(v.size, dtype=np.uint8)
    objectives = []
    for it in range(1, max_iter + 1):
        d0 = (v - means[0]) ** 2
        d1 = (v - means[1]) ** 2
        new_labels = (d1 < d0).astype(np.uint8)
        objectives.append(float(np.where(new_labels == 1, d1, d0).sum()))
        if it > 1 and np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        for ci in (0, 1):
            sel = labels == ci
            if sel.any():
                means[ci] = v[sel].mean()
    else:
        raise RuntimeError("k-means failed to converge within max_iter")
    return labels, means, it, objectives


def kd_detect(packet: Packet):
    """K-means rough detector on min(|r1|, |r2|) per symbol.

    Returns (Decision, (i0, i1)) where i0/i1 are index arrays of the
    XOR=0/XOR=1 clusters.  i1 may be empty (e.g. all-equal inputs); the
    caller decides how to proceed (the gain estimator applies a fallback).
    """
    if packet.n_symbols < 2:
        raise ValueError("kd_detect needs at least 2 symbols")
    rhat = packet.mags.min(axis=1)
    labels, _, _, _ = _kmeans_1d_two(rhat)
    i0 = np.flatnonzero(labels == 0)
    i1 = np.flatnonzero(labels == 1)
    return Decision(xor_bits=labels), (i0, i1)


def kd_decide(mags):
    """Batch KD: mags (B, N, 2) -> bits (B, N).  Python loop over packets;
    k-means itself converges in a handful of iterations."""
    B = mags.shape[0]
    bits = np.empty(mags.shape[:2], dtype=np.uint8)
    for b in range(B):
        labels, _, _, _ = _kmeans_1d_two(mags[b].min(axis=1))
        bits[b] = labels
    return bits
