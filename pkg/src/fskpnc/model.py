"""Symbol-level observation model for noncoherent binary FSK network coding.

Two users transmit simultaneously to a relay; the relay sees, per symbol,
only the magnitude pair on the two FSK frequencies.  When the users send
the same bit their tones superimpose and the magnitude depends on the
relative carrier phase, which drifts linearly across the packet at a rate
set by the carrier frequency offset (CFO).  Observations are drawn
directly at the symbol level; the waveform chain (filters, envelope
detection) is abstracted away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

TWO_PI = 2.0 * np.pi


def snr_db_to_n0(snr_db: float) -> float:
    """Noise spectral density for unit per-user symbol energy."""
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Static link parameters shared by simulator and detectors."""

    n_symbols: int = 128
    symbol_duration_s: float = 1e-6
    snr_db: float = 10.0
    cfo_bound_hz: float = 10_000.0

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if not self.symbol_duration_s > 0.0:
            raise ValueError("symbol_duration_s must be positive")
        if not self.n0 > 0.0:
            raise ValueError("n0 must be positive (snr_db too large?)")
        if self.cfo_bound_hz * self.symbol_duration_s > 0.01 + 1e-12:
            raise ValueError(
                "cfo_bound_hz * symbol_duration_s must be <= 0.01 "
                "(drift per symbol within [-0.02*pi, 0.02*pi])"
            )

    @property
    def n0(self) -> float:
        return snr_db_to_n0(self.snr_db)

    @property
    def drift_bound_rad(self) -> float:
        """Max per-symbol relative-phase drift, 2*pi*cfo_bound*T."""
        return TWO_PI * self.cfo_bound_hz * self.symbol_duration_s


@dataclass(frozen=True)
class ChannelState:
    """Channel gains plus the phase-track pair (initial phase, CFO)."""

    gain_a: float
    gain_b: float
    initial_phase_rad: float = 0.0
    cfo_hz: float = 0.0

    def __post_init__(self):
        for name in ("gain_a", "gain_b"):
            g = getattr(self, name)
            if not (g >= 0.0 and np.isfinite(g)):
                raise ValueError(f"{name} must be nonnegative and finite")
        object.__setattr__(
            self, "initial_phase_rad", float(np.mod(self.initial_phase_rad, TWO_PI))
        )


@dataclass(frozen=True)
class SourcePair:
    """The two users' bit sequences; the XOR sequence is always derived."""

    bits_a: np.ndarray
    bits_b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits_a, dtype=np.uint8)
        b = np.asarray(self.bits_b, dtype=np.uint8)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("bits_a and bits_b must be 1-D of equal length")
        if np.any(a > 1) or np.any(b > 1):
            raise ValueError("bits must be 0/1")
        object.__setattr__(self, "bits_a", a)
        object.__setattr__(self, "bits_b", b)

    @property
    def xor_bits(self) -> np.ndarray:
        return np.bitwise_xor(self.bits_a, self.bits_b)

    def __len__(self):
        return self.bits_a.size


class Observation(NamedTuple):
    """Magnitude pair on the two FSK frequencies for one symbol."""

    mag1: float
    mag2: float


@dataclass(frozen=True)
class Packet:
    """One packet of magnitude observations, optionally with ground truth.

    `mags` has shape (N, 2); truth (source bits + channel) is retained for
    genie detectors and for scoring decisions against the XOR sequence.
    """

    mags: np.ndarray
    truth: Optional[Tuple[SourcePair, ChannelState]] = None

    def __post_init__(self):
        m = np.asarray(self.mags, dtype=float)
        if m.ndim != 2 or m.shape[1] != 2:
            raise ValueError("mags must have shape (N, 2)")
        object.__setattr__(self, "mags", m)

    @property
    def n_symbols(self) -> int:
        return self.mags.shape[0]

    @property
    def observations(self):
        return [Observation(float(a), float(b)) for a, b in self.mags]


def random_source_pair(n_symbols: int, rng: np.random.Generator) -> SourcePair:
    bits = rng.integers(0, 2, size=(2, n_symbols), dtype=np.uint8)
    return SourcePair(bits[0], bits[1])


def relative_phase(n, channel: ChannelState, config: SystemConfig):
    """Relative phase at symbol n: 2*pi*cfo*n*T + initial phase, in [0, 2*pi).

    The continuous-phase FSK accumulation terms are omitted: they only ever
    contribute integer multiples of 2*pi.
    """
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n >= config.n_symbols):
        raise ValueError("symbol index out of range")
    theta = (
        TWO_PI * channel.cfo_hz * n * config.symbol_duration_s
        + channel.initial_phase_rad
    )
    return np.mod(theta, TWO_PI)


def _complex_noise(shape, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian, total variance n0 per sample."""
    scale = np.sqrt(n0 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_magnitudes(
    bits_a: np.ndarray,
    bits_b: np.ndarray,
    gain_a,
    gain_b,
    theta: np.ndarray,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw the magnitude pairs for arbitrary batch shapes.

    All bit/phase arrays share one shape S (e.g. (N,) or (B, N)); gains are
    scalars or broadcastable to S.  Returns magnitudes of shape S + (2,).
    """
    bits_a = np.asarray(bits_a)
    bits_b = np.asarray(bits_b)
    theta = np.asarray(theta, dtype=float)
    ga = np.broadcast_to(np.asarray(gain_a, dtype=float), theta.shape)
    gb = np.broadcast_to(np.asarray(gain_b, dtype=float), theta.shape)

    ea = ga * np.exp(-0.5j * theta)  # user A's tone
    eb = gb * np.exp(0.5j * theta)  # user B's tone
    w1 = _complex_noise(theta.shape, n0, rng)
    w2 = _complex_noise(theta.shape, n0, rng)

    both0 = (bits_a == 0) & (bits_b == 0)
    both1 = (bits_a == 1) & (bits_b == 1)
    a0b1 = (bits_a == 0) & (bits_b == 1)
    a1b0 = (bits_a == 1) & (bits_b == 0)

    sup = ea + eb
    zero = np.zeros_like(sup)
    sig1 = np.select([both0, both1, a0b1, a1b0], [sup, zero, ea, eb])
    sig2 = np.select([both0, both1, a0b1, a1b0], [zero, sup, eb, ea])
    return np.stack([np.abs(sig1 + w1), np.abs(sig2 + w2)], axis=-1)


def synthesize_packet(
    source: SourcePair,
    channel: ChannelState,
    config: SystemConfig,
    rng: np.random.Generator,
) -> Packet:
    """Synthesize one packet of magnitude observations with truth attached."""
    if len(source) != config.n_symbols:
        raise ValueError("source length must equal config.n_symbols")
    n = np.arange(config.n_symbols)
    theta = relative_phase(n, channel, config)
    mags = synthesize_magnitudes(
        source.bits_a, source.bits_b, channel.gain_a, channel.gain_b,
        theta, config.n0, rng,
    )
    return Packet(mags=mags, truth=(source, channel))


def sample_mean_power_check(
    channel: ChannelState,
    config: SystemConfig,
    theta: float,
    n_samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of E[|r|^2] for the superposed (s=0) branch.

    The expectation is ga^2 + gb^2 + 2*ga*gb*cos(theta) + N0: the
    signal-noise cross terms have zero mean.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sup = channel.gain_a * np.exp(-0.5j * theta) + channel.gain_b * np.exp(
        0.5j * theta
    )
    w = _complex_noise((n_samples,), config.n0, rng)
    return float(np.mean(np.abs(sup + w) ** 2))
