"""Noncoherent binary-FSK physical-layer network coding toolkit.

Simulation of the two-user relay uplink at the magnitude-observation
level, XOR-symbol detectors (genie benchmark, phase-marginalizing,
blockwise belief propagation, K-means clustering), preamble-free channel
gain estimation, and a Monte Carlo BER harness with CSV output.
"""

from .detectors import (
    Decision,
    PhaseGrid,
    PosteriorGrid,
    bpd_detect,
    genie_detect,
    kd_detect,
    mpd_detect,
)
from .estimator import (
    EstimatorParams,
    GainEstimate,
    estimate_gains,
    kd_bpd,
    kd_mpd,
)
from .harness import (
    BerRecord,
    ExperimentSpec,
    read_csv,
    run_ber_point,
    run_sweep,
    snr_for_target_ber,
    write_csv,
)
from .likelihood import (
    LikelihoodContext,
    log_lik,
    log_lik_s0,
    log_lik_s1,
    superposed_amplitude,
)
from .model import (
    ChannelState,
    Packet,
    SourcePair,
    SystemConfig,
    random_source_pair,
    relative_phase,
    snr_db_to_n0,
    synthesize_packet,
)

__all__ = [
    "BerRecord",
    "ChannelState",
    "Decision",
    "EstimatorParams",
    "ExperimentSpec",
    "GainEstimate",
    "LikelihoodContext",
    "Packet",
    "PhaseGrid",
    "PosteriorGrid",
    "SourcePair",
    "SystemConfig",
    "bpd_detect",
    "estimate_gains",
    "genie_detect",
    "kd_bpd",
    "kd_detect",
    "kd_mpd",
    "log_lik",
    "log_lik_s0",
    "log_lik_s1",
    "mpd_detect",
    "random_source_pair",
    "read_csv",
    "relative_phase",
    "run_ber_point",
    "run_sweep",
    "snr_db_to_n0",
    "snr_for_target_ber",
    "superposed_amplitude",
    "synthesize_packet",
    "write_csv",
]

__version__ = "0.1.0"
