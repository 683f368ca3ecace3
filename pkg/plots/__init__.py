"""Figure generation from BER-sweep CSVs.

Standalone by design: the only coupling to the simulator is the CSV
schema, so this package never imports it.
"""

from .figures import (
    CSV_COLUMNS,
    FigureSpec,
    load_rows,
    plot_ber,
    plot_snr_vs_phase,
    required_snr,
    wilson_interval,
)

__all__ = [
    "CSV_COLUMNS",
    "FigureSpec",
    "load_rows",
    "plot_ber",
    "plot_snr_vs_phase",
    "required_snr",
    "wilson_interval",
]
