"""Unified multicarrier waveform simulation and benchmarking toolbox.

Builds eleven multicarrier schemes as explicit operator bundles over a
common frame geometry, propagates them through dispersive channel models,
and measures link and sensing figures of merit (error rates, peak power
statistics, ambiguity functions, overhead ratios) with a deterministic,
config-driven benchmark CLI.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelConfig,
    ChannelRealization,
    Path,
    PathSet,
    apply_channel,
    channel_matrix_full,
    channel_preset,
    discretize,
    draw_jakes_dopplers,
    sparsity_metrics,
)
from .detection import Constellation, demap_hard, map_bits, mmse_equalize, qam_constellation
from .kpi import BerPoint, ambiguity_grid, af_cut_metrics, papr, pilot_overhead, run_ber
from .waveforms import (
    FrameGeometry,
    WaveformBundle,
    build_waveform,
    effective_channel,
)

__all__ = [
    "__version__",
    "ChannelConfig",
    "ChannelRealization",
    "Path",
    "PathSet",
    "apply_channel",
    "channel_matrix_full",
    "channel_preset",
    "discretize",
    "draw_jakes_dopplers",
    "sparsity_metrics",
    "Constellation",
    "demap_hard",
    "map_bits",
    "mmse_equalize",
    "qam_constellation",
    "BerPoint",
    "ambiguity_grid",
    "af_cut_metrics",
    "papr",
    "pilot_overhead",
    "run_ber",
    "FrameGeometry",
    "WaveformBundle",
    "build_waveform",
    "effective_channel",
]
