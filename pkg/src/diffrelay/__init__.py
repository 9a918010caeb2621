"""Differential dual-hop amplify-and-forward relaying toolkit.

Simulates the two-hop link over time-varying Rayleigh fading, detects with
two-symbol differential, genie-coherent and multiple-symbol sphere
detectors, and evaluates the matching closed-form BER expressions.
"""

__version__ = "0.1.0"

from .analysis import (
    ModulationAnalysisParams,
    PepConfig,
    cdd_ber,
    cdd_error_floor,
    msd_ber,
    msd_pep,
    optimize_power,
)
from .fading import ChannelParams, FadingProcess, autocorr, cascaded_alpha, gen_ar1, gen_jakes
from .harness import BerPoint, Scenario, StoppingRule, error_floor_sweep, run_ber
from .link import Frame, LinkConfig, amp_factor, transmit
from .modem import Constellation, diff_decode, diff_encode, map_bits
from .detectors import MsdWindow, cdd_detect, coherent_detect, msd_build, msd_detect_stream, msd_sphere

__all__ = [
    "BerPoint", "ChannelParams", "Constellation", "FadingProcess", "Frame",
    "LinkConfig", "ModulationAnalysisParams", "MsdWindow", "PepConfig",
    "Scenario", "StoppingRule", "amp_factor", "autocorr", "cascaded_alpha",
    "cdd_ber", "cdd_detect", "cdd_error_floor", "coherent_detect",
    "diff_decode", "diff_encode", "error_floor_sweep", "gen_ar1", "gen_jakes",
    "map_bits", "msd_ber", "msd_build", "msd_detect_stream", "msd_pep",
    "msd_sphere", "optimize_power", "run_ber", "transmit",
]
