"""Cooperative D2D-NOMA over Rayleigh fading: SNR models, Monte Carlo
estimators and closed-form rate / outage evaluators."""

from .model import (ChannelRealization, OutageSpec, Scheme, SnrBreakdown,
                    SystemParams, db_to_linear, snr_breakdown, snr_relay, sum_rate)
from .channel import SeededStream, sample_block, sample_realization
from .montecarlo import (Estimate, McConfig, estimate_ergodic_sum_rate,
                         estimate_outage, estimate_outage_capacity,
                         estimate_per_symbol_rates)
from .specialfn import EiResult, ei, euler_gamma

__version__ = "0.1.0"
