"""Achievable uplink rates of circular cellular models whose cell-sites reach a
central processor over finite-capacity backhaul links."""

from .params import (
    Channel,
    Model,
    ModelError,
    MonteCarloCfg,
    NumericError,
    Protocol,
    StructureError,
    SystemParams,
    UnsupportedCase,
    ValidationError,
    power_fraction,
)
from .rate_functions import RateFunctional, functional_for, unlimited_rate
from .oblivious import RateResult, RegionResult, oblivious_rate, solve_fixed_point
from .local_decoding import DecodingSplit, DecodeStrategy, rate_dec_timeshare, rate_sd
from .asymptotics import LowSnrChar, cutset_bound, lowsnr_dec, lowsnr_oblivious, lowsnr_unlimited

__version__ = "0.1.0"

__all__ = [
    "Channel", "Model", "ModelError", "MonteCarloCfg", "NumericError", "Protocol",
    "StructureError", "SystemParams", "UnsupportedCase", "ValidationError", "power_fraction",
    "RateFunctional", "functional_for", "unlimited_rate",
    "RateResult", "RegionResult", "oblivious_rate", "solve_fixed_point",
    "DecodingSplit", "DecodeStrategy", "rate_dec_timeshare", "rate_sd",
    "LowSnrChar", "cutset_bound", "lowsnr_dec", "lowsnr_oblivious", "lowsnr_unlimited",
]
