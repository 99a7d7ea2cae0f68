"""Energy-efficiency optimization of mmWave gNBs and network-controlled
repeaters (NCRs): link budget, power model, exhaustive EE search, link-level
studies and a small system-level simulator.
"""

__version__ = "0.1.0"

from .linkbudget import (
    GnbConfig,
    LinkGeometry,
    NcrConfig,
    NoiseModel,
    UeConfig,
    effective_snr,
    ncr_pa_output,
    snr_access,
    snr_backhaul,
    snr_direct,
)
from .optimizer import ParameterGrid, optimize_direct, optimize_indirect
from .powermodel import PaEfficiencyModel, PowerConstants, gnb_power, ncr_power

__all__ = [
    "GnbConfig", "LinkGeometry", "NcrConfig", "NoiseModel", "UeConfig",
    "effective_snr", "ncr_pa_output", "snr_access", "snr_backhaul", "snr_direct",
    "ParameterGrid", "optimize_direct", "optimize_indirect",
    "PaEfficiencyModel", "PowerConstants", "gnb_power", "ncr_power",
]
