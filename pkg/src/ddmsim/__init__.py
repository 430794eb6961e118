"""Link-level simulator for DDM MIMO-OFDM joint radar and communication."""
from .params import DESK, TABLE2, ConfigError, DerivedParams, WaveformConfig, derive_params

__all__ = ["DESK", "TABLE2", "ConfigError", "DerivedParams", "WaveformConfig", "derive_params"]
__version__ = "0.1.0"
