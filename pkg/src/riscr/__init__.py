"""Hybrid beamforming and RIS phase design for an underlay mmWave cognitive radio downlink."""
from .config import ScenarioConfig, load_config
from .harness import Scheme, run_sweep, emit_csv

__all__ = ["ScenarioConfig", "load_config", "Scheme", "run_sweep", "emit_csv"]
__version__ = "0.1.0"
