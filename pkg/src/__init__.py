"""spdc-fiber: pulsed, fiber-coupled SPDC photon-pair source modelling."""

__version__ = "0.3.0"

from .config import Config, SetupConfig, get_config
from .epmf import Method
from .errors import SpdcError
from .report_generator import ReportGenerator

__all__ = [
    "Config",
    "SetupConfig",
    "get_config",
    "Method",
    "SpdcError",
    "ReportGenerator",
]
