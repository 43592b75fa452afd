"""Rayleigh-Schroedinger perturbation series with perturbation-adapted zero-order operators."""
from ._backend import backend_name
from .errors import PaptError
from .rspt import Partitioning, SeriesResult, deviation_report, run_series

__all__ = ["Partitioning", "SeriesResult", "run_series", "deviation_report", "PaptError", "backend_name"]
__version__ = "0.1.0"
