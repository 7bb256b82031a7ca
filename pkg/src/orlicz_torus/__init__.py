"""Numerical laboratory for Orlicz-Schatten ideals on truncated quantum tori."""

from .errors import OrliczTorusError
from .qtorus import LatticeGrid, MatrixRep, ThetaMatrix, TorusElement, matrix_rep
from .verdict import Verdict
from .young import Interpolated, Power, PowerLog, interpolate, luxemburg_norm, parse_young

__version__ = "0.1.0"

__all__ = [
    "Interpolated",
    "LatticeGrid",
    "MatrixRep",
    "OrliczTorusError",
    "Power",
    "PowerLog",
    "ThetaMatrix",
    "TorusElement",
    "Verdict",
    "interpolate",
    "luxemburg_norm",
    "matrix_rep",
    "parse_young",
]
