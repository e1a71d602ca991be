from .halfint import HalfInteger, oper_weights
from .matrix import Matrix, RfMatrix, rf_matrix, span_equal
from .ode import series_solve_linear_ode
from .poly import Poly, format_poly
from .ratfunc import RF, RationalFunction, as_rf, format_rf, parse_rf
from .series import TruncatedSeries

__all__ = [
    "HalfInteger",
    "Matrix",
    "Poly",
    "RF",
    "RationalFunction",
    "RfMatrix",
    "TruncatedSeries",
    "as_rf",
    "format_poly",
    "format_rf",
    "oper_weights",
    "parse_rf",
    "rf_matrix",
    "series_solve_linear_ode",
    "span_equal",
]
