"""Rank-4 rational hypergeometric local systems with Hodge numbers (1,1,1,1).

Classification, gamma-vector calculus, toric models down to threefolds,
finite hypergeometric sums and conifold Euler factors.
"""

from .classify import CaseRecord, classify_all, emit_tables
from .conifold import quad_invariants
from .finite import ap_series, euler_factor_conifold, frobenius_trace, hgm_sum
from .gamma import GammaVector, gamma_from_params, m0, params_from_gamma, parse_gamma, reduce, total_twist_gamma
from .hodge import hodge_vector
from .params import HGParams

__version__ = "0.1.0"

__all__ = [
    "CaseRecord",
    "GammaVector",
    "HGParams",
    "ap_series",
    "classify_all",
    "emit_tables",
    "euler_factor_conifold",
    "frobenius_trace",
    "gamma_from_params",
    "hgm_sum",
    "hodge_vector",
    "m0",
    "params_from_gamma",
    "parse_gamma",
    "quad_invariants",
    "reduce",
    "total_twist_gamma",
]
