"""Numerical kernel for Colombeau generalized numbers, functions and
manifolds: sharp-topology valuation arithmetic, hypersequence convergence
certificates, a generalized Picard solver for impulsive ODEs, and
membrane / chart checks."""

from .bands import Idempotent, density
from .domain import DomainSpec
from .errors import ColombeauError
from .estimate import V_NEGLIGIBLE, V_MAX
from .gnum import (Classification, GeneralizedNumber, Interleaving, Order,
                   Sampled, Symbolic, ball_contains, classify, compare,
                   interleave, invert, sharp_dist)
from .grid import EpsilonGrid, default_grid
from .hyper import Hypernatural, Hypersequence, alpha_pow, hseq_limit, \
    series_converges
from .matrices import GMatrix, det_unit
from .smooth import Mollifier, TestFunction, default_probe_suite

__all__ = [
    "Classification", "ColombeauError", "DomainSpec", "EpsilonGrid",
    "GMatrix", "GeneralizedNumber", "Hypernatural", "Hypersequence",
    "Idempotent", "Interleaving", "Mollifier", "Order", "Sampled",
    "Symbolic", "TestFunction", "V_MAX", "V_NEGLIGIBLE", "alpha_pow",
    "ball_contains", "classify", "compare", "default_grid",
    "default_probe_suite", "density", "det_unit", "hseq_limit",
    "interleave", "invert", "series_converges", "sharp_dist",
]

__version__ = "0.1.0"
