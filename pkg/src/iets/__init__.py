"""MIMO identical-eigenmode transmission: GMD, SVD and V-BLAST transceivers
with a deterministic Monte Carlo BER engine."""
from .engine import BerCurve, BerPoint, ScenarioConfig, binomial_ci, run_scenario
from .gmd import GeometricMeanDecomposition, GmdResult, geometric_mean, gmd, two_by_two_step
from .linalg import SvdResult, condition_number, frobenius_norm, hermitian, matmul, svd
from .modem import QAM16, QPSK, Constellation, get_constellation, modulate, slice_symbol
from .transceiver import (
    GmdSicTransceiver,
    SchemeKind,
    SvdEigenmodeTransceiver,
    ZfVblastTransceiver,
    make_transceiver,
)

__version__ = "0.1.0"
