"""Piggybacking erasure codes over GF(2^8).

Modules:

- ``gf``: field arithmetic and linear solving
- ``mds``: systematic Cauchy base code
- ``framework``: stripe arrays with linear piggybacks and generic decoding
- ``rsr2``: the RSR-II piggyback code and its three-step repair
- ``genpb``: the generalized (s protected, p piggybacked) code
- ``analysis``: closed-form repair ratios, bounds and optimizers
- ``simnode``: a simulated cluster with exact download accounting
"""

from .errors import (
    ConfigError,
    DecodeError,
    InconsistentSymbolsError,
    InsufficientSymbolsError,
    SingularMatrixError,
    StoreError,
    UnrecoverableError,
)
from .framework import RepairReport, StripeArray, decode_full
from .genpb import build_assignment, encode_gen, make_params, repair_systematic_gen
from .mds import make_code
from .rsr2 import build_rsr2, encode_rsr2, repair_systematic_rsr2
from .simnode import Cluster

__version__ = "0.1.0"
