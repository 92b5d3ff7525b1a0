"""Finite-blocklength amplitude shaping toolkit.

Four invertible amplitude shapers for the probabilistic-amplitude-shaping
transmit chain (constant-composition and multiset-partition distribution
matching, enumerative sphere shaping, shell mapping), their exact rate-loss
and complexity analytics, and an AWGN/LDPC link simulator.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    AmplitudeAlphabet,
    BitWord,
    Composition,
    MBDistribution,
    avg_energy,
    entropy,
    mb_from_entropy,
    multinomial,
    optimize_mb,
    quantize_pmf,
)
from .errors import (  # noqa: F401
    CompositionMismatch,
    ConfigError,
    DeshapeFailure,
    EnergyOverflow,
    RankOverflow,
    ShapingError,
    UnachievableRate,
    UnknownComposition,
)
from .labeling import BrgcLabeling  # noqa: F401
