"""Hamiltonian-noise benchmarking for quantum annealers.

Thin wrapper over the C++ core: noise synthesis, simulated sampling,
correlation and spectral estimation, alpha calibration and the global
1/f + white model fit.
"""

from ._hnoise import *  # noqa: F401,F403
from ._hnoise import __doc__  # noqa: F401

__version__ = "0.1.0"
