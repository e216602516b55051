"""Numerical laboratory for entropy inequalities on Kac's sphere."""
from .density1d import Density1D, bump, gaussian, uniform
from .harness import InequalityReport, verify_chain
from .sphere import SphereDensity

__all__ = ["Density1D", "InequalityReport", "SphereDensity", "bump", "gaussian", "uniform",
           "verify_chain"]
__version__ = "0.1.0"
