"""Numerical laboratory for Dirichlet Laplacians in twisted three-dimensional tubes.

Hardy constants, the self-similar threshold curve and heat-flow decay rates,
computed by finite differences on the straightened tube.
"""
from .geometry import CrossSection, TubeSpec, TwistProfile

__version__ = "0.1.0"

__all__ = ["CrossSection", "TubeSpec", "TwistProfile", "__version__"]
