"""
Higher-derivative Klein-Gordon toolkit
Dispersion roots, propagators, spectral solvers, energy-momentum tensors
and mode dynamics for the 2N-th order scalar field family
"""

__version__ = "1.0.0"
__author__ = "HDKG Team"
__description__ = "Numerical toolkit for higher-derivative Klein-Gordon field equations"
