"""
Services package
Numerical core: dispersion roots, symbols and propagators, fields,
solvers, energy-momentum tensors and mode dynamics
"""
