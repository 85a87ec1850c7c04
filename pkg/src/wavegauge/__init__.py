"""Generalized-wave-gauge evolution of a 2+1 Einstein-scalar system on a polar grid,
with the flat-space decay toolbox, run diagnostics and the circle b-solver.
"""
__version__ = "0.1.0"
