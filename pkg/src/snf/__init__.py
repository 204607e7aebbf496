"""Boolean functions on S_n that are close to U_1.

Coefficient matrices, strong-line detection, dictatorship recovery and
edge-isoperimetry on the transposition Cayley graph.
"""
__version__ = "0.1.0"
