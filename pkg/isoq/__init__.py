"""
isoq

Numerical laboratory for isotropic states in Berezin-Toeplitz quantization:
flat Bargmann model, upper half-plane and the modular quotient.
"""

__version__ = "0.1.0"
