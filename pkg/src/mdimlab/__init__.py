"""Numerical estimation of metric mean dimension, Katok entropy, rate-distortion and pressure
for shifts over Z^d with finite metric alphabets."""

__version__ = "0.1.0"
