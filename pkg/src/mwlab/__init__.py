"""Matrix-weighted dyadic harmonic analysis on exact finite dyadic models."""
__version__ = "0.1.0"
