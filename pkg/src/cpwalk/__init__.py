"""Circle packings, their induced random walks, and the associated discrete harmonic theory."""

__version__ = "0.1.0"
