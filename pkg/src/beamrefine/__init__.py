"""OFDM beam refinement and user state acquisition for a hybrid mmWave base station."""

__version__ = "0.1.0"
