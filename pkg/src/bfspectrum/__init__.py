"""Benjamin-Feir spectral analysis of small-amplitude Stokes waves."""

__version__ = "0.1.0"
