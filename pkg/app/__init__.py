"""qmask - quantum information masking toolkit."""

__version__ = "1.0.0"
