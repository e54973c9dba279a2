"""Zero-shot requirements classification harness."""

__version__ = "0.1.0"
