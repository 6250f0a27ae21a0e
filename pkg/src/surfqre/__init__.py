"""Surface-code emulation, decoding, fitting and resource estimation."""

__version__ = "0.1.0"
