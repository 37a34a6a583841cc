"""twistkit: exact symbolic verification of twisted symmetries of differential equations."""

__version__ = "0.1.0"
