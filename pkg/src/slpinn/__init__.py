"""Width-scaling experiments for single-hidden-layer PINNs."""

__version__ = "0.1.0"
