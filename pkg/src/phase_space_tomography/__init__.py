"""Phase-space tomography: forward distributions and density-matrix reconstruction."""

__version__ = "0.1.0"
