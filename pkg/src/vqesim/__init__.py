"""State-vector VQE simulator: ansatz training dynamics, invariant-subspace
profiling, and over-parameterization threshold experiments."""

__version__ = "0.1.0"
