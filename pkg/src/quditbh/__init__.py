"""Qudit operator Fourier analysis: Gell-Mann and Heisenberg-Weyl frames,
coefficient-norm ratio harness, and a low-degree observable learning
simulator."""

__version__ = "0.1.0"

from quditbh.kernels import BACKEND, COMPILED

__all__ = ["BACKEND", "COMPILED", "__version__"]
