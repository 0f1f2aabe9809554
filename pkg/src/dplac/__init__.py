"""Diffusion-prior Lyapunov actor-critic for underwater data-collection missions."""

__version__ = "0.1.0"

from .kernels import BACKEND_NAME

__all__ = ["BACKEND_NAME", "__version__"]
