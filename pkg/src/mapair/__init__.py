"""Exact exterior algebra and Monge-Ampere systems with Lagrangian pairs."""

from __future__ import annotations

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
