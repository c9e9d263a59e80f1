"""Non-Hermitian SSH chains and their skin-effect-free partner models."""

from __future__ import annotations

__version__ = "0.1.0"
