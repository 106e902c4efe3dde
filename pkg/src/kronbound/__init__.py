"""Rank-expansion lower bounds for Kronecker-product bilinear algorithms."""
from __future__ import annotations

__version__ = "0.1.0"
