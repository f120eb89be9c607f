"""Exact-algebra toolkit for shifted-partial-derivative rank experiments."""

from .ffpoly import DEFAULT_PRIME, BlockPartition, FieldCtx, Monomial, SparsePoly
from .spdp import SpdpMatrix, SpdpParams, build_matrix, gamma, rank

__all__ = [
    "DEFAULT_PRIME",
    "BlockPartition",
    "FieldCtx",
    "Monomial",
    "SparsePoly",
    "SpdpMatrix",
    "SpdpParams",
    "build_matrix",
    "gamma",
    "rank",
]
__version__ = "0.1.0"
