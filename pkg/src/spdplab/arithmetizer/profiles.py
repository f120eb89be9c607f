"""Interface profile counting."""

from __future__ import annotations

from math import comb

from ..errors import DomainError


def profile_count(R: int, m_types: int) -> int:
    """Number of type histograms of ``R`` interface slots over ``m_types`` types, ``C(R + m, m)``.

    This counts histograms with total at most ``R``, matching the
    stars-and-bars count with one slack type.
    """
    if R < 0 or m_types < 0:
        raise DomainError("R and m_types must be non-negative")
    return comb(R + m_types, m_types)


def histograms(R: int, m_types: int):
    """All ``m_types``-tuples of non-negative counts with sum at most ``R``."""
    if m_types == 0:
        yield ()
        return
    for first in range(R + 1):
        for rest in histograms(R - first, m_types - 1):
            yield (first,) + rest
