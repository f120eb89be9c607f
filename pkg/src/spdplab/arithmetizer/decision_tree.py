"""Seeded restrictions and the canonical decision tree of a CNF.

The canonical tree always queries the smallest-index unassigned variable of
the first clause (in input order) that is neither satisfied nor falsified.
A node is a 0-leaf as soon as some clause is falsified and a 1-leaf once
every clause is satisfied.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..errors import DomainError
from ..workloads import CnfFormula


class _Exceeds:
    """Marker returned when the canonical tree is deeper than the budget."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "EXCEEDS"

    def __bool__(self) -> bool:
        return False


EXCEEDS = _Exceeds()
Depth = Union[int, _Exceeds]


def _unit(seed: int, var: int, tag: str) -> float:
    h = hashlib.blake2b(f"{seed}:{var}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "big") / 2**64


@dataclass(frozen=True)
class Restriction:
    """Per-variable value in ``{0, 1}`` or ``None`` for a star."""

    values: Tuple[Optional[int], ...]
    star_rate: float
    seed: int

    @classmethod
    def from_seed(cls, n_vars: int, star_rate: float, seed: int) -> "Restriction":
        """Counter-mode hash of ``(seed, var)``: star below ``star_rate``, else a fair bit."""
        if not 0.0 <= star_rate <= 1.0:
            raise DomainError("star_rate must lie in [0, 1]")
        vals = []
        for v in range(n_vars):
            if _unit(seed, v, "star") < star_rate:
                vals.append(None)
            else:
                vals.append(1 if _unit(seed, v, "bit") < 0.5 else 0)
        return cls(tuple(vals), star_rate, seed)

    @classmethod
    def stars(cls, n_vars: int) -> "Restriction":
        return cls((None,) * n_vars, 1.0, -1)

    @property
    def n_vars(self) -> int:
        return len(self.values)

    def live(self) -> List[int]:
        return [i for i, v in enumerate(self.values) if v is None]

    def as_map(self) -> Dict[int, int]:
        return {i: v for i, v in enumerate(self.values) if v is not None}

    def encode(self) -> str:
        return "".join("*" if v is None else str(v) for v in self.values)


def restriction_family(n_vars: int, star_rate: float, n_seeds: int, first_seed: int = 0) -> List[Restriction]:
    return [Restriction.from_seed(n_vars, star_rate, s) for s in range(first_seed, first_seed + n_seeds)]


def _status(clause, assign: Dict[int, int]) -> Tuple[int, Optional[int]]:
    """(1 satisfied | 0 falsified | -1 open, first unassigned variable)."""
    free = None
    for v, pos in sorted(clause):
        val = assign.get(v)
        if val is None:
            if free is None:
                free = v
        elif bool(val) == pos:
            return 1, None
    return (-1, free) if free is not None else (0, None)


def _depth(clauses, assign: Dict[int, int], budget: int) -> Optional[int]:
    query = None
    for c in clauses:
        st, free = _status(c, assign)
        if st == 0:
            return 0
        if st == -1 and query is None:
            query = free
    if query is None:
        return 0
    if budget == 0:
        return None
    best = 0
    for bit in (0, 1):
        assign[query] = bit
        d = _depth(clauses, assign, budget - 1)
        del assign[query]
        if d is None:
            return None
        best = max(best, d)
    return best + 1


def canonical_dt_depth(psi: CnfFormula, rho: Optional[Restriction] = None, d_max: int = 20) -> Depth:
    """Depth of the canonical tree of ``psi`` under ``rho``, or :data:`EXCEEDS` beyond ``d_max``."""
    if d_max < 0:
        raise DomainError("d_max must be non-negative")
    if rho is not None and rho.n_vars < psi.nvars:
        raise DomainError("restriction shorter than the formula's variable count")
    assign = dict(rho.as_map()) if rho is not None else {}
    d = _depth(psi.clauses, assign, d_max)
    return EXCEEDS if d is None else d


def select_good_restriction(family: Sequence[Restriction], formulas: Sequence[CnfFormula], d: int) -> Optional[Restriction]:
    """First restriction (lowest seed) under which every formula has canonical depth ``<= d``."""
    for rho in sorted(family, key=lambda r: r.seed):
        if all(canonical_dt_depth(psi, rho, d) is not EXCEEDS for psi in formulas):
            return rho
    return None
