"""Shifted-partial-derivative matrices and their exact rank.

A row of :class:`SpdpMatrix` is indexed by ``(S, u)``: ``S`` is the derivative
index tuple (a set, or a sorted multiset in ``derivatives="multi"`` mode) and
``u`` is a shift monomial.  The row holds the coefficients of ``u * d_S p`` in
the column basis, which is the sorted union of all monomials that occur.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import DomainError, InvarianceViolation, RowCapExceeded
from .ffpoly import (
    BlockMap,
    BlockPartition,
    Monomial,
    SparsePoly,
    block_affine,
    derive,
    derive_multi,
    monomial_key,
    monomials_up_to,
    project,
    restrict,
    shift,
)
from .linalg import rank_sparse_rows

PLAIN = "plain"
BOOLEAN = "boolean"
_AMBIENT_ALIASES = {
    "plain": PLAIN,
    "plain-ring": PLAIN,
    "boolean": BOOLEAN,
    "boolean-multilinear": BOOLEAN,
    "multilinear": BOOLEAN,
}

DEFAULT_ROW_CAP = 2_000_000

RowKey = Tuple[Tuple[int, ...], Monomial]


@dataclass(frozen=True)
class SpdpParams:
    """Parameters of one SPDP matrix.

    ``derivatives`` chooses between distinct-index sets and multi-indices;
    ``shift_degree`` between ``deg u <= ell`` and ``deg u == ell``;
    ``shift_support="derivative-set"`` keeps only square-free shifts whose
    support lies inside ``S``.  ``block_support_limit`` caps the number of
    blocks a derivative may touch (``None`` means ``kappa``).
    """

    kappa: int
    ell: int = 0
    cumulative: bool = False
    partition: Optional[BlockPartition] = None
    ambient: str = PLAIN
    derivatives: str = "set"
    shift_degree: str = "at_most"
    shift_support: str = "ambient"
    block_support_limit: Optional[int] = None
    row_cap: int = DEFAULT_ROW_CAP

    def __post_init__(self) -> None:
        if self.kappa < 0 or self.ell < 0:
            raise DomainError("kappa and ell must be non-negative")
        amb = _AMBIENT_ALIASES.get(self.ambient)
        if amb is None:
            raise DomainError(f"unknown ambient {self.ambient!r}")
        object.__setattr__(self, "ambient", amb)
        if self.derivatives not in ("set", "multi"):
            raise DomainError(f"derivatives must be 'set' or 'multi', got {self.derivatives!r}")
        if self.shift_degree not in ("at_most", "exact"):
            raise DomainError(f"shift_degree must be 'at_most' or 'exact', got {self.shift_degree!r}")
        if self.shift_support not in ("ambient", "derivative-set"):
            raise DomainError(f"unknown shift_support {self.shift_support!r}")
        if self.block_support_limit is not None and self.block_support_limit < 0:
            raise DomainError("block_support_limit must be non-negative")

    def replace(self, **changes) -> "SpdpParams":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return SpdpParams(**data)

    def describe(self) -> str:
        return (
            f"kappa={self.kappa} ell={self.ell} ambient={self.ambient} derivatives={self.derivatives} "
            f"shifts={self.shift_degree}/{self.shift_support} cumulative={self.cumulative}"
        )


@dataclass
class SpdpMatrix:
    """Sparse SPDP matrix with row metadata and a frozen column basis."""

    rows: List[RowKey]
    cols: List[Monomial]
    entries: List[Dict[int, int]]
    params: SpdpParams
    modulus: int
    _rank: Optional[int] = field(default=None, repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.cols))

    def is_empty(self) -> bool:
        return not self.cols

    def dense(self) -> List[List[int]]:
        out = []
        for r in self.entries:
            row = [0] * len(self.cols)
            for c, v in r.items():
                row[c] = v
            out.append(row)
        return out

    def row_index(self) -> Dict[RowKey, int]:
        return {key: i for i, key in enumerate(self.rows)}

    def col_index(self) -> Dict[Monomial, int]:
        return {m: j for j, m in enumerate(self.cols)}

    def entry(self, row: int, col: int) -> int:
        return self.entries[row].get(col, 0)

    def rank(self) -> int:
        if self._rank is None:
            self._rank = rank_sparse_rows(self.entries, len(self.cols), self.modulus)
        return self._rank

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["S", "u"] + [json.dumps(m.indices()) for m in self.cols])
        for (S, u), r in zip(self.rows, self.entries):
            row = [0] * len(self.cols)
            for c, v in r.items():
                row[c] = v
            w.writerow([json.dumps(list(S)), json.dumps(u.indices())] + row)
        return buf.getvalue()


def _boolean(params: SpdpParams) -> bool:
    return params.ambient == BOOLEAN


def _orders(params: SpdpParams, deg: int) -> List[int]:
    ks = range(params.kappa + 1) if params.cumulative else [params.kappa]
    # the degree guard is applied per derivative order
    return [k for k in ks if deg - k + params.ell >= 0]


def _derivative_sets(nvars: int, k: int, params: SpdpParams) -> Iterable[Tuple[int, ...]]:
    if params.derivatives == "multi":
        gen: Iterable[Tuple[int, ...]] = itertools.combinations_with_replacement(range(nvars), k)
    else:
        gen = itertools.combinations(range(nvars), k)
    part = params.partition
    if part is None:
        return gen
    limit = k if params.block_support_limit is None else params.block_support_limit
    owner = {i: j for j, b in enumerate(part.blocks) for i in b}
    return (S for S in gen if len({owner[i] for i in S}) <= limit)


def _shift_universe(nvars: int, params: SpdpParams) -> List[Monomial]:
    return monomials_up_to(nvars, params.ell, square_free=_boolean(params), exact=params.shift_degree == "exact")


def _shifts_for(S: Tuple[int, ...], universe: List[Monomial], params: SpdpParams) -> List[Monomial]:
    if params.shift_support == "ambient":
        return universe
    base = sorted(set(S))
    lo = params.ell if params.shift_degree == "exact" else 0
    return [Monomial.from_support(c) for d in range(lo, min(params.ell, len(base)) + 1) for c in itertools.combinations(base, d)]


def count_rows(nvars: int, params: SpdpParams, deg: Optional[int] = None) -> int:
    """Number of rows :func:`build_matrix` would generate (before the degree guard if ``deg`` is None)."""
    ks = _orders(params, deg) if deg is not None else (range(params.kappa + 1) if params.cumulative else [params.kappa])
    if params.ambient == BOOLEAN:
        nshift = sum(comb(nvars, d) for d in range(params.ell + 1)) if params.shift_degree == "at_most" else comb(nvars, params.ell)
    else:
        nshift = comb(nvars + params.ell, params.ell) if params.shift_degree == "at_most" else comb(nvars + params.ell - 1, params.ell)
    total = 0
    for k in ks:
        nS = comb(nvars + k - 1, k) if params.derivatives == "multi" else comb(nvars, k)
        if params.shift_support == "derivative-set":
            per = sum(comb(k, d) for d in range(min(params.ell, k) + 1))
            total += nS * per
        else:
            total += nS * nshift
    return total


def build_matrix(p: SparsePoly, params: SpdpParams) -> SpdpMatrix:
    """Materialize the SPDP matrix of ``p``."""
    if params.partition is not None and params.partition.nvars != p.nvars:
        raise DomainError(f"partition covers {params.partition.nvars} variables, polynomial has {p.nvars}")
    boolean = _boolean(params)
    q = p.multilinear() if boolean else p
    mod = p.ctx.modulus
    if q.is_zero():
        return SpdpMatrix([], [], [], params, mod)
    orders = _orders(params, q.degree())
    if not params.cumulative and params.kappa > p.nvars and params.derivatives == "set":
        orders = []
    would_be = count_rows(p.nvars, params, q.degree())
    if would_be > params.row_cap:
        raise RowCapExceeded(would_be, params.row_cap)
    universe = _shift_universe(p.nvars, params)
    keys: List[RowKey] = []
    polys: List[Dict[Monomial, int]] = []
    for k in orders:
        for S in _derivative_sets(p.nvars, k, params):
            d = derive_multi(q, S) if params.derivatives == "multi" else derive(q, S)
            for u in _shifts_for(S, universe, params):
                keys.append((tuple(S), u))
                polys.append(dict(shift(d, u, reduce=boolean).terms) if not d.is_zero() else {})
    colset = set()
    for t in polys:
        colset.update(t)
    cols = sorted(colset, key=monomial_key)
    cidx = {m: j for j, m in enumerate(cols)}
    entries = [{cidx[m]: c for m, c in t.items()} for t in polys]
    if not cols:
        # degree guard / identically zero rows: report an empty matrix
        return SpdpMatrix(keys, [], [dict() for _ in keys], params, mod) if keys else SpdpMatrix([], [], [], params, mod)
    return SpdpMatrix(keys, cols, entries, params, mod)


def rank(M: SpdpMatrix) -> int:
    """Exact rank of ``M`` over its field."""
    return M.rank()


def gamma(p: SparsePoly, params: Optional[SpdpParams] = None, **kwargs) -> int:
    """``rank(build_matrix(p, params))``; keyword arguments build the params."""
    if params is None:
        params = SpdpParams(**kwargs)
    elif kwargs:
        params = params.replace(**kwargs)
    return build_matrix(p, params).rank()


def submatrix_rank(M: SpdpMatrix, row_subset: Sequence[int], col_subset: Sequence[int]) -> int:
    """Rank of the submatrix on the given row and column positions."""
    nr, nc = M.shape
    for i in row_subset:
        if not 0 <= i < nr:
            raise DomainError(f"row index {i} outside [0, {nr})")
    for j in col_subset:
        if not 0 <= j < nc:
            raise DomainError(f"column index {j} outside [0, {nc})")
    cmap = {j: t for t, j in enumerate(col_subset)}
    rows = []
    for i in row_subset:
        r = M.entries[i]
        rows.append({cmap[j]: v for j, v in r.items() if j in cmap})
    return rank_sparse_rows(rows, len(col_subset), M.modulus)


def submatrix(M: SpdpMatrix, row_subset: Sequence[int], col_subset: Sequence[int]) -> List[List[int]]:
    """Dense extraction of a submatrix."""
    return [[M.entries[i].get(j, 0) for j in col_subset] for i in row_subset]


# ---------------------------------------------------------------------------
# Monotone pipeline


@dataclass(frozen=True)
class Restrict:
    """Fix variables to field values (``None`` keeps a variable free)."""

    rho: Mapping[int, Optional[int]]
    kind = "restrict"

    def apply(self, p: SparsePoly) -> SparsePoly:
        return restrict(p, self.rho)


@dataclass(frozen=True)
class Project:
    """Keep only monomials supported on ``keep``."""

    keep: Tuple[int, ...]
    kind = "project"

    def apply(self, p: SparsePoly) -> SparsePoly:
        return project(p, self.keep)


@dataclass(frozen=True)
class BlockAffine:
    """Block-local invertible affine substitution."""

    partition: BlockPartition
    maps: Tuple[Optional[BlockMap], ...]
    kind = "block_affine"

    def apply(self, p: SparsePoly) -> SparsePoly:
        return block_affine(p, self.partition, self.maps)


@dataclass(frozen=True)
class BlockBasis:
    """Relabel variables by a permutation that maps every block onto itself."""

    partition: BlockPartition
    perm: Tuple[int, ...]
    kind = "block_basis"

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(self.partition.nvars)):
            raise DomainError("block_basis perm must be a permutation of all variables")
        for b in self.partition.blocks:
            if sorted(self.perm[i] for i in b) != list(b):
                raise DomainError("block_basis perm must preserve every block")

    def apply(self, p: SparsePoly) -> SparsePoly:
        return p.rename(dict(enumerate(self.perm)))


Step = Union[Restrict, Project, BlockAffine, BlockBasis]


@dataclass
class PipelineReport:
    """Gamma after every stage; ``trace[0]`` is the input."""

    trace: List[int]
    steps: List[str]
    polys: List[SparsePoly]

    @property
    def final(self) -> int:
        return self.trace[-1]


def verify_monotone_pipeline(p: SparsePoly, steps: Sequence[Step], params: SpdpParams) -> PipelineReport:
    """Apply ``steps`` in order and check the rank contract at each one.

    Restriction and projection must not increase gamma; affine and basis
    steps must preserve it exactly.  A breach raises
    :class:`InvarianceViolation`.
    """
    for s in steps:
        if isinstance(s, BlockAffine) and (params.derivatives != "multi" or params.ambient != PLAIN or params.shift_degree != "at_most"):
            raise DomainError(
                "affine steps are rank-preserving only with multi-index derivatives, at-most shifts and the plain ambient"
            )
    current = p
    g = gamma(current, params)
    trace = [g]
    names: List[str] = []
    polys = [current]
    for idx, step in enumerate(steps):
        nxt = step.apply(current)
        g2 = gamma(nxt, params)
        if step.kind in ("restrict", "project"):
            if g2 > g:
                raise InvarianceViolation(idx, step, g, g2)
        elif g2 != g:
            raise InvarianceViolation(idx, step, g, g2)
        trace.append(g2)
        names.append(step.kind)
        polys.append(nxt)
        current, g = nxt, g2
    return PipelineReport(trace, names, polys)


def kappa_pad(V: SparsePoly, kappa: int) -> SparsePoly:
    """``y_1 * ... * y_kappa * V`` with ``kappa`` fresh variables appended after V's."""
    n = V.nvars
    Vw = V.with_nvars(n + kappa)
    Y = SparsePoly.monomial(Monomial.from_support(range(n, n + kappa)), n + kappa, V.ctx)
    return Y * Vw


def kappa_pad_bound(V: SparsePoly, kappa: int, params: SpdpParams) -> int:
    """Right-hand side ``sum_r C(kappa, r) * gamma_{r, ell}(V)`` of the padding inequality.

    The ranks of ``V`` are taken in the padded ring (shifts may use the fresh
    variables), which is the ring the padded rows live in.
    """
    Vw = V.with_nvars(V.nvars + kappa)
    total = 0
    for r in range(0, min(kappa, V.degree()) + 1):
        total += comb(kappa, r) * gamma(Vw, params.replace(kappa=r, partition=None, cumulative=False))
    return total
