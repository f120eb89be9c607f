"""Exact linear algebra modulo a prime.

Dense elimination runs in numpy ``int64`` whenever the modulus is below
``2**31`` (so a product of two residues fits), otherwise a pure-Python sparse
elimination is used.  Both follow the same pivot rule: scan columns left to
right and take the first remaining row with a nonzero entry.
"""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

_NUMPY_MODULUS_LIMIT = 2**31
_DENSE_CELL_LIMIT = 40_000_000


def _rank_dense(a: np.ndarray, p: int) -> int:
    a = np.array(a, dtype=np.int64) % p
    nrows, ncols = a.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        nz = np.flatnonzero(a[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank, col:] = (a[rank, col:] * inv) % p
        below = a[rank + 1 :, col]
        hit = np.flatnonzero(below)
        if hit.size:
            rows = rank + 1 + hit
            factors = a[rows, col][:, None]
            a[rows, col:] = (a[rows, col:] - factors * a[rank, col:][None, :]) % p
        rank += 1
    return rank


def _rank_sparse(rows: Sequence[Mapping[int, int]], p: int) -> int:
    """Incremental echelon basis keyed by pivot column."""
    basis: Dict[int, Dict[int, int]] = {}
    for row in rows:
        vec = {c: v % p for c, v in row.items() if v % p}
        while vec:
            lead = min(vec)
            piv = basis.get(lead)
            if piv is None:
                inv = pow(vec[lead], p - 2, p)
                basis[lead] = {c: v * inv % p for c, v in vec.items()}
                break
            f = vec[lead]
            for c, v in piv.items():
                nv = (vec.get(c, 0) - f * v) % p
                if nv:
                    vec[c] = nv
                else:
                    vec.pop(c, None)
    return len(basis)


def rank_mod(matrix: Sequence[Sequence[int]], p: int) -> int:
    """Rank of a dense integer matrix over F_p."""
    a = np.asarray(matrix, dtype=object) if p >= _NUMPY_MODULUS_LIMIT else np.asarray(matrix, dtype=np.int64)
    if a.size == 0:
        return 0
    if a.ndim != 2:
        raise ValueError("rank_mod expects a 2-D matrix")
    if p < _NUMPY_MODULUS_LIMIT:
        return _rank_dense(a, p)
    rows = [{j: int(v) for j, v in enumerate(r) if int(v) % p} for r in a.tolist()]
    return _rank_sparse(rows, p)


def rank_sparse_rows(rows: Sequence[Mapping[int, int]], ncols: int, p: int, dense_limit: Optional[int] = None) -> int:
    """Rank of a matrix given as sparse ``{col: value}`` rows."""
    nrows = len(rows)
    if nrows == 0 or ncols == 0:
        return 0
    limit = _DENSE_CELL_LIMIT if dense_limit is None else dense_limit
    if p < _NUMPY_MODULUS_LIMIT and nrows * ncols <= limit:
        # Put the smaller dimension first; rank is transpose-invariant.
        a = np.zeros((nrows, ncols), dtype=np.int64)
        for i, r in enumerate(rows):
            if r:
                cols = np.fromiter(r.keys(), dtype=np.int64, count=len(r))
                vals = np.fromiter(r.values(), dtype=np.int64, count=len(r))
                a[i, cols] = vals % p
        if nrows > ncols:
            a = np.ascontiguousarray(a.T)
        return _rank_dense(a, p)
    return _rank_sparse(rows, p)


def det_mod(matrix: Sequence[Sequence[int]], p: int) -> int:
    """Determinant of a square matrix over F_p (pure Python; blocks are small)."""
    a = [[int(v) % p for v in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("det_mod expects a square matrix")
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col] % p
        inv = pow(a[col][col], p - 2, p)
        for r in range(col + 1, n):
            f = a[r][col] * inv % p
            if f:
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
    return det % p


def matmul_mod(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], p: int) -> List[List[int]]:
    """Exact matrix product over F_p using Python integers."""
    bt = list(zip(*b)) if b else []
    return [[sum(x * y for x, y in zip(row, col)) % p for col in bt] for row in a]


def transpose(a: Sequence[Sequence[int]]) -> List[List[int]]:
    return [list(r) for r in zip(*a)] if a else []
