"""Independent reference implementations used only by the tests.

Nothing here imports the library's algebra: polynomials go through sympy,
ranks through sympy's ``DomainMatrix`` over ``GF(p)`` or ``QQ``, and the
combinatorial references are written from scratch.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix


def symbols(n: int):
    return sympy.symbols(f"v0:{max(n, 1)}")[:n] if n else ()


def to_sympy(poly) -> sympy.Expr:
    """Rebuild a library polynomial as an integer sympy expression (signed coefficients)."""
    xs = sympy.symbols(f"v0:{max(poly.nvars, 1)}")
    expr = sympy.Integer(0)
    for mono, c in poly.terms.items():
        term = sympy.Integer(poly.ctx.signed(c))
        for i, e in mono:
            term *= xs[i] ** e
        expr += term
    return expr


def coeff_dict(expr, n: int, p: int) -> Dict[Tuple[int, ...], int]:
    """Dense-exponent coefficient map of ``expr`` reduced mod ``p`` (zeros dropped)."""
    xs = sympy.symbols(f"v0:{max(n, 1)}")[: max(n, 1)]
    expr = sympy.expand(expr)
    if expr == 0:
        return {}
    P = sympy.Poly(expr, *xs)
    out = {}
    for exps, c in P.as_dict().items():
        v = int(c) % p
        if v:
            out[tuple(exps[:n]) if n else ()] = v
    return out


def lib_dict(poly) -> Dict[Tuple[int, ...], int]:
    """The same dense-exponent map read off a library polynomial."""
    n = poly.nvars
    out = {}
    for mono, c in poly.terms.items():
        e = [0] * max(n, 1)
        for i, k in mono:
            e[i] = k
        out[tuple(e[:n]) if n else ()] = c
    return out


def rank_gf(rows: Sequence[Sequence[int]], p: int) -> int:
    if not rows or not rows[0]:
        return 0
    K = GF(p)
    dm = DomainMatrix([[K(int(v)) for v in r] for r in rows], (len(rows), len(rows[0])), K)
    return dm.rank()


def rank_qq(rows: Sequence[Sequence[int]]) -> int:
    if not rows or not rows[0]:
        return 0
    dm = DomainMatrix([[QQ(int(v)) for v in r] for r in rows], (len(rows), len(rows[0])), QQ)
    return dm.rank()


def spdp_rank_reference(
    poly,
    kappa: int,
    ell: int,
    boolean: bool = False,
    multi: bool = False,
    p: Optional[int] = None,
    signed_integers: bool = False,
) -> int:
    """Rank of the shifted-partials matrix rebuilt from scratch with sympy.

    Rows are ``u * d_S p`` for every index set (or multiset) ``S`` of size
    ``kappa`` and every shift ``u`` of degree at most ``ell``; in the Boolean
    ambient exponents are clipped to 1 after every product.  With
    ``signed_integers`` the rank is taken over the rationals.
    """
    n = poly.nvars
    mod = poly.ctx.modulus if p is None else p
    xs = sympy.symbols(f"v0:{max(n, 1)}")
    f = to_sympy(poly)
    if boolean:
        f = _clip(f, xs, n)
    deg = sympy.Poly(f, *xs).total_degree() if f != 0 else 0
    if f == 0 or deg - kappa + ell < 0:
        return 0
    sets = itertools.combinations_with_replacement(range(n), kappa) if multi else itertools.combinations(range(n), kappa)
    if boolean:
        shifts = [c for d in range(ell + 1) for c in itertools.combinations(range(n), d)]
    else:
        shifts = [c for d in range(ell + 1) for c in itertools.combinations_with_replacement(range(n), d)]
    rows = []
    for S in sets:
        d = f
        for i in S:
            d = sympy.diff(d, xs[i])
        for u in shifts:
            g = d
            for i in u:
                g = g * xs[i]
            g = sympy.expand(g)
            if boolean:
                g = _clip(g, xs, n)
            rows.append(coeff_dict(g, n, mod) if not signed_integers else _int_dict(g, n))
    cols = sorted({m for r in rows for m in r})
    if not cols:
        return 0
    mat = [[r.get(c, 0) for c in cols] for r in rows]
    return rank_qq(mat) if signed_integers else rank_gf(mat, mod)


def _int_dict(expr, n: int) -> Dict[Tuple[int, ...], int]:
    xs = sympy.symbols(f"v0:{max(n, 1)}")
    expr = sympy.expand(expr)
    if expr == 0:
        return {}
    return {tuple(k[:n]): int(v) for k, v in sympy.Poly(expr, *xs).as_dict().items() if v}


def _clip(expr, xs, n: int):
    expr = sympy.expand(expr)
    if expr == 0:
        return expr
    P = sympy.Poly(expr, *xs)
    out = sympy.Integer(0)
    for exps, c in P.as_dict().items():
        t = sympy.Integer(c)
        for i in range(n):
            if exps[i]:
                t *= xs[i]
        out += t
    return sympy.expand(out)


# ---------------------------------------------------------------------------
# Combinatorial references


def matching_count(adj: Sequence[Sequence[int]]) -> int:
    """Perfect matchings of a bipartite 0/1 adjacency matrix by bitmask DP over columns."""
    n = len(adj)

    @lru_cache(maxsize=None)
    def go(row: int, used: int) -> int:
        if row == n:
            return 1
        return sum(go(row + 1, used | (1 << c)) for c in range(n) if adj[row][c] and not used >> c & 1)

    return go(0, 0)


def brute_models(nvars: int, clauses) -> List[Tuple[int, ...]]:
    out = []
    for a in itertools.product((0, 1), repeat=nvars):
        if all(any(a[v] == int(pos) for v, pos in c) for c in clauses):
            out.append(a)
    return out


def full_tree(clauses, assign: Dict[int, int]):
    """Explicit canonical decision tree as nested tuples ``("q", var, t0, t1)`` or ``("leaf", bit)``."""
    query = None
    for c in clauses:
        sat = any(v in assign and assign[v] == int(pos) for v, pos in c)
        if sat:
            continue
        free = sorted(v for v, _ in c if v not in assign)
        if not free:
            return ("leaf", 0)
        if query is None:
            query = free[0]
    if query is None:
        return ("leaf", 1)
    kids = []
    for bit in (0, 1):
        a2 = dict(assign)
        a2[query] = bit
        kids.append(full_tree(clauses, a2))
    return ("q", query, kids[0], kids[1])


def tree_height(tree) -> int:
    if tree[0] == "leaf":
        return 0
    return 1 + max(tree_height(tree[2]), tree_height(tree[3]))


def simulate_reference(delta, q0: str, halting, x: Sequence[int], T: int, width: int):
    """Step a single-tape machine for ``T`` steps; returns the list of (state, head, tape)."""
    tape = list(x) + [0] * (width - len(x))
    q, h = q0, 0
    run = [(q, h, tuple(tape))]
    for _ in range(T):
        if q not in halting:
            q2, a2, mv = delta[(q, tape[h])]
            tape[h] = a2
            nh = h + {"L": -1, "S": 0, "R": 1}[mv]
            h = nh if 0 <= nh < width else h
            q = q2
        run.append((q, h, tuple(tape)))
    return run
