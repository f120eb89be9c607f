"""Polynomial families used by the experiments.

Matrix variables ``x_{i,j}`` (0-based) sit at index ``i * n + j``.  CNF
literals are ``(var, positive)`` pairs with 0-based variables; DIMACS I/O
converts to and from the usual 1-based signed integers.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, SizeError
from .ffpoly import DEFAULT_FIELD, FieldCtx, Monomial, SparsePoly, derive, product

Literal = Tuple[int, bool]
Clause = Tuple[Literal, ...]

PERMANENT_CAP = 6
CUBE_CAP = 20
COUPLED_CLAUSE_CAP = 10
DEFAULT_TERM_CAP = 500_000


# ---------------------------------------------------------------------------
# CNF formulas


@dataclass(frozen=True)
class CnfFormula:
    """A CNF over ``nvars`` Boolean variables."""

    nvars: int
    clauses: Tuple[Clause, ...]
    allow_empty: bool = False
    max_width: Optional[int] = None

    def __post_init__(self) -> None:
        cls = tuple(tuple((int(v), bool(pol)) for v, pol in c) for c in self.clauses)
        object.__setattr__(self, "clauses", cls)
        for c in cls:
            if not c and not self.allow_empty:
                raise DomainError("empty clause (pass allow_empty=True to permit it)")
            if self.max_width is not None and len(c) > self.max_width:
                raise DomainError(f"clause {c} wider than {self.max_width}")
            for v, _ in c:
                if not 0 <= v < self.nvars:
                    raise DomainError(f"literal variable {v} outside [0, {self.nvars})")

    # -- construction helpers -----------------------------------------
    @classmethod
    def from_signed(cls, nvars: int, clauses: Iterable[Iterable[int]], **kw) -> "CnfFormula":
        """Build from DIMACS-style signed 1-based integers."""
        out = []
        for c in clauses:
            lits = []
            for x in c:
                x = int(x)
                if x == 0:
                    raise DomainError("literal 0 is not allowed inside a clause")
                lits.append((abs(x) - 1, x > 0))
            out.append(tuple(lits))
        return cls(nvars, tuple(out), **kw)

    @classmethod
    def from_dimacs(cls, text: str, **kw) -> "CnfFormula":
        nvars = nclauses = None
        clauses: List[List[int]] = []
        cur: List[int] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise DomainError(f"line {lineno}: bad problem line {line!r}")
                try:
                    nvars, nclauses = int(parts[2]), int(parts[3])
                except ValueError as exc:
                    raise DomainError(f"line {lineno}: bad problem line {line!r}") from exc
                continue
            if nvars is None:
                raise DomainError(f"line {lineno}: clause before the 'p cnf' header")
            for tok in line.split():
                try:
                    x = int(tok)
                except ValueError as exc:
                    raise DomainError(f"line {lineno}: bad literal {tok!r}") from exc
                if x == 0:
                    clauses.append(cur)
                    cur = []
                else:
                    if abs(x) > nvars:
                        raise DomainError(f"line {lineno}: literal {x} exceeds nvars={nvars}")
                    cur.append(x)
        if nvars is None:
            raise DomainError("missing 'p cnf' header")
        if cur:
            clauses.append(cur)
        if nclauses is not None and len(clauses) != nclauses:
            raise DomainError(f"header declares {nclauses} clauses, found {len(clauses)}")
        return cls.from_signed(nvars, clauses, **kw)

    def to_signed(self) -> List[List[int]]:
        return [[(v + 1) if pos else -(v + 1) for v, pos in c] for c in self.clauses]

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.nvars} {len(self.clauses)}"]
        lines += [" ".join(str(x) for x in c + [0]) for c in self.to_signed()]
        return "\n".join(lines) + "\n"

    # -- semantics ------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def clause_vars(self, j: int) -> List[int]:
        return sorted({v for v, _ in self.clauses[j]})

    def variables(self) -> List[int]:
        return sorted({v for c in self.clauses for v, _ in c})

    def max_occurrence(self) -> int:
        """Largest number of clauses any single variable appears in."""
        occ: Dict[int, int] = {}
        for c in self.clauses:
            for v in {v for v, _ in c}:
                occ[v] = occ.get(v, 0) + 1
        return max(occ.values(), default=0)

    def satisfies(self, a: Sequence[int]) -> bool:
        return all(any(bool(a[v]) == pos for v, pos in c) for c in self.clauses)

    def model_mask(self) -> np.ndarray:
        """Boolean vector over the cube; entry ``k`` is for the point with bits ``x_i = (k >> i) & 1``."""
        if self.nvars > CUBE_CAP:
            raise SizeError(f"cube enumeration capped at {CUBE_CAP} variables")
        idx = np.arange(1 << self.nvars, dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for c in self.clauses:
            sat = np.zeros(idx.shape, dtype=bool)
            for v, pos in c:
                bit = ((idx >> v) & 1).astype(bool)
                sat |= bit if pos else ~bit
            ok &= sat
        return ok

    def models(self) -> List[Tuple[int, ...]]:
        mask = self.model_mask()
        return [tuple((k >> i) & 1 for i in range(self.nvars)) for k in np.flatnonzero(mask)]

    def is_satisfiable(self) -> bool:
        return bool(self.model_mask().any())


def point(k: int, nvars: int) -> Tuple[int, ...]:
    """Cube point encoded by integer ``k`` (bit ``i`` is ``x_i``)."""
    return tuple((k >> i) & 1 for i in range(nvars))


def random_kcnf(nvars: int, m: int, k: int = 3, seed: int = 0, max_occurrence: Optional[int] = None) -> CnfFormula:
    """Random CNF with ``m`` clauses of ``k`` distinct variables and random signs."""
    if k > nvars:
        raise DomainError("clause width exceeds variable count")
    rng = random.Random(seed)
    occ = [0] * nvars
    clauses = []
    for _ in range(m):
        pool = [v for v in range(nvars) if max_occurrence is None or occ[v] < max_occurrence]
        if len(pool) < k:
            break
        vs = sorted(rng.sample(pool, k))
        for v in vs:
            occ[v] += 1
        clauses.append(tuple((v, rng.random() < 0.5) for v in vs))
    return CnfFormula(nvars, tuple(clauses))


def disjoint_cnf(m: int, width: int = 3, seed: Optional[int] = None) -> CnfFormula:
    """``m`` clauses on pairwise disjoint variable sets; signs random if ``seed`` is given."""
    rng = random.Random(seed)
    clauses = []
    for j in range(m):
        clauses.append(tuple((j * width + r, True if seed is None else rng.random() < 0.5) for r in range(width)))
    return CnfFormula(m * width, tuple(clauses))


# ---------------------------------------------------------------------------
# Matrix polynomials


def matrix_var(i: int, j: int, n: int) -> int:
    return i * n + j


def matrix_names(n: int) -> List[str]:
    return [f"x{i + 1}{j + 1}" for i in range(n) for j in range(n)]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def _matrix_poly(n: int, signed: bool, ctx: FieldCtx, cap: int) -> SparsePoly:
    if n < 1:
        raise DomainError("matrix size must be >= 1")
    if n > cap:
        raise SizeError(f"n={n} exceeds cap {cap} ({factorial(n)} terms)")
    terms = {}
    for sigma in itertools.permutations(range(n)):
        m = Monomial.from_support(matrix_var(i, sigma[i], n) for i in range(n))
        terms[m] = _perm_sign(sigma) if signed else 1
    return SparsePoly.from_terms(n * n, terms, ctx)


def permanent(n: int, ctx: FieldCtx = DEFAULT_FIELD, cap: int = PERMANENT_CAP) -> SparsePoly:
    """``perm_n`` over an ``n x n`` variable matrix."""
    return _matrix_poly(n, False, ctx, cap)


def determinant(n: int, ctx: FieldCtx = DEFAULT_FIELD, cap: int = PERMANENT_CAP) -> SparsePoly:
    """``det_n`` over an ``n x n`` variable matrix."""
    return _matrix_poly(n, True, ctx, cap)


def perfect_matchings(adj: Sequence[Sequence[int]]) -> int:
    """Count perfect matchings of a bipartite graph by row-by-row backtracking."""
    n = len(adj)
    used = [False] * n

    def go(i: int) -> int:
        if i == n:
            return 1
        total = 0
        for j in range(n):
            if adj[i][j] and not used[j]:
                used[j] = True
                total += go(i + 1)
                used[j] = False
        return total

    return go(0)


# ---------------------------------------------------------------------------
# CNF zero test and characteristic polynomial


def literal_poly(lit: Literal, nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> SparsePoly:
    v, pos = lit
    x = SparsePoly.var(v, nvars, ctx)
    return x if pos else 1 - x


def clause_sum(clause: Clause, nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> SparsePoly:
    acc = SparsePoly.zero(nvars, ctx)
    for lit in clause:
        acc = acc + literal_poly(lit, nvars, ctx)
    return acc


def cnf_zero_test(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD, term_cap: int = DEFAULT_TERM_CAP) -> SparsePoly:
    """``P = prod_j S_j`` with ``S_j`` the sum of clause ``j``'s literals (negation is ``1 - x``)."""
    if not phi.clauses:
        raise DomainError("cnf_zero_test needs at least one clause")
    return product([clause_sum(c, phi.nvars, ctx) for c in phi.clauses], term_cap=term_cap)


def choice_products(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD) -> Dict[Tuple[int, ...], SparsePoly]:
    """``M_s = prod_j l_{j, s_j}`` for every choice string ``s``."""
    out = {}
    for s in itertools.product(*[range(len(c)) for c in phi.clauses]):
        out[s] = product([literal_poly(c[k], phi.nvars, ctx) for c, k in zip(phi.clauses, s)])
    return out


def selector_assignment(phi: CnfFormula, s: Sequence[int]) -> Tuple[int, ...]:
    """Point making literal ``s_j`` true and the other literals of clause ``j`` false."""
    a = [0] * phi.nvars
    for c, k in zip(phi.clauses, s):
        for r, (v, pos) in enumerate(c):
            want = (r == k)
            a[v] = int(want == pos)
    return tuple(a)


def selector_matrix(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD) -> Tuple[List[Tuple[int, ...]], List[List[int]]]:
    """Rows: selector points ``a^(s)``; columns: choice products ``M_t``."""
    from .ffpoly import evaluate

    choices = choice_products(phi, ctx)
    keys = list(choices)
    mat = [[evaluate(choices[t], selector_assignment(phi, s)) for t in keys] for s in keys]
    return keys, mat


def _cube_to_poly(values: np.ndarray, nvars: int, ctx: FieldCtx) -> SparsePoly:
    """Multilinear interpolation of cube values via the Moebius transform."""
    p = ctx.modulus
    g = values.astype(np.int64) % p
    for i in range(nvars):
        view = g.reshape(-1, 2, 1 << i)
        view[:, 1, :] = (view[:, 1, :] - view[:, 0, :]) % p
    terms = {}
    for k in np.flatnonzero(g):
        k = int(k)
        terms[Monomial._raw(tuple((i, 1) for i in range(nvars) if (k >> i) & 1))] = int(g[k])
    return SparsePoly._make(ctx, nvars, terms)


def characteristic_poly(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD) -> SparsePoly:
    """Multilinear indicator of the satisfying assignments of ``phi``."""
    if phi.nvars > CUBE_CAP:
        raise SizeError(f"characteristic_poly capped at {CUBE_CAP} variables")
    return _cube_to_poly(phi.model_mask().astype(np.int64), phi.nvars, ctx)


def cube_values(p: SparsePoly, cap: int = CUBE_CAP) -> np.ndarray:
    """Values of ``p`` at every cube point (same indexing as :meth:`CnfFormula.model_mask`)."""
    n = p.nvars
    if n > cap:
        raise SizeError(f"cube evaluation capped at {cap} variables")
    mod = p.ctx.modulus
    idx = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(idx.shape, dtype=np.int64)
    for m, c in p.multilinear().terms.items():
        mask = 0
        for i, _ in m:
            mask |= 1 << i
        on = (idx & mask) == mask
        total[on] = (total[on] + c) % mod
    return total


def valrank(p: SparsePoly, nvars: Optional[int] = None) -> int:
    """Number of distinct field values ``p`` takes on the Boolean cube."""
    q = p if nvars is None else p.with_nvars(nvars)
    return int(np.unique(cube_values(q)).size)


def parity_form(n: int, ctx: FieldCtx = DEFAULT_FIELD) -> SparsePoly:
    """``prod_i (1 - 2 x_i)``, which is +-1 on the cube."""
    f = SparsePoly.constant(1, n, ctx)
    for i in range(n):
        f = f * (1 - SparsePoly.var(i, n, ctx).scale(2))
    return f


# ---------------------------------------------------------------------------
# Tseitin formulas


Graph = Tuple[int, Tuple[Tuple[int, int], ...]]


def cycle_graph(n: int) -> Graph:
    return (n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return (n, tuple(itertools.combinations(range(n), 2)))


def circulant_graph(n: int, offsets: Sequence[int]) -> Graph:
    edges = set()
    for i in range(n):
        for o in offsets:
            j = (i + o) % n
            if i != j:
                edges.add((min(i, j), max(i, j)))
    return (n, tuple(sorted(edges)))


def _parity_clauses(vs: Sequence[int], charge: int) -> List[Clause]:
    """CNF of ``XOR(vs) == charge``: forbid every assignment of the wrong parity."""
    out = []
    for bits in itertools.product((0, 1), repeat=len(vs)):
        if sum(bits) % 2 != charge % 2:
            # the clause rules out exactly this assignment
            out.append(tuple((v, b == 0) for v, b in zip(vs, bits)))
    return out


def tseitin_cnf(graph: Graph, charge: Mapping[int, int] | Sequence[int]) -> CnfFormula:
    """Tseitin parity formula: one variable per edge, one XOR constraint per vertex.

    Vertices of degree 4 are split with one auxiliary variable so every
    clause has width at most 3.
    """
    nv, edges = graph
    ch = dict(charge) if isinstance(charge, Mapping) else dict(enumerate(charge))
    incident: Dict[int, List[int]] = {v: [] for v in range(nv)}
    for e, (a, b) in enumerate(edges):
        incident[a].append(e)
        incident[b].append(e)
    nvars = len(edges)
    clauses: List[Clause] = []
    for v in range(nv):
        es = incident[v]
        c = ch.get(v, 0) % 2
        if len(es) > 4:
            raise DomainError(f"vertex {v} has degree {len(es)} > 4")
        if len(es) == 4:
            aux = nvars
            nvars += 1
            clauses += _parity_clauses([es[0], es[1], aux], 0)
            clauses += _parity_clauses([aux, es[2], es[3]], c)
        else:
            clauses += _parity_clauses(es, c)
    return CnfFormula(nvars, tuple(clauses), allow_empty=True)


def tseitin_random3(n_inputs: int, m_clauses: int, seed: int) -> Tuple[CnfFormula, int]:
    """Gate-level Tseitin encoding of a random 3-CNF.

    Each random clause becomes an OR gate with a fresh output, and the outputs
    are folded by a chain of AND gates.  Returns the formula and the number of
    original input variables, which occupy indices ``0 .. n_inputs - 1``.
    """
    rng = random.Random(seed)
    nxt = n_inputs
    clauses: List[Clause] = []
    outs = []
    for _ in range(m_clauses):
        vs = rng.sample(range(n_inputs), 3)
        lits = [(v, rng.random() < 0.5) for v in vs]
        y = nxt
        nxt += 1
        clauses.append(((y, False),) + tuple(lits))
        for v, pos in lits:
            clauses.append(((y, True), (v, not pos)))
        outs.append(y)
    if outs:
        cur = outs[0]
        for y in outs[1:]:
            z = nxt
            nxt += 1
            clauses.append(((cur, False), (y, False), (z, True)))
            clauses.append(((cur, True), (z, False)))
            clauses.append(((y, True), (z, False)))
            cur = z
    return CnfFormula(nxt, tuple(clauses)), n_inputs


# ---------------------------------------------------------------------------
# Clause sheets


@dataclass(frozen=True)
class ClauseGadget:
    """Clause-local gadget ``V_C = t_C + sum(pad literals) - width``."""

    clause_id: int
    block: Tuple[int, ...]
    tag: int
    gadget: SparsePoly
    literals: Clause

    def tag_coefficient(self) -> int:
        return self.gadget.coefficient(((self.tag, 1),))


@dataclass
class CoupledSheet:
    """Factored form of ``prod_C (1 - z_C V_C^2)``.

    Variable layout: the clause blocks ``[t_C, pad_1 .. pad_k]`` in clause
    order, then one selector ``z_C`` per clause.
    """

    formula: CnfFormula
    gadgets: List[ClauseGadget]
    selectors: List[int]
    nvars: int
    ctx: FieldCtx
    _squares: Dict[int, SparsePoly] = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return len(self.gadgets)

    def square(self, c: int) -> SparsePoly:
        if c not in self._squares:
            g = self.gadgets[c].gadget
            self._squares[c] = g * g
        return self._squares[c]

    def factor(self, c: int) -> SparsePoly:
        z = SparsePoly.var(self.selectors[c], self.nvars, self.ctx)
        return 1 - z * self.square(c)

    def factors(self) -> List[SparsePoly]:
        return [self.factor(c) for c in range(self.m)]

    def expand(self, term_cap: int = DEFAULT_TERM_CAP) -> SparsePoly:
        return product(self.factors(), term_cap=term_cap)

    def tag_monomial(self, S: Iterable[int]) -> Monomial:
        """``tau_S = prod_{C in S} t_C^2``."""
        return Monomial(sorted((self.gadgets[c].tag, 2) for c in S))

    def selector_set(self, S: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(self.selectors[c] for c in S))

    def z_free_partial(self, S: Iterable[int]) -> SparsePoly:
        """``(d_{z_S} Q)|_{z=0} = (-1)^|S| prod_{C in S} V_C^2``.

        Every z-free coefficient of ``d_{z_S} Q`` equals the matching
        coefficient of this slice.
        """
        S = list(S)
        acc = SparsePoly.constant((-1) ** len(S), self.nvars, self.ctx)
        for c in S:
            acc = acc * self.square(c)
        return acc

    def selector_partial(self, S: Iterable[int], term_cap: int = DEFAULT_TERM_CAP) -> SparsePoly:
        """Full ``d_{z_S} Q`` by expansion (small instances only)."""
        S = set(S)
        acc = SparsePoly.constant((-1) ** len(S), self.nvars, self.ctx)
        parts = [acc] + [self.square(c) if c in S else self.factor(c) for c in range(self.m)]
        return product(parts, term_cap=term_cap)

    def shared_assignment_poly(self, term_cap: int = DEFAULT_TERM_CAP) -> SparsePoly:
        """Sheet with every pad identified with its global input variable.

        Inputs occupy fresh indices after the selectors, so the result lives
        in ``nvars + formula.nvars`` variables.
        """
        base = self.nvars
        mapping = {}
        for g in self.gadgets:
            for pad, (v, _) in zip(g.block[1:], g.literals):
                mapping[pad] = base + v
        return self.expand(term_cap).rename(mapping, nvars=base + self.formula.nvars)


def _gadgets(phi: CnfFormula, ctx: FieldCtx) -> Tuple[List[ClauseGadget], int]:
    gadgets = []
    nxt = 0
    blocks = []
    for j, c in enumerate(phi.clauses):
        width = len(c)
        block = tuple(range(nxt, nxt + 1 + width))
        nxt += 1 + width
        blocks.append(block)
        gadgets.append((j, block, c))
    out = []
    for j, block, c in gadgets:
        tag = block[0]
        v = SparsePoly.var(tag, nxt, ctx) - len(c)
        for pad, (_, pos) in zip(block[1:], c):
            x = SparsePoly.var(pad, nxt, ctx)
            v = v + (x if pos else 1 - x)
        out.append(ClauseGadget(j, block, tag, v, c))
    return out, nxt


def build_coupled_sheet(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD, cap: int = COUPLED_CLAUSE_CAP) -> CoupledSheet:
    """Gadgets and selector layout of the coupled sheet, without expanding it."""
    if phi.m > cap:
        raise SizeError(f"coupled sheet capped at {cap} clauses, got {phi.m}")
    if phi.m == 0:
        raise DomainError("coupled sheet needs at least one clause")
    gadgets, nblock = _gadgets(phi, ctx)
    nvars = nblock + phi.m
    gadgets = [ClauseGadget(g.clause_id, g.block, g.tag, g.gadget.with_nvars(nvars), g.literals) for g in gadgets]
    sheet = CoupledSheet(phi, gadgets, list(range(nblock, nvars)), nvars, ctx)
    for g in gadgets:
        if g.tag_coefficient() != 1:
            raise AssertionError(f"gadget {g.clause_id} has tag coefficient {g.tag_coefficient()}")
    return sheet


def coupled_sheet(
    phi: CnfFormula,
    ctx: FieldCtx = DEFAULT_FIELD,
    cap: int = COUPLED_CLAUSE_CAP,
    term_cap: int = DEFAULT_TERM_CAP,
) -> Tuple[SparsePoly, List[ClauseGadget]]:
    """Expanded coupled sheet and its gadgets."""
    sheet = build_coupled_sheet(phi, ctx, cap)
    return sheet.expand(term_cap), sheet.gadgets


def additive_sheet(phi: CnfFormula, ctx: FieldCtx = DEFAULT_FIELD) -> Tuple[SparsePoly, List[ClauseGadget]]:
    """``1 - sum_C V_C^2`` on the clause blocks alone (no selectors)."""
    if phi.m == 0:
        raise DomainError("additive sheet needs at least one clause")
    gadgets, nvars = _gadgets(phi, ctx)
    acc = SparsePoly.constant(1, nvars, ctx)
    for g in gadgets:
        acc = acc - g.gadget * g.gadget
    return acc, gadgets


def cross_block_partials(p: SparsePoly, gadgets: Sequence[ClauseGadget]) -> Dict[Tuple[int, int], SparsePoly]:
    """``d_i d_j p`` for every pair of variables from two distinct clause blocks."""
    out = {}
    for g1, g2 in itertools.combinations(gadgets, 2):
        for i in g1.block:
            for j in g2.block:
                out[(i, j)] = derive(p, (i, j))
    return out
