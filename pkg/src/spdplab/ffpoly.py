"""Prime-field arithmetic and sparse polynomials.

Polynomials are immutable maps from :class:`Monomial` to nonzero field elements.
Every operation returns a fresh object and never stores a zero coefficient.
The plain polynomial ring is the default; the Boolean quotient
``x_i**2 == x_i`` is available through explicit ``reduce`` flags and
:meth:`SparsePoly.multilinear`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import DomainError, InvalidTransformError, SizeError

DEFAULT_PRIME = 1_000_003


@lru_cache(maxsize=256)
def _is_prime(n: int) -> bool:
    from sympy import isprime

    return bool(isprime(n))


@dataclass(frozen=True)
class FieldCtx:
    """The prime field F_p. Elements are plain ints kept in ``[0, p)``."""

    modulus: int = DEFAULT_PRIME

    def __post_init__(self) -> None:
        if not isinstance(self.modulus, int) or self.modulus < 2 or not _is_prime(self.modulus):
            raise DomainError(f"modulus must be a prime >= 2, got {self.modulus!r}")

    def __call__(self, value: int) -> int:
        return value % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def neg(self, a: int) -> int:
        return (-a) % self.modulus

    def inv(self, a: int) -> int:
        a %= self.modulus
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, self.modulus - 2, self.modulus)

    def signed(self, a: int) -> int:
        """Representative of ``a`` in ``(-p/2, p/2]``."""
        a %= self.modulus
        return a - self.modulus if a > self.modulus // 2 else a


DEFAULT_FIELD = FieldCtx(DEFAULT_PRIME)


class Monomial(tuple):
    """A monomial as a sorted tuple of ``(index, exponent)`` pairs.

    Being a tuple keeps hashing and comparison cheap; the empty tuple is the
    constant monomial 1.
    """

    __slots__ = ()

    def __new__(cls, pairs: Iterable[Tuple[int, int]] = ()) -> "Monomial":
        pairs = tuple((int(i), int(e)) for i, e in pairs)
        prev = -1
        for i, e in pairs:
            if i <= prev:
                raise DomainError(f"monomial support must be strictly increasing: {pairs}")
            if e < 1:
                raise DomainError(f"monomial exponents must be positive: {pairs}")
            prev = i
        return tuple.__new__(cls, pairs)

    @classmethod
    def _raw(cls, pairs: Iterable[Tuple[int, int]]) -> "Monomial":
        return tuple.__new__(cls, pairs)

    @classmethod
    def from_support(cls, indices: Iterable[int]) -> "Monomial":
        """Square-free monomial on ``indices`` (duplicates are rejected)."""
        idx = sorted(indices)
        if len(set(idx)) != len(idx):
            raise DomainError(f"repeated index in support {idx}")
        return cls((i, 1) for i in idx)

    @classmethod
    def from_exponents(cls, exps: Mapping[int, int]) -> "Monomial":
        return cls(sorted((i, e) for i, e in exps.items() if e))

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "Monomial":
        """Monomial from an index multiset, e.g. ``[0, 0, 2]`` -> x0^2 x2."""
        counts: Dict[int, int] = {}
        for i in indices:
            counts[i] = counts.get(i, 0) + 1
        return cls.from_exponents(counts)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self)

    @property
    def exponents(self) -> Tuple[int, ...]:
        return tuple(e for _, e in self)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self)

    @property
    def is_multilinear(self) -> bool:
        return all(e == 1 for _, e in self)

    def indices(self) -> List[int]:
        """Sorted index multiset (inverse of :meth:`from_indices`)."""
        return [i for i, e in self for _ in range(e)]

    def mul(self, other: "Monomial", reduce: bool = False) -> "Monomial":
        return _mono_mul(self, other, reduce)

    def reduce_multilinear(self) -> "Monomial":
        if self.is_multilinear:
            return self
        return Monomial._raw((i, 1) for i, _ in self)

    def name(self, names: Optional[Sequence[str]] = None) -> str:
        if not self:
            return "1"
        parts = []
        for i, e in self:
            v = names[i] if names is not None else f"x{i}"
            parts.append(v if e == 1 else f"{v}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"Monomial({self.name()})"


ONE = Monomial()


def _mono_mul(a: Tuple[Tuple[int, int], ...], b: Tuple[Tuple[int, int], ...], reduce: bool) -> Monomial:
    if not a:
        return b if isinstance(b, Monomial) else Monomial._raw(b)
    if not b:
        return a if isinstance(a, Monomial) else Monomial._raw(a)
    out: List[Tuple[int, int]] = []
    ia = ib = 0
    la, lb = len(a), len(b)
    while ia < la and ib < lb:
        va, ea = a[ia]
        vb, eb = b[ib]
        if va == vb:
            out.append((va, 1 if reduce else ea + eb))
            ia += 1
            ib += 1
        elif va < vb:
            out.append((va, 1 if reduce else ea))
            ia += 1
        else:
            out.append((vb, 1 if reduce else eb))
            ib += 1
    if reduce:
        out.extend((v, 1) for v, _ in a[ia:])
        out.extend((v, 1) for v, _ in b[ib:])
    else:
        out.extend(a[ia:])
        out.extend(b[ib:])
    return Monomial._raw(out)


def monomial_key(m: Monomial) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    """Graded order: total degree first, then the (index, exponent) sequence."""
    return (m.degree, tuple(m))


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint blocks covering ``range(nvars)``."""

    blocks: Tuple[Tuple[int, ...], ...]
    nvars: int
    max_block_size: Optional[int] = None

    def __post_init__(self) -> None:
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set = set()
        for b in blocks:
            if not b:
                raise DomainError("empty block")
            for i in b:
                if i in seen:
                    raise DomainError(f"index {i} appears in two blocks")
                if not 0 <= i < self.nvars:
                    raise DomainError(f"block index {i} outside [0, {self.nvars})")
                seen.add(i)
        if len(seen) != self.nvars:
            missing = sorted(set(range(self.nvars)) - seen)
            raise DomainError(f"blocks do not cover indices {missing}")
        cap = self.max_block_size
        if cap is None:
            object.__setattr__(self, "max_block_size", max((len(b) for b in blocks), default=0))
        elif any(len(b) > cap for b in blocks):
            raise DomainError(f"block larger than max_block_size={cap}")

    @classmethod
    def singletons(cls, nvars: int) -> "BlockPartition":
        return cls(tuple((i,) for i in range(nvars)), nvars)

    @classmethod
    def whole(cls, nvars: int) -> "BlockPartition":
        return cls((tuple(range(nvars)),) if nvars else (), nvars)

    @classmethod
    def contiguous(cls, nvars: int, size: int) -> "BlockPartition":
        return cls(tuple(tuple(range(s, min(s + size, nvars))) for s in range(0, nvars, size)), nvars, size)

    def block_of(self, index: int) -> int:
        for j, b in enumerate(self.blocks):
            if index in b:
                return j
        raise DomainError(f"index {index} not in partition")


Assignment = Union[Mapping[int, Optional[int]], Sequence[Optional[int]]]


@dataclass(frozen=True, eq=False)
class SparsePoly:
    """Sparse polynomial over ``ctx`` in variables ``x_0 .. x_{nvars-1}``."""

    ctx: FieldCtx
    nvars: int
    terms: Mapping[Monomial, int] = field(default_factory=dict)

    # -- construction -------------------------------------------------
    @classmethod
    def from_terms(
        cls,
        nvars: int,
        terms: Union[Mapping, Iterable[Tuple[Iterable, int]]],
        ctx: FieldCtx = DEFAULT_FIELD,
    ) -> "SparsePoly":
        """Build from ``{monomial-like: coef}``; monomial-likes may be Monomials or pair tuples."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        out: Dict[Monomial, int] = {}
        p = ctx.modulus
        for mono, c in items:
            m = mono if isinstance(mono, Monomial) else Monomial(mono)
            if m and m[-1][0] >= nvars:
                raise DomainError(f"monomial {m} uses index >= nvars={nvars}")
            out[m] = (out.get(m, 0) + c) % p
        return cls._make(ctx, nvars, {m: c for m, c in out.items() if c})

    @classmethod
    def _make(cls, ctx: FieldCtx, nvars: int, terms: Dict[Monomial, int]) -> "SparsePoly":
        return cls(ctx, nvars, terms)

    @classmethod
    def zero(cls, nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> "SparsePoly":
        return cls._make(ctx, nvars, {})

    @classmethod
    def constant(cls, value: int, nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> "SparsePoly":
        v = value % ctx.modulus
        return cls._make(ctx, nvars, {ONE: v} if v else {})

    @classmethod
    def var(cls, index: int, nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> "SparsePoly":
        if not 0 <= index < nvars:
            raise DomainError(f"variable {index} outside [0, {nvars})")
        return cls._make(ctx, nvars, {Monomial._raw(((index, 1),)): 1})

    @classmethod
    def monomial(cls, m: Monomial, nvars: int, ctx: FieldCtx = DEFAULT_FIELD, coef: int = 1) -> "SparsePoly":
        return cls.from_terms(nvars, {m: coef}, ctx)

    # -- inspection ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, int]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0 by convention."""
        return max((m.degree for m in self.terms), default=0)

    def coefficient(self, m: Union[Monomial, Iterable[Tuple[int, int]]]) -> int:
        if not isinstance(m, Monomial):
            m = Monomial(m)
        return self.terms.get(m, 0)

    def variables(self) -> List[int]:
        return sorted({i for m in self.terms for i, _ in m})

    def is_multilinear(self) -> bool:
        return all(m.is_multilinear for m in self.terms)

    def sorted_terms(self) -> List[Tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0]))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self == SparsePoly.constant(other, self.nvars, self.ctx)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.ctx == other.ctx and self.nvars == other.nvars and dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash((self.ctx, self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"SparsePoly({self.pretty()}; nvars={self.nvars}, p={self.ctx.modulus})"

    def pretty(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            s = self.ctx.signed(c)
            body = m.name(names)
            if not m:
                parts.append(str(s))
            elif s == 1:
                parts.append(body)
            elif s == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{s}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- arithmetic ---------------------------------------------------
    def _check_compatible(self, other: "SparsePoly") -> None:
        if self.ctx != other.ctx:
            raise DomainError("polynomials over different fields")
        if self.nvars != other.nvars:
            raise DomainError(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other: Union["SparsePoly", int]) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            self._check_compatible(other)
            return other
        if isinstance(other, int):
            return SparsePoly.constant(other, self.nvars, self.ctx)
        return NotImplemented

    def __add__(self, other: Union["SparsePoly", int]) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.ctx.modulus
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = (out.get(m, 0) + c) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return SparsePoly._make(self.ctx, self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        p = self.ctx.modulus
        return SparsePoly._make(self.ctx, self.nvars, {m: (-c) % p for m, c in self.terms.items()})

    def __sub__(self, other: Union["SparsePoly", int]) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: int) -> "SparsePoly":
        return (-self) + other

    def scale(self, a: int) -> "SparsePoly":
        p = self.ctx.modulus
        a %= p
        if a == 0:
            return SparsePoly.zero(self.nvars, self.ctx)
        return SparsePoly._make(self.ctx, self.nvars, {m: (c * a) % p for m, c in self.terms.items()})

    def mul(self, other: "SparsePoly", reduce: bool = False) -> "SparsePoly":
        """Product; ``reduce=True`` multiplies in the Boolean quotient."""
        self._check_compatible(other)
        p = self.ctx.modulus
        out: Dict[Monomial, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2, reduce)
                out[m] = (out.get(m, 0) + c1 * c2) % p
        return SparsePoly._make(self.ctx, self.nvars, {m: c for m, c in out.items() if c})

    def __mul__(self, other: Union["SparsePoly", int]) -> "SparsePoly":
        if isinstance(other, int):
            return self.scale(other)
        if isinstance(other, SparsePoly):
            return self.mul(other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "SparsePoly":
        if k < 0:
            raise DomainError("negative power")
        result = SparsePoly.constant(1, self.nvars, self.ctx)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def multilinear(self) -> "SparsePoly":
        """Reduce modulo ``x_i**2 - x_i``."""
        if self.is_multilinear():
            return self
        p = self.ctx.modulus
        out: Dict[Monomial, int] = {}
        for m, c in self.terms.items():
            r = m.reduce_multilinear()
            out[r] = (out.get(r, 0) + c) % p
        return SparsePoly._make(self.ctx, self.nvars, {m: c for m, c in out.items() if c})

    def with_nvars(self, nvars: int) -> "SparsePoly":
        """Same polynomial viewed in a ring with ``nvars`` variables."""
        if nvars < self.nvars and any(m and m[-1][0] >= nvars for m in self.terms):
            raise DomainError("polynomial uses variables beyond the new ring")
        return SparsePoly._make(self.ctx, nvars, dict(self.terms))

    def with_field(self, ctx: FieldCtx) -> "SparsePoly":
        """Coefficientwise reduction into another field (integers taken in signed form)."""
        return SparsePoly.from_terms(self.nvars, {m: self.ctx.signed(c) for m, c in self.terms.items()}, ctx)

    def rename(self, mapping: Mapping[int, int], nvars: Optional[int] = None) -> "SparsePoly":
        """Substitute ``x_i -> x_{mapping[i]}``; non-injective maps identify variables."""
        n = self.nvars if nvars is None else nvars
        p = self.ctx.modulus
        out: Dict[Monomial, int] = {}
        for m, c in self.terms.items():
            exps: Dict[int, int] = {}
            for i, e in m:
                j = mapping.get(i, i)
                if not 0 <= j < n:
                    raise DomainError(f"rename target {j} outside [0, {n})")
                exps[j] = exps.get(j, 0) + e
            mm = Monomial._raw(sorted(exps.items()))
            out[mm] = (out.get(mm, 0) + c) % p
        return SparsePoly._make(self.ctx, n, {m: c for m, c in out.items() if c})

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "modulus": self.ctx.modulus,
            "terms": [{"mono": [[i, e] for i, e in m], "coef": c} for m, c in self.sorted_terms()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Union[str, Mapping]) -> "SparsePoly":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            ctx = FieldCtx(int(data.get("modulus", DEFAULT_PRIME)))
            nvars = int(data["nvars"])
            terms = [(tuple((int(i), int(e)) for i, e in t["mono"]), int(t["coef"])) for t in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed polynomial JSON: {exc}") from exc
        return cls.from_terms(nvars, terms, ctx)


# ---------------------------------------------------------------------------
# Operations


def _check_indices(p: SparsePoly, indices: Iterable[int]) -> None:
    for i in indices:
        if not 0 <= i < p.nvars:
            raise DomainError(f"variable index {i} outside [0, {p.nvars})")


def derivative(p: SparsePoly, orders: Mapping[int, int]) -> SparsePoly:
    """Mixed partial with ``orders[i]``-fold differentiation in ``x_i``."""
    _check_indices(p, orders)
    orders = {i: k for i, k in orders.items() if k}
    if not orders:
        return p
    pmod = p.ctx.modulus
    out: Dict[Monomial, int] = {}
    for m, c in p.terms.items():
        exps = dict(m)
        coef = c
        for i, k in orders.items():
            e = exps.get(i, 0)
            if e < k:
                coef = 0
                break
            for t in range(k):
                coef = coef * (e - t) % pmod
            if e == k:
                del exps[i]
            else:
                exps[i] = e - k
        if coef:
            mm = Monomial._raw(sorted(exps.items()))
            out[mm] = (out.get(mm, 0) + coef) % pmod
    return SparsePoly._make(p.ctx, p.nvars, {m: c for m, c in out.items() if c})


def derive(p: SparsePoly, S: Iterable[int]) -> SparsePoly:
    """The mixed partial ``prod_{i in S} d/dx_i`` for a set ``S`` of distinct indices."""
    S = list(S)
    if len(set(S)) != len(S):
        raise DomainError(f"derive takes a set of distinct indices, got {S}; use derive_multi")
    _check_indices(p, S)
    if not S:
        return p
    if p.is_multilinear():
        # fast path: a term survives iff its support contains S
        Sset = set(S)
        out: Dict[Monomial, int] = {}
        for m, c in p.terms.items():
            sup = [i for i, _ in m]
            if Sset.issubset(sup):
                out[Monomial._raw((i, 1) for i in sup if i not in Sset)] = c
        return SparsePoly._make(p.ctx, p.nvars, out)
    return derivative(p, {i: 1 for i in S})


def derive_multi(p: SparsePoly, tau: Iterable[int]) -> SparsePoly:
    """Derivative along an index multiset, e.g. ``[0, 0, 3]`` is d^3/dx0^2 dx3."""
    counts: Dict[int, int] = {}
    for i in tau:
        counts[i] = counts.get(i, 0) + 1
    return derivative(p, counts)


def shift(p: SparsePoly, m: Monomial, reduce: bool = False) -> SparsePoly:
    """``m * p``, optionally reduced modulo ``x_i**2 - x_i``."""
    if not isinstance(m, Monomial):
        m = Monomial(m)
    if m and m[-1][0] >= p.nvars:
        raise DomainError(f"shift monomial {m} uses index >= nvars={p.nvars}")
    if not m and not reduce:
        return p
    out: Dict[Monomial, int] = {}
    pmod = p.ctx.modulus
    for t, c in p.terms.items():
        mm = _mono_mul(t, m, reduce)
        out[mm] = (out.get(mm, 0) + c) % pmod
    if reduce and not m:
        return p.multilinear()
    return SparsePoly._make(p.ctx, p.nvars, {k: v for k, v in out.items() if v})


def _as_mapping(rho: Assignment) -> Dict[int, int]:
    if isinstance(rho, Mapping):
        return {int(i): v for i, v in rho.items() if v is not None}
    return {i: v for i, v in enumerate(rho) if v is not None}


def restrict(p: SparsePoly, rho: Assignment) -> SparsePoly:
    """Substitute fixed values; ``None`` entries (stars) stay free."""
    fixed = _as_mapping(rho)
    _check_indices(p, fixed)
    if not fixed:
        return p
    pmod = p.ctx.modulus
    fixed = {i: v % pmod for i, v in fixed.items()}
    out: Dict[Monomial, int] = {}
    for m, c in p.terms.items():
        coef = c
        keep = []
        for i, e in m:
            if i in fixed:
                coef = coef * pow(fixed[i], e, pmod) % pmod
                if not coef:
                    break
            else:
                keep.append((i, e))
        if coef:
            mm = Monomial._raw(keep)
            out[mm] = (out.get(mm, 0) + coef) % pmod
    return SparsePoly._make(p.ctx, p.nvars, {m: c for m, c in out.items() if c})


def project(p: SparsePoly, keep: Iterable[int]) -> SparsePoly:
    """Syntactic projection: every variable outside ``keep`` is set to 0."""
    keep = set(keep)
    _check_indices(p, keep)
    return restrict(p, {i: 0 for i in range(p.nvars) if i not in keep})


def evaluate(p: SparsePoly, a: Sequence[int]) -> int:
    """Exact evaluation at a full assignment."""
    if len(a) != p.nvars:
        raise DomainError(f"assignment has length {len(a)}, expected {p.nvars}")
    pmod = p.ctx.modulus
    total = 0
    for m, c in p.terms.items():
        v = c
        for i, e in m:
            v = v * pow(a[i], e, pmod) % pmod
            if not v:
                break
        total += v
    return total % pmod


BlockMap = Tuple[Sequence[Sequence[int]], Optional[Sequence[int]]]


def block_affine(
    p: SparsePoly,
    partition: BlockPartition,
    maps: Union[Sequence[Optional[BlockMap]], Mapping[int, BlockMap]],
) -> SparsePoly:
    """Compose ``p`` with the block-local substitution ``x_B -> A_B x_B + c_B``.

    ``maps`` gives, per block (by position in ``partition.blocks``), a pair
    ``(A, c)``; ``None`` or a missing entry means identity.  Row ``r`` of ``A``
    expresses the image of the block's ``r``-th smallest variable.
    """
    from .linalg import det_mod

    if partition.nvars != p.nvars:
        raise DomainError("partition and polynomial disagree on nvars")
    if not isinstance(maps, Mapping):
        maps = {j: mp for j, mp in enumerate(maps) if mp is not None}
    ctx = p.ctx
    images: Dict[int, SparsePoly] = {}
    for j, mp in maps.items():
        if mp is None:
            continue
        if not 0 <= j < len(partition.blocks):
            raise DomainError(f"no block {j}")
        block = partition.blocks[j]
        A, c = mp
        k = len(block)
        if len(A) != k or any(len(row) != k for row in A):
            raise DomainError(f"block {j} needs a {k}x{k} matrix")
        c = list(c) if c is not None else [0] * k
        if len(c) != k:
            raise DomainError(f"block {j} offset must have length {k}")
        if det_mod([[int(v) for v in row] for row in A], ctx.modulus) == 0:
            raise InvalidTransformError(f"block {j} matrix is singular mod {ctx.modulus}")
        for r, var in enumerate(block):
            terms = {Monomial._raw(((block[s], 1),)): A[r][s] for s in range(k)}
            terms[ONE] = c[r]
            images[var] = SparsePoly.from_terms(p.nvars, terms, ctx)
    if not images:
        return p
    powers: Dict[Tuple[int, int], SparsePoly] = {}

    def image_pow(i: int, e: int) -> SparsePoly:
        key = (i, e)
        if key not in powers:
            powers[key] = images[i] if e == 1 else image_pow(i, e - 1) * images[i]
        return powers[key]

    result = SparsePoly.zero(p.nvars, ctx)
    acc: Dict[Monomial, int] = {}
    pmod = ctx.modulus
    for m, c in p.terms.items():
        fixed_part = Monomial._raw((i, e) for i, e in m if i not in images)
        term = SparsePoly._make(ctx, p.nvars, {fixed_part: c})
        for i, e in m:
            if i in images:
                term = term * image_pow(i, e)
        for mm, cc in term.terms.items():
            acc[mm] = (acc.get(mm, 0) + cc) % pmod
    result = SparsePoly._make(ctx, p.nvars, {m: c for m, c in acc.items() if c})
    return result


def affine_image(
    a: Sequence[int],
    partition: BlockPartition,
    maps: Union[Sequence[Optional[BlockMap]], Mapping[int, BlockMap]],
    ctx: FieldCtx,
) -> List[int]:
    """Apply the block-local affine map to a point (companion of :func:`block_affine`)."""
    if not isinstance(maps, Mapping):
        maps = {j: mp for j, mp in enumerate(maps) if mp is not None}
    out = [v % ctx.modulus for v in a]
    for j, mp in maps.items():
        if mp is None:
            continue
        block = partition.blocks[j]
        A, c = mp
        c = list(c) if c is not None else [0] * len(block)
        for r, var in enumerate(block):
            out[var] = (sum(A[r][s] * a[block[s]] for s in range(len(block))) + c[r]) % ctx.modulus
    return out


def product(factors: Sequence[SparsePoly], reduce: bool = False, term_cap: Optional[int] = None) -> SparsePoly:
    """Expanded product with an optional cap on intermediate term counts."""
    if not factors:
        raise DomainError("empty product")
    acc = factors[0]
    for f in factors[1:]:
        if term_cap is not None and len(acc) * len(f) > term_cap * 4 and len(acc) > term_cap:
            raise SizeError(f"product expansion exceeds {term_cap} terms")
        acc = acc.mul(f, reduce=reduce)
        if term_cap is not None and len(acc) > term_cap:
            raise SizeError(f"product expansion exceeds {term_cap} terms")
    return acc


def monomials_up_to(nvars: int, degree: int, square_free: bool = False, exact: bool = False) -> List[Monomial]:
    """All monomials of degree ``<= degree`` (or ``== degree``) in graded order."""
    out: List[Monomial] = []
    lo = degree if exact else 0
    for d in range(lo, degree + 1):
        gen = itertools.combinations(range(nvars), d) if square_free else itertools.combinations_with_replacement(range(nvars), d)
        for idx in gen:
            out.append(Monomial.from_indices(idx))
    return out
