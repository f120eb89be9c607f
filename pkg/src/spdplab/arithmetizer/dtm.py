"""Compile a toy single-tape machine into a tableau constraint polynomial.

Tape cells hold bits; the blank symbol is read and written as 0.  The tape
has ``W = max(T + 1, n)`` cells and a move that would leave it becomes a stay.
Halting states loop on themselves, so a run is always ``T`` steps long.

Variables are laid out time-major (inputs first, then for each ``t`` the
state, head, tape and auxiliary ``y = s * h`` cells), which keeps every
constraint's largest variable inside its own or the next time slice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..errors import DomainError, SizeError
from ..ffpoly import DEFAULT_FIELD, FieldCtx, SparsePoly, evaluate

MOVES = {"L": -1, "S": 0, "R": 1}
BLANK_TOKENS = {"_", "blank", "B", "b", None}
T_CAP = 8
N_CAP = 4


def _symbol(a: Union[int, str, None]) -> int:
    if a in BLANK_TOKENS:
        return 0
    if a in (0, 1):
        return int(a)
    if a in ("0", "1"):
        return int(a)
    raise DomainError(f"unknown tape symbol {a!r}")


@dataclass(frozen=True)
class DtmSpec:
    """A deterministic machine over tape bits.

    ``delta`` maps ``(state, bit)`` to ``(state, bit, move)`` with ``move`` in
    ``{"L", "S", "R"}``; it must be total on the non-halting states.
    """

    states: Tuple[str, ...]
    delta: Mapping[Tuple[str, int], Tuple[str, int, str]]
    q0: str
    acc: str
    rej: str
    name: str = "dtm"

    def __post_init__(self) -> None:
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        sset = set(states)
        for q in (self.q0, self.acc, self.rej):
            if q not in sset:
                raise DomainError(f"state {q!r} not declared")
        if self.acc == self.rej:
            raise DomainError("accept and reject states must differ")
        table: Dict[Tuple[str, int], Tuple[str, int, str]] = {}
        for (q, a), (q2, a2, mv) in self.delta.items():
            key = (q, _symbol(a))
            val = (q2, _symbol(a2), mv)
            if q not in sset or q2 not in sset:
                raise DomainError(f"transition {key} -> {val} uses an undeclared state")
            if mv not in MOVES:
                raise DomainError(f"bad move {mv!r}")
            if key in table and table[key] != val:
                raise DomainError(f"conflicting transitions for {key} (blank is read as 0)")
            table[key] = val
        for q in (self.acc, self.rej):
            for a in (0, 1):
                got = table.get((q, a))
                if got is not None and got != (q, a, "S"):
                    raise DomainError(f"halting state {q!r} must be absorbing")
                table[(q, a)] = (q, a, "S")
        for q in states:
            for a in (0, 1):
                if (q, a) not in table:
                    raise DomainError(f"delta undefined on ({q!r}, {a})")
        object.__setattr__(self, "delta", table)

    def step(self, q: str, a: int) -> Tuple[str, int, str]:
        return self.delta[(q, a)]

    @classmethod
    def from_json(cls, data: Union[str, Mapping]) -> "DtmSpec":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            delta = {}
            for row in data["delta"]:
                q, a, q2, a2, mv = row
                delta[(str(q), _symbol(a))] = (str(q2), _symbol(a2), str(mv))
            return cls(
                states=tuple(str(q) for q in data["states"]),
                delta=delta,
                q0=str(data["q0"]),
                acc=str(data["acc"]),
                rej=str(data["rej"]),
                name=str(data.get("name", "dtm")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed DTM JSON: {exc}") from exc

    def to_json(self) -> dict:
        rows = [[q, a, q2, a2, mv] for (q, a), (q2, a2, mv) in sorted(self.delta.items())]
        return {"name": self.name, "states": list(self.states), "delta": rows, "q0": self.q0, "acc": self.acc, "rej": self.rej}


# ---------------------------------------------------------------------------
# Reference simulator


@dataclass(frozen=True)
class Config:
    state: str
    head: int
    tape: Tuple[int, ...]


def tape_width(n: int, T: int) -> int:
    return max(T + 1, n, 1)


def landing(i: int, move: str, width: int) -> int:
    j = i + MOVES[move]
    return i if j < 0 or j >= width else j


def simulate(spec: DtmSpec, x: Sequence[int], T: int) -> List[Config]:
    """Configurations at times ``0 .. T``."""
    W = tape_width(len(x), T)
    tape = [int(b) for b in x] + [0] * (W - len(x))
    q, h = spec.q0, 0
    run = [Config(q, h, tuple(tape))]
    for _ in range(T):
        q2, a2, mv = spec.step(q, tape[h])
        tape[h] = a2
        h = landing(h, mv, W)
        q = q2
        run.append(Config(q, h, tuple(tape)))
    return run


def accepts(spec: DtmSpec, x: Sequence[int], T: int) -> bool:
    return simulate(spec, x, T)[-1].state == spec.acc


# ---------------------------------------------------------------------------
# Tableau layout


@dataclass
class Tableau:
    """Variable layout of the time x tape grid."""

    n: int
    T: int
    W: int
    states: Tuple[str, ...]
    x: List[int] = field(default_factory=list)
    s: List[Dict[str, int]] = field(default_factory=list)
    h: List[List[int]] = field(default_factory=list)
    b: List[List[int]] = field(default_factory=list)
    y: Dict[Tuple[int, int, str], int] = field(default_factory=dict)
    names: List[str] = field(default_factory=list)
    where: List[Tuple[str, Optional[int], Optional[int]]] = field(default_factory=list)

    @classmethod
    def layout(cls, n: int, T: int, states: Sequence[str]) -> "Tableau":
        tb = cls(n, T, tape_width(n, T), tuple(states))

        def new(name: str, kind: str, t: Optional[int], i: Optional[int]) -> int:
            tb.names.append(name)
            tb.where.append((kind, t, i))
            return len(tb.names) - 1

        tb.x = [new(f"x{i}", "x", None, i) for i in range(n)]
        for t in range(T + 1):
            tb.s.append({q: new(f"s[{t},{q}]", "s", t, None) for q in states})
            tb.h.append([new(f"h[{t},{i}]", "h", t, i) for i in range(tb.W)])
            tb.b.append([new(f"b[{t},{i}]", "b", t, i) for i in range(tb.W)])
            if t < T:
                for i in range(tb.W):
                    for q in states:
                        tb.y[(t, i, q)] = new(f"y[{t},{i},{q}]", "y", t, i)
        return tb

    @property
    def nvars(self) -> int:
        return len(self.names)

    def point(self, x: Sequence[int], run: Sequence[Config]) -> List[int]:
        """Full cube point encoding input ``x`` and the run ``run``."""
        a = [0] * self.nvars
        for i, v in enumerate(x):
            a[self.x[i]] = int(v)
        for t, cfg in enumerate(run):
            a[self.s[t][cfg.state]] = 1
            a[self.h[t][cfg.head]] = 1
            for i, v in enumerate(cfg.tape):
                a[self.b[t][i]] = v
            if t < self.T:
                a[self.y[(t, cfg.head, cfg.state)]] = 1
        return a


@dataclass(frozen=True)
class Constraint:
    """One local constraint ``C = 0`` anchored at a tableau cell."""

    kind: str
    anchor: Tuple[int, int]
    poly: SparsePoly

    def support(self) -> List[int]:
        return self.poly.variables()


@dataclass
class CompiledDtm:
    spec: DtmSpec
    tableau: Tableau
    constraints: List[Constraint]
    poly: SparsePoly
    square_bound: int

    def accepts_point(self, a: Sequence[int]) -> bool:
        """The corrected acceptance predicate: ``P~(a) == 1``."""
        return evaluate(self.poly, a) == 1

    def violations(self, a: Sequence[int]) -> int:
        return sum(1 for c in self.constraints if evaluate(c.poly, a) != 0)


def _lit(var: int, bit: int, nv: int, ctx: FieldCtx) -> SparsePoly:
    """``[z == bit]`` as a polynomial."""
    z = SparsePoly.var(var, nv, ctx)
    return z if bit == 1 else 1 - z


def compile_dtm(
    spec: DtmSpec,
    n: int,
    T: int,
    ctx: FieldCtx = DEFAULT_FIELD,
    aggregate: bool = True,
) -> CompiledDtm:
    """Emit the local constraints and the aggregate ``P~ = 1 - sum C^2``."""
    if T < 0 or n < 0:
        raise DomainError("n and T must be non-negative")
    if T > T_CAP or n > N_CAP:
        raise SizeError(f"compile_dtm is capped at T <= {T_CAP}, n <= {N_CAP}")
    tb = Tableau.layout(n, T, spec.states)
    nv, W = tb.nvars, tb.W
    V = lambda i: SparsePoly.var(i, nv, ctx)  # noqa: E731
    one = SparsePoly.constant(1, nv, ctx)
    cons: List[Constraint] = []

    def add(kind: str, anchor: Tuple[int, int], p: SparsePoly) -> None:
        cons.append(Constraint(kind, anchor, p))

    # Booleanity
    for var, (kind, t, i) in enumerate(tb.where):
        z = V(var)
        add("bool", (t if t is not None else 0, i if i is not None else 0), z * (one - z))
    # state one-hot
    for t in range(T + 1):
        acc = -one
        for q in spec.states:
            acc = acc + V(tb.s[t][q])
        add("state_onehot", (t, 0), acc)
    # initial configuration
    add("init_state", (0, 0), one - V(tb.s[0][spec.q0]))
    add("init_head", (0, 0), one - V(tb.h[0][0]))
    for i in range(1, W):
        add("init_head", (0, i), V(tb.h[0][i]))
    for i in range(W):
        if i < n:
            add("init_tape", (0, i), V(tb.b[0][i]) - V(tb.x[i]))
        else:
            add("init_tape", (0, i), V(tb.b[0][i]))
    # auxiliary products and transitions
    for t in range(T):
        for i in range(W):
            for q in spec.states:
                y = V(tb.y[(t, i, q)])
                add("aux", (t, i), y - V(tb.s[t][q]) * V(tb.h[t][i]))
                for a in (0, 1):
                    q2, a2, mv = spec.step(q, a)
                    guard = y * _lit(tb.b[t][i], a, nv, ctx)
                    j = landing(i, mv, W)
                    add("trans_state", (t, i), guard * (one - V(tb.s[t + 1][q2])))
                    add("trans_write", (t, i), guard * (one - _lit(tb.b[t + 1][i], a2, nv, ctx)))
                    add("trans_head", (t, i), guard * (one - V(tb.h[t + 1][j])))
        for i in range(W):
            add("frame", (t, i), (one - V(tb.h[t][i])) * (V(tb.b[t + 1][i]) - V(tb.b[t][i])))
        for j in range(W):
            land = SparsePoly.zero(nv, ctx)
            for i in (j - 1, j, j + 1):
                if not 0 <= i < W:
                    continue
                for q in spec.states:
                    for a in (0, 1):
                        _, _, mv = spec.step(q, a)
                        if landing(i, mv, W) == j:
                            land = land + V(tb.y[(t, i, q)]) * _lit(tb.b[t][i], a, nv, ctx)
            add("head_source", (t, j), V(tb.h[t + 1][j]) * (one - land))
    add("accept", (T, 0), one - V(tb.s[T][spec.acc]))

    bound = sum(_max_abs_on_cube(c.poly, ctx) ** 2 for c in cons)
    if bound >= ctx.modulus:
        raise DomainError(f"sum of squared constraint bounds {bound} >= modulus {ctx.modulus}; results could wrap")
    poly = one
    if aggregate:
        acc_terms: Dict = {}
        for c in cons:
            sq = c.poly * c.poly
            for m, v in sq.terms.items():
                acc_terms[m] = (acc_terms.get(m, 0) - v) % ctx.modulus
        acc_terms[()] = (acc_terms.get((), 0) + 1) % ctx.modulus
        poly = SparsePoly.from_terms(nv, acc_terms, ctx)
    return CompiledDtm(spec, tb, cons, poly, bound)


def _max_abs_on_cube(p: SparsePoly, ctx: FieldCtx) -> int:
    """Crude bound on ``|p|`` over the cube: sum of |signed coefficients|."""
    return sum(abs(ctx.signed(c)) for _, c in p.terms.items())


def locality_radius(compiled: CompiledDtm, constraint: Constraint) -> Tuple[int, int]:
    """``(time spread, tape spread)`` of a constraint's support around its anchor."""
    t0, i0 = constraint.anchor
    dt = di = 0
    for v in constraint.support():
        kind, t, i = compiled.tableau.where[v]
        if t is not None:
            dt = max(dt, abs(t - t0), 0)
        if i is not None:
            di = max(di, abs(i - i0))
    return dt, di


# ---------------------------------------------------------------------------
# Exhaustive solution enumeration


def solutions(compiled: CompiledDtm, limit: Optional[int] = None) -> List[Tuple[int, ...]]:
    """All cube points where every constraint vanishes (equivalently ``P~ = 1``).

    Backtracking assigns variables in index order and checks each constraint
    as soon as its largest variable is set, so the search covers the whole
    cube without visiting it point by point.
    """
    nv = compiled.tableau.nvars
    by_last: Dict[int, List[List[Tuple[int, Tuple[Tuple[int, int], ...]]]]] = {}
    mod = compiled.poly.ctx.modulus
    for c in compiled.constraints:
        sup = c.support()
        if not sup:
            if c.poly.coefficient(()):
                return []
            continue
        by_last.setdefault(sup[-1], []).append([(coef, tuple(m)) for m, coef in c.poly.terms.items()])
    a = [0] * nv
    out: List[Tuple[int, ...]] = []

    def ok(var: int) -> bool:
        for terms in by_last.get(var, ()):
            tot = 0
            for coef, mono in terms:
                if all(a[i] for i, _ in mono):
                    tot += coef
            if tot % mod:
                return False
        return True

    def go(var: int) -> bool:
        if var == nv:
            out.append(tuple(a))
            return limit is not None and len(out) >= limit
        for bit in (0, 1):
            a[var] = bit
            if ok(var) and go(var + 1):
                return True
        a[var] = 0
        return False

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, nv + 1000))
    try:
        go(0)
    finally:
        sys.setrecursionlimit(old)
    return out


# ---------------------------------------------------------------------------
# Example machines


def _spec(name: str, states: Sequence[str], rows: Iterable[Tuple[str, int, str, int, str]], q0: str = "q0") -> DtmSpec:
    return DtmSpec(tuple(states), {(q, a): (q2, a2, mv) for q, a, q2, a2, mv in rows}, q0, "acc", "rej", name)


def first_bit_one() -> DtmSpec:
    """Accept iff ``x_0 = 1``."""
    return _spec("first_bit_one", ["q0", "acc", "rej"], [("q0", 0, "rej", 0, "S"), ("q0", 1, "acc", 1, "S")])


def one_of_first_two() -> DtmSpec:
    """Accept iff ``x_0 = 1`` or ``x_1 = 1`` (reads right)."""
    return _spec(
        "one_of_first_two",
        ["q0", "q1", "acc", "rej"],
        [("q0", 1, "acc", 1, "S"), ("q0", 0, "q1", 0, "R"), ("q1", 1, "acc", 1, "S"), ("q1", 0, "rej", 0, "S")],
    )


def flip_and_check() -> DtmSpec:
    """Complement ``x_0``, step right and back, accept iff the cell now holds 1."""
    return _spec(
        "flip_and_check",
        ["q0", "q1", "q2", "acc", "rej"],
        [
            ("q0", 0, "q1", 1, "R"),
            ("q0", 1, "q1", 0, "R"),
            ("q1", 0, "q2", 0, "L"),
            ("q1", 1, "q2", 1, "L"),
            ("q2", 1, "acc", 1, "S"),
            ("q2", 0, "rej", 0, "S"),
        ],
    )


def parity_machine(n: int) -> DtmSpec:
    """Accept iff the first ``n`` bits have odd parity; states count the position."""
    states = [f"p{k}_{par}" for k in range(n + 1) for par in (0, 1)] + ["acc", "rej"]
    rows = []
    for k in range(n):
        for par in (0, 1):
            for a in (0, 1):
                rows.append((f"p{k}_{par}", a, f"p{k + 1}_{par ^ a}", a, "R"))
    for par in (0, 1):
        for a in (0, 1):
            rows.append((f"p{n}_{par}", a, "acc" if par else "rej", a, "S"))
    return _spec(f"parity_{n}", states, rows, q0="p0_0")


EXAMPLE_MACHINES = {
    "first_bit_one": first_bit_one,
    "one_of_first_two": one_of_first_two,
    "flip_and_check": flip_and_check,
}
