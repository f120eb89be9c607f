"""RAW / WEAK / FULL canonicalization ablation on local CNF windows.

Each seed builds a gate-level Tseitin encoding of a random 3-CNF, fixes
most input variables with a seeded restriction, cuts a radius-1 window
around the lowest-indexed live variable and measures the SPDP rank of the
window's violation-sum polynomial in the Boolean ambient:

* RAW keeps the window's variables in their original order,
* WEAK renames them by first occurrence,
* FULL identifies variables that share a local profile signature.
"""

from __future__ import annotations

import csv
import io
import math
import re
import statistics
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..errors import DomainError
from ..ffpoly import DEFAULT_FIELD, FieldCtx, SparsePoly
from ..spdp import SpdpParams, build_matrix
from ..workloads import Clause, CnfFormula, tseitin_random3
from ..arithmetizer.decision_tree import Restriction

REGIMES = ("RAW", "WEAK", "FULL")
CSV_FIELDS = ("family", "regime", "n", "L", "P", "cols", "rank", "ratio", "seed")
DEFAULT_KAPPA = 1
DEFAULT_ELL = 0
_FAMILY_RE = re.compile(r"^tseitin_rand3_n(\d+)$")


@dataclass(frozen=True)
class AblationRecord:
    family: str
    regime: str
    n: int
    L: int
    P: int
    cols: int
    rank: int
    ratio: float
    seed: int

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if not 0 <= self.rank <= max(self.cols, 0) or not 0.0 <= self.ratio <= 1.0:
            raise DomainError(f"inconsistent record rank={self.rank} cols={self.cols} ratio={self.ratio}")


@dataclass(frozen=True)
class AblationError:
    family: str
    regime: str
    seed: int
    message: str


@dataclass
class AblationRun:
    records: List[AblationRecord] = field(default_factory=list)
    errors: List[AblationError] = field(default_factory=list)
    kappa: int = DEFAULT_KAPPA
    ell: int = DEFAULT_ELL


# ---------------------------------------------------------------------------
# Instance pipeline


@dataclass(frozen=True)
class FamilySpec:
    name: str
    n: int
    clause_factor: int = 2

    @property
    def m_clauses(self) -> int:
        return self.clause_factor * self.n


def parse_family(name: str) -> FamilySpec:
    m = _FAMILY_RE.match(name)
    if not m:
        raise DomainError(f"unknown family {name!r} (expected tseitin_rand3_n<N>)")
    n = int(m.group(1))
    if n < 3:
        raise DomainError("family needs at least 3 inputs")
    return FamilySpec(name, n)


def simplify(phi: CnfFormula, fixed: Dict[int, int]) -> List[Clause]:
    """Drop satisfied clauses and falsified literals; empty clauses are kept."""
    out = []
    for c in phi.clauses:
        keep = []
        sat = False
        for v, pos in c:
            if v in fixed:
                if bool(fixed[v]) == pos:
                    sat = True
                    break
            else:
                keep.append((v, pos))
        if not sat:
            out.append(tuple(keep))
    return out


def local_window(clauses: Sequence[Clause]) -> List[Clause]:
    """Clauses on the lowest-indexed live variable plus every clause sharing a variable with them."""
    live = sorted({v for c in clauses for v, _ in c})
    if not live:
        return []
    anchor = live[0]
    core = [j for j, c in enumerate(clauses) if any(v == anchor for v, _ in c)]
    near = {v for j in core for v, _ in clauses[j]}
    chosen = [j for j, c in enumerate(clauses) if any(v in near for v, _ in c)]
    return [clauses[j] for j in chosen]


def profile_signature(v: int, clauses: Sequence[Clause]) -> Tuple[Tuple[int, int, int], ...]:
    """Occurrence counts of ``v`` by (clause width, polarity)."""
    counts: Dict[Tuple[int, int], int] = {}
    for c in clauses:
        for u, pos in c:
            if u == v:
                key = (len(c), int(pos))
                counts[key] = counts.get(key, 0) + 1
    return tuple(sorted((w, p, k) for (w, p), k in counts.items()))


def violation_poly(clauses: Sequence[Clause], nvars: int, ctx: FieldCtx = DEFAULT_FIELD) -> SparsePoly:
    """``sum_C prod_{l in C} [l is false]``, reduced multilinear (repeated variables collapse)."""
    total = SparsePoly.zero(nvars, ctx)
    for c in clauses:
        term = SparsePoly.constant(1, nvars, ctx)
        for v, pos in c:
            x = SparsePoly.var(v, nvars, ctx)
            term = term.mul(1 - x if pos else x, reduce=True)
        total = total + term
    return total


def rename_clauses(clauses: Sequence[Clause], mapping: Dict[int, int]) -> List[Clause]:
    return [tuple((mapping[v], pos) for v, pos in c) for c in clauses]


def ambient_cols(nvars: int, deg: int, kappa: int, ell: int) -> int:
    """Dimension of the multilinear column space of degree ``<= max(0, deg - kappa + ell)``."""
    D = max(0, deg - kappa + ell)
    return sum(comb(nvars, d) for d in range(min(D, nvars) + 1))


@dataclass
class Window:
    clauses: List[Clause]
    live: List[int]
    profiles: Dict[int, Tuple]

    @property
    def L(self) -> int:
        return len(self.live)

    @property
    def P(self) -> int:
        return len(set(self.profiles.values()))


def build_window(spec: FamilySpec, seed: int) -> Window:
    phi, n_inputs = tseitin_random3(spec.n, spec.m_clauses, seed)
    rho = Restriction.from_seed(n_inputs, 1.0 / math.sqrt(n_inputs), seed + 7919)
    clauses = simplify(phi, rho.as_map())
    win = [c for c in local_window(clauses) if c]
    live = sorted({v for c in win for v, _ in c})
    profiles = {v: profile_signature(v, win) for v in live}
    return Window(win, live, profiles)


def regime_poly(win: Window, regime: str, ctx: FieldCtx = DEFAULT_FIELD) -> Tuple[SparsePoly, int]:
    """Violation polynomial of the window under a regime, and its variable count."""
    if regime == "RAW":
        mapping = {v: k for k, v in enumerate(win.live)}
    elif regime == "WEAK":
        mapping = {}
        for c in win.clauses:
            for v, _ in c:
                if v not in mapping:
                    mapping[v] = len(mapping)
    elif regime == "FULL":
        types = sorted(set(win.profiles.values()))
        tid = {t: k for k, t in enumerate(types)}
        mapping = {v: tid[win.profiles[v]] for v in win.live}
    else:
        raise DomainError(f"unknown regime {regime!r}")
    nv = len(set(mapping.values()))
    return violation_poly(rename_clauses(win.clauses, mapping), nv, ctx), nv


def measure(win: Window, regime: str, kappa: int, ell: int, ctx: FieldCtx = DEFAULT_FIELD) -> Tuple[int, int, int]:
    """``(cols, rank, rows)`` for one regime."""
    poly, nv = regime_poly(win, regime, ctx)
    if nv == 0 or poly.is_zero():
        return ambient_cols(nv, 0, kappa, ell), 0, 0
    M = build_matrix(poly, SpdpParams(kappa, ell, ambient="boolean"))
    cols = ambient_cols(nv, poly.degree(), kappa, ell)
    r = M.rank()
    if r > min(len(M.rows), cols):
        raise AssertionError("rank exceeds matrix dimensions")
    return cols, r, len(M.rows)


# ---------------------------------------------------------------------------
# Runner and reports


def run_ablation(
    family: str,
    regimes: Sequence[str] = REGIMES,
    seeds: Iterable[int] = range(10),
    kappa: int = DEFAULT_KAPPA,
    ell: int = DEFAULT_ELL,
    ctx: FieldCtx = DEFAULT_FIELD,
) -> AblationRun:
    """One record per (seed, regime); failures become error entries and the run continues."""
    for r in regimes:
        if r not in REGIMES:
            raise DomainError(f"unknown regime {r!r}")
    spec = parse_family(family)
    run = AblationRun(kappa=kappa, ell=ell)
    if not regimes:
        return run
    for seed in seeds:
        try:
            win = build_window(spec, seed)
        except Exception as exc:  # generator failure: record and move on
            run.errors.extend(AblationError(family, r, seed, f"{type(exc).__name__}: {exc}") for r in regimes)
            continue
        for regime in regimes:
            try:
                cols, rank, _ = measure(win, regime, kappa, ell, ctx)
                L = win.L if regime != "FULL" else win.P
                ratio = rank / cols if cols else 0.0
                run.records.append(AblationRecord(family, regime, spec.n, L, win.P, cols, rank, ratio, seed))
            except Exception as exc:
                run.errors.append(AblationError(family, regime, seed, f"{type(exc).__name__}: {exc}"))
    order = {r: k for k, r in enumerate(REGIMES)}
    run.records.sort(key=lambda rec: (rec.family, order[rec.regime], rec.seed))
    return run


def emergence_score(records: Sequence[AblationRecord], tau: float = 0.2) -> float:
    """Fraction of RAW records with ``rank / cols <= tau``."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError("tau must lie in [0, 1]")
    raw = [r for r in records if r.regime == "RAW"]
    if not raw:
        raise DomainError("emergence score undefined without RAW records")
    return sum(1 for r in raw if r.ratio <= tau) / len(raw)


def write_csv(records: Sequence[AblationRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = asdict(r)
        row["ratio"] = repr(r.ratio)
        w.writerow(row)
    return buf.getvalue()


def read_csv(text: str) -> List[AblationRecord]:
    rd = csv.DictReader(io.StringIO(text))
    if tuple(rd.fieldnames or ()) != CSV_FIELDS:
        raise DomainError(f"unexpected CSV header {rd.fieldnames}")
    out = []
    for row in rd:
        out.append(
            AblationRecord(
                family=row["family"],
                regime=row["regime"],
                n=int(row["n"]),
                L=int(row["L"]),
                P=int(row["P"]),
                cols=int(row["cols"]),
                rank=int(row["rank"]),
                ratio=float(row["ratio"]),
                seed=int(row["seed"]),
            )
        )
    return out


@dataclass
class SummaryRow:
    family: str
    regime: str
    n: int
    stats: Dict[str, Tuple[float, float]]
    emergence: Optional[float]


def _mean_sd(xs: Sequence[float]) -> Tuple[float, float]:
    return (statistics.fmean(xs), statistics.stdev(xs) if len(xs) > 1 else 0.0)


def summarize(records: Sequence[AblationRecord], tau: float = 0.2) -> List[SummaryRow]:
    groups: Dict[Tuple[str, str], List[AblationRecord]] = {}
    for r in records:
        groups.setdefault((r.family, r.regime), []).append(r)
    order = {r: k for k, r in enumerate(REGIMES)}
    out = []
    for (fam, reg), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        stats = {k: _mean_sd([getattr(r, k) for r in rs]) for k in ("L", "P", "cols", "rank", "ratio")}
        em = sum(1 for r in rs if r.ratio <= tau) / len(rs)
        out.append(SummaryRow(fam, reg, rs[0].n, stats, em))
    return out


def format_summary(rows: Sequence[SummaryRow]) -> str:
    lines = [f"{'family':<22}{'regime':<7}{'n':>5}{'L':>13}{'P':>13}{'cols':>10}{'rank':>13}{'ratio':>8}{'E0.2':>6}"]
    for r in rows:
        s = r.stats
        lines.append(
            f"{r.family:<22}{r.regime:<7}{r.n:>5}"
            f"{s['L'][0]:>7.1f}±{s['L'][1]:<5.1f}{s['P'][0]:>7.1f}±{s['P'][1]:<5.1f}"
            f"{s['cols'][0]:>10.1f}{s['rank'][0]:>7.1f}±{s['rank'][1]:<5.1f}{s['ratio'][0]:>8.3f}{r.emergence:>6.2f}"
        )
    return "\n".join(lines)


def to_latex(rows: Sequence[SummaryRow]) -> str:
    out = [
        r"\begin{tabular}{llrrrrrrr}",
        r"\toprule",
        r"Family & Regime & $n$ & $L$ & $P$ & cols & $r$ & $r/\mathrm{cols}$ & $E_{0.2}$ \\",
        r"\midrule",
    ]
    for r in rows:
        s = r.stats
        fam = r.family.replace("_", r"\_")
        out.append(
            f"{fam} & {r.regime} & {r.n} & {s['L'][0]:.1f}$\\pm${s['L'][1]:.1f} & {s['P'][0]:.1f}$\\pm${s['P'][1]:.1f} & "
            f"{s['cols'][0]:.0f} & {s['rank'][0]:.1f}$\\pm${s['rank'][1]:.1f} & {s['ratio'][0]:.3f} & {r.emergence:.2f} \\\\"
        )
    out += [r"\bottomrule", r"\end{tabular}"]
    return "\n".join(out) + "\n"
