"""Identity-minor certificates for SPDP rank lower bounds.

A certificate names rows by their ``(S, u)`` descriptors and columns by
monomials, so it stays meaningful whatever column order a particular
matrix build uses.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import CertificateInvalid, CertificateMismatch, DomainError
from .ffpoly import DEFAULT_FIELD, ONE, FieldCtx, Monomial, SparsePoly, derive, derive_multi, shift
from .spdp import SpdpMatrix, SpdpParams, build_matrix, submatrix_rank
from .workloads import CnfFormula, CoupledSheet, build_coupled_sheet, matrix_var, permanent

Row = Tuple[Tuple[int, ...], Monomial]


@dataclass
class MinorCertificate:
    """Rows, columns and the expected diagonal of a claimed identity minor."""

    kind: str
    rows: List[Row]
    cols: List[Monomial]
    claimed_size: int
    field: FieldCtx
    diagonal: List[int] = field(default_factory=list)
    verified: bool = False

    def __post_init__(self) -> None:
        if not (len(self.rows) == len(self.cols) == self.claimed_size):
            raise CertificateInvalid(
                f"certificate has {len(self.rows)} rows, {len(self.cols)} cols, claimed size {self.claimed_size}"
            )

    @property
    def size(self) -> int:
        return self.claimed_size

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rows": [{"S": list(S), "u": [[i, e] for i, e in u]} for S, u in self.rows],
            "cols": [[[i, e] for i, e in m] for m in self.cols],
            "size": self.claimed_size,
            "modulus": self.field.modulus,
            "diagonal": list(self.diagonal),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Union[str, Mapping]) -> "MinorCertificate":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            rows = [(tuple(int(i) for i in r["S"]), Monomial((int(i), int(e)) for i, e in r["u"])) for r in data["rows"]]
            cols = [Monomial((int(i), int(e)) for i, e in c) for c in data["cols"]]
            return cls(
                kind=str(data["kind"]),
                rows=rows,
                cols=cols,
                claimed_size=int(data["size"]),
                field=FieldCtx(int(data["modulus"])),
                diagonal=[int(v) for v in data.get("diagonal", [])],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed certificate JSON: {exc}") from exc

    def entries_from(self, p: SparsePoly, derivatives: str = "set", boolean: bool = False) -> List[List[int]]:
        """The ``k x k`` block ``[col] (u * d_S p)`` computed directly from ``p``."""
        q = p.multilinear() if boolean else p
        out = []
        for S, u in self.rows:
            d = derive_multi(q, S) if derivatives == "multi" else derive(q, S)
            r = shift(d, u, reduce=boolean)
            out.append([r.coefficient(c) for c in self.cols])
        return out

    def check_block(self, block: Sequence[Sequence[int]]) -> bool:
        """True iff ``block`` is diagonal with the expected nonzero diagonal."""
        p = self.field.modulus
        for i, row in enumerate(block):
            for j, v in enumerate(row):
                v %= p
                if i == j:
                    want = self.diagonal[i] % p if self.diagonal else None
                    if v == 0 or (want is not None and v != want):
                        return False
                elif v:
                    return False
        return True


def _raise_unless(ok: bool, msg: str) -> None:
    if not ok:
        raise CertificateInvalid(msg)


# ---------------------------------------------------------------------------
# Permanent


def diagonal_rows(n: int, kappa: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Pairs ``(S, S_diag)`` with ``S`` a kappa-subset of ``range(n)``."""
    return [(S, tuple(matrix_var(i, i, n) for i in S)) for S in itertools.combinations(range(n), kappa)]


def witness_monomial(n: int, S: Sequence[int]) -> Monomial:
    """``m_S = prod_{i not in S} x_{i,i}``."""
    Sset = set(S)
    return Monomial.from_support(matrix_var(i, i, n) for i in range(n) if i not in Sset)


def perm_minor(n: int, kappa: int, ctx: FieldCtx = DEFAULT_FIELD) -> MinorCertificate:
    """Diagonal identity minor of ``M_{kappa,0}(perm_n)``; verified before it is returned."""
    if not 0 <= kappa <= n:
        raise DomainError(f"need 0 <= kappa <= n, got kappa={kappa}, n={n}")
    if n > 6:
        raise DomainError("perm_minor supports n <= 6")
    pairs = diagonal_rows(n, kappa)
    cert = MinorCertificate(
        kind="perm",
        rows=[(Sd, ONE) for _, Sd in pairs],
        cols=[witness_monomial(n, S) for S, _ in pairs],
        claimed_size=len(pairs),
        field=ctx,
        diagonal=[1] * len(pairs),
    )
    block = cert.entries_from(permanent(n, ctx))
    _raise_unless(cert.check_block(block), f"perm_minor(n={n}, kappa={kappa}) is not an identity block")
    cert.verified = True
    return cert


def is_witness_shape(m: Monomial, n: int, kappa: int) -> bool:
    """Witness columns have degree ``n - kappa`` and use only diagonal variables."""
    diag = {matrix_var(i, i, n) for i in range(n)}
    return m.degree == n - kappa and m.is_multilinear and all(i in diag for i in m.support)


@dataclass
class GodMove:
    """Coordinate projection onto witness columns and the resulting block."""

    n: int
    kappa: int
    matrix: SpdpMatrix
    witness_cols: List[int]
    canonical_rows: List[int]
    block: List[List[int]]
    is_identity: bool

    def project_vector(self, vec: Mapping[Monomial, int]) -> List[int]:
        """Image of a coefficient vector (keyed by monomial) under the projection."""
        cols = [self.matrix.cols[j] for j in self.witness_cols]
        return [vec.get(c, 0) for c in cols]


def god_move_projection(n: int, kappa: int, ctx: FieldCtx = DEFAULT_FIELD) -> GodMove:
    """Project ``M_{kappa,0}(perm_n)`` onto the witness columns and check the canonical block is ``I``."""
    if not 0 <= kappa <= n:
        raise DomainError(f"need 0 <= kappa <= n, got kappa={kappa}, n={n}")
    M = build_matrix(permanent(n, ctx), SpdpParams(kappa, 0))
    cidx = M.col_index()
    ridx = M.row_index()
    pairs = diagonal_rows(n, kappa)
    rows, cols = [], []
    for S, Sd in pairs:
        key = (Sd, ONE)
        w = witness_monomial(n, S)
        if key not in ridx or w not in cidx:
            raise CertificateInvalid(f"canonical row {Sd} or witness {w} missing from the matrix")
        rows.append(ridx[key])
        cols.append(cidx[w])
    # the projection keeps exactly the witness-shaped columns, in canonical order
    kept = [cidx[witness_monomial(n, S)] for S, _ in pairs]
    extra = [j for j, m in enumerate(M.cols) if is_witness_shape(m, n, kappa) and j not in set(kept)]
    _raise_unless(not extra, "projection found witness-shaped columns outside the canonical family")
    block = [[M.entry(r, c) for c in kept] for r in rows]
    k = len(pairs)
    ident = all(block[i][j] % ctx.modulus == (1 if i == j else 0) for i in range(k) for j in range(k))
    _raise_unless(ident, f"projected block for perm_{n}, kappa={kappa} is not the identity")
    for s in range(k):
        _raise_unless(farkas_check(block, s, ctx.modulus), f"Farkas residual nonzero at row {s}")
    return GodMove(n, kappa, M, kept, rows, block, ident)


def farkas_check(A: Sequence[Sequence[int]], S: int, modulus: int = DEFAULT_FIELD.modulus, col: Optional[int] = None) -> bool:
    """Check ``A e_col = e_S`` and ``A^T (A e_col - e_S) = 0`` exactly mod ``modulus``.

    ``col`` defaults to ``S`` (the witness of row ``S`` sits in column ``S``).
    """
    c = S if col is None else col
    nrows = len(A)
    if not 0 <= S < nrows or (nrows and not 0 <= c < len(A[0])):
        raise DomainError("farkas_check index out of range")
    Av = [A[i][c] % modulus for i in range(nrows)]
    resid = [(Av[i] - (1 if i == S else 0)) % modulus for i in range(nrows)]
    if any(resid):
        return False
    ncols = len(A[0]) if nrows else 0
    kkt = [sum(A[i][j] * resid[i] for i in range(nrows)) % modulus for j in range(ncols)]
    return not any(kkt)


# ---------------------------------------------------------------------------
# Coupled sheet


def coupled_minor(
    phi: Union[CnfFormula, CoupledSheet],
    kappa: int,
    ctx: FieldCtx = DEFAULT_FIELD,
) -> MinorCertificate:
    """Tag-monomial identity minor of ``M_{kappa,ell}(Q_x)``: rows ``d_{z_S}``, columns ``tau_S``.

    Entries are read from the z-free slice of each selector partial, which
    avoids expanding the whole sheet.
    """
    sheet = phi if isinstance(phi, CoupledSheet) else build_coupled_sheet(phi, ctx)
    ctx = sheet.ctx
    m = sheet.m
    if not 0 <= kappa <= m:
        raise DomainError(f"need 0 <= kappa <= m={m}, got {kappa}")
    subsets = list(itertools.combinations(range(m), kappa))
    cols = [sheet.tag_monomial(S) for S in subsets]
    sign = (-1) ** kappa % ctx.modulus
    cert = MinorCertificate(
        kind="coupled",
        rows=[(sheet.selector_set(S), ONE) for S in subsets],
        cols=cols,
        claimed_size=len(subsets),
        field=ctx,
        diagonal=[sign] * len(subsets),
    )
    block = coupled_block(sheet, subsets, cols)
    _raise_unless(cert.check_block(block), f"coupled minor (m={m}, kappa={kappa}) is not diagonal with (-1)^kappa")
    cert.verified = True
    return cert


def coupled_block(sheet: CoupledSheet, subsets: Sequence[Tuple[int, ...]], cols: Sequence[Monomial]) -> List[List[int]]:
    """``[tau_T] d_{z_S} Q_x`` for all pairs, via the z-free slices."""
    out = []
    for S in subsets:
        slice_ = sheet.z_free_partial(S)
        out.append([slice_.coefficient(c) for c in cols])
    return out


# ---------------------------------------------------------------------------
# Packing and rank checks


def greedy_disjoint_pack(phi: CnfFormula) -> List[int]:
    """Clause indices chosen greedily in input order so no two share a variable."""
    used: set = set()
    chosen = []
    for j, c in enumerate(phi.clauses):
        vs = {v for v, _ in c}
        if vs and not (vs & used):
            chosen.append(j)
            used |= vs
    return chosen


def packing_bound(phi: CnfFormula) -> float:
    """``m / (w * Delta)``: each picked clause blocks at most ``w * Delta`` clauses."""
    delta = phi.max_occurrence()
    w = max(phi.width, 1)
    return phi.m / (w * delta) if delta else 0.0


def locate(M: SpdpMatrix, cert: MinorCertificate) -> Tuple[List[int], List[int]]:
    ridx = M.row_index()
    cidx = M.col_index()
    rows, cols = [], []
    for key in cert.rows:
        if key not in ridx:
            raise CertificateMismatch(f"row {key} not in the matrix")
        rows.append(ridx[key])
    for c in cert.cols:
        if c not in cidx:
            raise CertificateMismatch(f"column {c} not in the matrix")
        cols.append(cidx[c])
    return rows, cols


def rank_lb_check(p: SparsePoly, params: SpdpParams, cert: MinorCertificate, matrix: Optional[SpdpMatrix] = None) -> bool:
    """True iff the certificate's submatrix of ``M(p)`` is invertible, i.e. ``gamma >= size``."""
    M = build_matrix(p, params) if matrix is None else matrix
    rows, cols = locate(M, cert)
    return submatrix_rank(M, rows, cols) == cert.claimed_size


def corrupt(cert: MinorCertificate, which: int = 0) -> MinorCertificate:
    """Copy of ``cert`` with column ``which + 1`` replaced by column ``which`` (negative control)."""
    if cert.claimed_size < 2:
        raise DomainError("corrupt needs a certificate of size >= 2")
    cols = list(cert.cols)
    cols[(which + 1) % len(cols)] = cols[which]
    return MinorCertificate(cert.kind, list(cert.rows), cols, cert.claimed_size, cert.field, list(cert.diagonal))
