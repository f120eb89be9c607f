from __future__ import annotations

import os
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from spdplab.ffpoly import FieldCtx, Monomial, SparsePoly  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SMALL_PRIMES = (2, 3, 5, 7, 101, 1_000_003)


@st.composite
def monomials(draw, nvars: int, max_deg: int = 3, multilinear: bool = False):
    k = draw(st.integers(0, min(max_deg, nvars) if multilinear else max_deg))
    if multilinear:
        idx = draw(st.lists(st.integers(0, nvars - 1), min_size=k, max_size=k, unique=True))
        return Monomial.from_support(idx)
    idx = draw(st.lists(st.integers(0, nvars - 1), min_size=k, max_size=k))
    return Monomial.from_indices(idx)


@st.composite
def polys(
    draw,
    min_vars: int = 1,
    max_vars: int = 4,
    max_terms: int = 5,
    max_deg: int = 3,
    multilinear: bool = False,
    prime: int = 1_000_003,
    nvars: int | None = None,
):
    n = nvars if nvars is not None else draw(st.integers(min_vars, max_vars))
    ctx = FieldCtx(prime)
    terms = draw(
        st.lists(
            st.tuples(monomials(n, max_deg, multilinear), st.integers(-3, 3).filter(bool)),
            min_size=0,
            max_size=max_terms,
        )
    )
    return SparsePoly.from_terms(n, terms, ctx)


@st.composite
def invertible_matrices(draw, k: int, prime: int):
    """Upper triangular with a nonzero diagonal times unit lower triangular, so always invertible mod ``prime``."""
    d = [draw(st.integers(1, prime - 1)) for _ in range(k)]
    U = [[d[i] if i == j else (draw(st.integers(0, prime - 1)) if j > i else 0) for j in range(k)] for i in range(k)]
    L = [[1 if i == j else (draw(st.integers(0, prime - 1)) if j < i else 0) for j in range(k)] for i in range(k)]
    return [[sum(U[i][t] * L[t][j] for t in range(k)) % prime for j in range(k)] for i in range(k)]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
