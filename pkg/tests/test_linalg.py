from __future__ import annotations

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rank_gf, rank_qq
from spdplab.linalg import det_mod, matmul_mod, rank_mod, rank_sparse_rows, transpose

PRIMES = [2, 3, 5, 7, 101, 1_000_003, 2_147_483_647, 2**61 - 1]


@st.composite
def int_matrices(draw, max_rows=7, max_cols=7, lo=-4, hi=4):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[draw(st.integers(lo, hi)) for _ in range(c)] for _ in range(r)]


@settings(max_examples=400)
@given(int_matrices(), st.sampled_from(PRIMES))
def test_rank_mod_matches_sympy_gf(mat, p):
    assert rank_mod(mat, p) == rank_gf(mat, p)


@settings(max_examples=400)
@given(int_matrices(), st.sampled_from(PRIMES[:6]))
def test_dense_and_sparse_routes_agree(mat, p):
    rows = [{j: v for j, v in enumerate(r) if v} for r in mat]
    ncols = len(mat[0])
    dense = rank_sparse_rows(rows, ncols, p)
    sparse = rank_sparse_rows(rows, ncols, p, dense_limit=0)
    assert dense == sparse == rank_gf(mat, p)


@settings(max_examples=200)
@given(int_matrices())
def test_large_prime_rank_equals_rational_rank(mat):
    # entries are tiny, so no elimination pivot is divisible by a 61-bit prime
    assert rank_mod(mat, 2**61 - 1) == rank_qq(mat)


@settings(max_examples=300)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)), st.sampled_from(PRIMES[:6]))
def test_det_mod_matches_sympy(mat, p):
    assert det_mod(mat, p) == int(sympy.Matrix(mat).det()) % p


def test_empty_and_zero_rank():
    assert rank_sparse_rows([], 3, 7) == 0
    assert rank_sparse_rows([{}, {}], 0, 7) == 0
    assert rank_mod([[0, 0], [0, 0]], 5) == 0


def test_matmul_and_transpose():
    a = [[1, 2], [3, 4]]
    assert matmul_mod(a, [[1, 0], [0, 1]], 7) == [[1, 2], [3, 4]]
    assert matmul_mod(a, a, 5) == [[2, 0], [0, 2]]
    assert transpose(a) == [[1, 3], [2, 4]]
