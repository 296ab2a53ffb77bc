from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.exactlin import Mat, rank_kernel, rref, snf, solve, to_fraction


def int_matrices(max_rows=6, max_cols=6, lo=-9, hi=9):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r).map(lambda rows: Mat(rows))))


def determinantal_divisors(M: Mat) -> list[int]:
    """gcd of all k x k minors, k = 1..min(shape); the brute-force SNF oracle."""
    out = []
    for k in range(1, min(M.shape) + 1):
        g = 0
        for rows in combinations(range(M.rows), k):
            for cols in combinations(range(M.cols), k):
                g = gcd(g, int(M.submatrix(rows, cols).det()))
        if g == 0:
            break
        out.append(g)
    return out


def test_to_fraction_refuses_floats():
    assert to_fraction("3/6") == Fraction(1, 2)
    with pytest.raises(TypeError):
        to_fraction(0.5)


def test_snf_identity_and_zero():
    assert snf(Mat.identity(3)).S == Mat.identity(3)
    assert snf(Mat.zeros(2, 2)).S == Mat.zeros(2, 2)


def test_snf_example():
    r = snf(Mat([[2, 4], [6, 8]]))
    assert r.S == Mat.diag([2, 4])
    assert r.U @ Mat([[2, 4], [6, 8]]) @ r.V == r.S


def test_snf_rejects_fractions():
    with pytest.raises(ValueError):
        snf(Mat([["1/2"]]))


def test_rank_kernel_examples():
    assert rank_kernel(Mat.identity(3)) == (3, [])
    r, k = rank_kernel(Mat.zeros(2, 3))
    assert r == 0 and len(k) == 3
    r, k = rank_kernel(Mat([[1, 2], [2, 4]]))
    assert r == 1 and len(k) == 1
    v = k[0]
    assert v[0] * -1 == v[1] * 2


def test_solve_examples():
    assert solve(Mat.identity(2), [3, 4]) == (3, 4)
    assert solve(Mat([[1], [0]]), [0, 1]) is None
    assert solve(Mat([[2, 0], [0, 3]]), [1, 1]) == (Fraction(1, 2), Fraction(1, 3))
    with pytest.raises(ValueError):
        solve(Mat.identity(2), [1, 2, 3])


def test_rref_pivots():
    R, piv = rref(Mat([[0, 2, 4], [0, 1, 2]]))
    assert piv == [1]
    assert R.row(0) == (0, 1, 2)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_snf_certificate(M):
    r = snf(M)
    assert r.U @ M @ r.V == r.S
    assert abs(r.U.det()) == 1 and abs(r.V.det()) == 1
    d = r.invariant_factors
    assert all(x > 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    off = [(i, j) for i, j, _ in r.S.nonzero_entries() if i != j]
    assert not off
    assert len(d) == M.rank()


@settings(max_examples=80, deadline=None)
@given(int_matrices(4, 4, -6, 6))
def test_snf_matches_determinantal_divisors(M):
    d = snf(M).invariant_factors
    dk = determinantal_divisors(M)
    assert len(d) == len(dk)
    prod = 1
    for x, D in zip(d, dk):
        prod *= x
        assert prod == D


@settings(max_examples=100, deadline=None)
@given(int_matrices(5, 5))
def test_rank_nullity_and_kernel(M):
    r, kern = rank_kernel(M)
    assert r + len(kern) == M.cols
    for v in kern:
        assert all(x == 0 for x in M.apply(v))
    if kern:
        assert Mat.from_columns(kern, M.cols).rank() == len(kern)


@settings(max_examples=100, deadline=None)
@given(int_matrices(4, 4), st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_solve_reproduces_b(M, xs):
    b = M.apply(xs[:M.cols])
    x = solve(M, b)
    assert x is not None
    assert M.apply(x) == b


def test_json_roundtrip():
    M = Mat([[1, "1/2"], [0, -3]])
    assert M.to_json() == [["1", "1/2"], ["0", "-3"]]
    assert Mat.from_json(M.to_json()) == M
