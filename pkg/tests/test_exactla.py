import itertools
from math import gcd

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from galcohom.exactla import (kernel_basis, prime_power, quotient_presentation, smith_normal_form, solve_linear,
                              valuation, xgcd)


def mat(rows):
    return np.array(rows, dtype=object)


def minors_gcd(A, k):
    A = [list(r) for r in A]
    g = 0
    for rs in itertools.combinations(range(len(A)), k):
        for cs in itertools.combinations(range(len(A[0])), k):
            sub = [[A[r][c] for c in cs] for r in rs]
            g = gcd(g, int(round(np.linalg.det(np.array(sub, dtype=float)))))
    return g


def test_xgcd_and_helpers():
    g, s, t = xgcd(240, 46)
    assert g == 2 and 240 * s + 46 * t == 2
    assert prime_power(8) == (2, 3)
    assert prime_power(12) is None
    assert valuation(48, 2) == 4


def test_snf_identity():
    s = smith_normal_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert s.invariant_factors == [1, 1, 1]


def test_snf_two_by_two():
    A = [[2, 4], [6, 8]]
    s = smith_normal_form(A)
    # d1 = gcd of entries, d1 d2 = gcd of 2x2 minors (up to sign)
    assert s.invariant_factors[0] == minors_gcd(A, 1) == 2
    assert s.invariant_factors[0] * s.invariant_factors[1] == abs(minors_gcd(A, 2)) == 8
    assert (mat(s.U).dot(mat(A)).dot(mat(s.V)) == mat(s.D)).all()


def test_snf_mod_four():
    s = smith_normal_form([[2]], modulus=4)
    assert s.D == [[2]]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.sampled_from([0, 4, 6, 8, 9]), st.data())
def test_snf_decomposition(r, c, n, data):
    A = [[data.draw(st.integers(-9, 9)) for _ in range(c)] for _ in range(r)]
    s = smith_normal_form(A, modulus=n)
    prod = mat(s.U).dot(mat(A)).dot(mat(s.V))
    D = mat(s.D)
    if n:
        prod, D = prod % n, D % n
    assert (prod == D).all()
    d = s.diagonal
    assert all(D[i, j] == 0 for i in range(r) for j in range(c) if i != j)
    for a, b in zip(d, d[1:]):
        if n:
            assert b % gcd(a, n) == 0
        else:
            assert (a == 0 and b == 0) or (a != 0 and b % a == 0)


def test_solve_examples():
    assert solve_linear(mat([[1, 0], [0, 1]]), [3, -5]) == [3, -5]
    assert solve_linear(mat([[2]]), [3]) is None
    x = solve_linear(mat([[2]]), [2], modulus=4)
    assert x is not None and (2 * x[0] - 2) % 4 == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.sampled_from([2, 4, 6]), st.data())
def test_solve_against_exhaustive_search(r, c, n, data):
    A = mat([[data.draw(st.integers(0, n - 1)) for _ in range(c)] for _ in range(r)])
    b = [data.draw(st.integers(0, n - 1)) for _ in range(r)]
    x = solve_linear(A, b, modulus=n)
    found = any(all(v == 0 for v in (A.dot(mat(list(y))) - mat(b)) % n)
                for y in itertools.product(range(n), repeat=c))
    if x is None:
        assert not found
    else:
        assert all(v == 0 for v in (A.dot(mat(x)) - mat(b)) % n)


def test_kernel_basis_is_kernel():
    A = mat([[1, 2, 3], [2, 4, 6]])
    K = kernel_basis(A, 0)
    assert K.shape[1] == 2
    assert (A.dot(K) == 0).all()


def test_quotient_examples():
    assert quotient_presentation(2, mat([[2, 0], [0, 2]])).invariant_factors == (2, 2)
    assert quotient_presentation(1, mat([[6]])).invariant_factors == (6,)
    P = quotient_presentation(2, mat([[2], [2]]), modulus=4)
    assert sorted(P.invariant_factors) == [2, 4]
    # exhaustive: (Z/4)^2 / <(2,2)> has 8 elements
    classes = {frozenset(((a + 2 * t) % 4, (b + 2 * t) % 4) for t in range(2))
               for a in range(4) for b in range(4)}
    assert len(classes) == P.order() == 8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.sampled_from([0, 4, 12]), st.data())
def test_reduce_lift_roundtrip(a, n, data):
    rels = mat([[data.draw(st.integers(-6, 6)) for _ in range(2)] for _ in range(a)])
    P = quotient_presentation(a, rels, modulus=n)
    coords = [data.draw(st.integers(0, 20)) for _ in P.invariant_factors]
    coords = P.canon(coords)
    assert P.reduce(P.lift(coords)) == coords
    v = [data.draw(st.integers(-20, 20)) for _ in range(a)]
    diff = mat(P.lift(P.reduce(v))) - mat(v)
    # lift o reduce moves v by an element of the relation span
    assert P.is_zero(diff)
    assert solve_linear(rels, list(diff), modulus=n) is not None
