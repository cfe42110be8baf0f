import itertools
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galcohom.cohom import (BoundedComplex, Cohomology, cochain_class, coboundary, coboundary_matrix, connecting,
                           cup, induced_is_zero, nilpotency_certificate, null_homotopy, push_forward)
from galcohom.gmod import (GModuleMap, bockstein_extension, build_module, cyclic_group, symmetric_group, tensor,
                           trivial_group, trivial_module)


def mat(rows):
    return np.array(rows, dtype=object)


# naive bar complex on dictionaries, used as an oracle


def naive_d(G, M, f, p):
    """d f for a normalized cochain given as {tuple: vector}."""
    out = {}
    elems = range(G.order)
    for gs in itertools.product(elems, repeat=p + 1):
        v = mat(M.actions[gs[0]]).dot(f[gs[1:]])
        for i in range(1, p + 1):
            merged = gs[:i - 1] + (G.mul(gs[i - 1], gs[i]),) + gs[i + 1:]
            v = v + (-1) ** i * f[merged]
        v = v + (-1) ** (p + 1) * f[gs[:p]]
        out[gs] = mat([x % o for x, o in zip(v, M.orders)])
    return out


def all_cochains(G, M, p):
    """Every normalized p-cochain with values in a finite module."""
    tuples = list(itertools.product(range(G.order), repeat=p))
    free = [t for t in tuples if G.identity not in t]
    values = list(itertools.product(*[range(o) for o in M.orders]))
    zero = mat([0] * M.rank)
    for choice in itertools.product(values, repeat=len(free)):
        f = {t: zero for t in tuples}
        for t, v in zip(free, choice):
            f[t] = mat(list(v))
        yield f


def naive_order(G, M, p):
    cocycles = sum(1 for f in all_cochains(G, M, p) if not any(v.any() for v in naive_d(G, M, f, p).values()))
    if p == 0:
        return cocycles
    bounds = {tuple(tuple(int(x) for x in v) for _, v in sorted(naive_d(G, M, f, p - 1).items()))
              for f in all_cochains(G, M, p - 1)}
    return cocycles // len(bounds)


def cyclic_oracle(M, p):
    """|H^p(C_m, M)| from norm and augmentation kernels (finite M)."""
    G = M.group
    s = mat(M.actions[G.gens[0]])
    N = sum(np.linalg.matrix_power(s.astype(np.int64), k).astype(object) for k in range(G.order))
    elems = [mat(list(v)) for v in itertools.product(*[range(o) for o in M.orders])]

    def red(v):
        return tuple(int(x) % o for x, o in zip(v, M.orders))

    if p == 0:
        return sum(1 for v in elems if red(s.dot(v) - v) == red(0 * v))
    zero = red(0 * elems[0])
    if p % 2:
        ker = sum(1 for v in elems if red(N.dot(v)) == zero)
        img = len({red(s.dot(v) - v) for v in elems})
    else:
        ker = sum(1 for v in elems if red(s.dot(v) - v) == zero)
        img = len({red(N.dot(v)) for v in elems})
    return ker // img


def test_trivial_group_has_no_normalized_one_cochains():
    D = coboundary_matrix(trivial_group(), trivial_module(trivial_group(), 4, 2), 1)
    assert D.shape[1] == 0


def test_d1_zero_for_c2_trivial():
    G = cyclic_group(2)
    D = coboundary_matrix(G, trivial_module(G, 2, 1), 1)
    assert not (mat(D) % 2).any()


@pytest.mark.parametrize("p", [0, 1, 2])
def test_dd_zero(p):
    G = symmetric_group(3)
    M = build_module(G, 4, 1, [[[-1]], [[1]]])
    A = mat(coboundary_matrix(G, M, p))
    B = mat(coboundary_matrix(G, M, p + 1))
    assert not (B.dot(A) % 4).any()


def test_c2_mod2_all_degrees():
    G = cyclic_group(2)
    M = trivial_module(G, 2, 1)
    for p in range(4):
        assert Cohomology(G, M, p).invariant_factors == (2,)
    for p in range(3):
        assert naive_order(G, M, p) == 2


def test_sign_module_over_z():
    G = cyclic_group(2)
    M = build_module(G, 0, 1, [[[-1]]])
    assert Cohomology(G, M, 1).invariant_factors == (2,)
    assert Cohomology(G, M, 2).invariant_factors == ()


def test_s3_sign_mod3_matches_enumeration():
    G = symmetric_group(3)
    M = build_module(G, 3, 1, [[[-1]], [[1]]])
    for p in (0, 1):
        assert Cohomology(G, M, p).order() == naive_order(G, M, p)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.sampled_from([2, 4, 6, 8]), st.integers(1, 3), st.data())
def test_cyclic_groups_against_norm_oracle(m, n, p, data):
    G = cyclic_group(m)
    r = data.draw(st.integers(1, 2))
    from galcohom.ssdiff import random_lattice_action
    rng = np.random.default_rng(data.draw(st.integers(0, 10 ** 6)))
    M = build_module(G, n, r, random_lattice_action(G, r, rng, n))
    assert Cohomology(G, M, p).order() == cyclic_oracle(M, p)


@pytest.mark.parametrize("m,n", [(2, 4), (3, 6), (4, 6), (5, 10), (6, 4)])
def test_cyclic_trivial_orders(m, n):
    G = cyclic_group(m)
    for p in (1, 2, 3):
        assert Cohomology(G, trivial_module(G, n, 1), p).order() == gcd(m, n)


def test_h0_is_fixed_points():
    G = symmetric_group(3)
    from galcohom.gmod import coset_module
    M = coset_module(G, 4, [G.identity])
    fixed = sum(1 for v in itertools.product(range(4), repeat=M.rank)
                if all(((mat(M.actions[g]).dot(mat(list(v))) - mat(list(v))) % 4 == 0).all() for g in range(6)))
    assert Cohomology(G, M, 0).order() == fixed == 4


def test_coboundary_matches_naive():
    G = symmetric_group(3)
    M = build_module(G, 4, 2, [[[0, 1], [1, 0]], [[0, -1], [1, -1]]])
    rng = np.random.default_rng(1)
    f = rng.integers(0, 4, size=(6, 6, 2)).astype(object)
    f[G.identity, :, :] = 0
    f[:, G.identity, :] = 0
    fast = coboundary(G, M, f.astype(M.dtype))
    slow = naive_d(G, M, {t: f[t] for t in itertools.product(range(6), repeat=2)}, 2)
    for t, v in slow.items():
        assert (fast[t] % 4 == v % 4).all()


def c2_gen(M):
    G = M.group
    return Cohomology(G, M, 1).generators()[0]


def test_cup_square_of_c2_generator():
    G = cyclic_group(2)
    Z2 = trivial_module(G, 2, 1)
    x = c2_gen(Z2)
    xx = cup(x, x)
    H2 = Cohomology(G, xx.M, 2)
    assert H2.invariant_factors == (2,) and H2.coordinates(xx) == [1]


def test_cup_unit():
    G = symmetric_group(3)
    M = build_module(G, 3, 1, [[[-1]], [[1]]])
    one = cochain_class(G, trivial_module(G, 3, 1), {(): [1]}, 0)
    x = Cohomology(G, M, 1).generators()[0]
    y = cup(one, x)
    assert (y.cocycle.reshape(-1) % 3 == x.cocycle.reshape(-1) % 3).all()


@pytest.mark.parametrize("seed", range(3))
def test_cup_graded_commutative_and_associative(seed):
    G = cyclic_group(4)
    rng = np.random.default_rng(seed)
    M = trivial_module(G, 4, 1)
    H1, H2 = Cohomology(G, M, 1), Cohomology(G, M, 2)

    def rnd(H):
        return H.element([int(rng.integers(0, o)) for o in H.invariant_factors])

    x, y, z = rnd(H1), rnd(H2), rnd(H1)
    xy, yx = cup(x, y), cup(y, x)
    # rank one: the swap on M (x) M is the identity
    assert (xy - yx.scale((-1) ** (1 * 2))).is_zero()
    a = cup(cup(x, y), z)
    b = cup(x, cup(y, z))
    assert (a - type(a)(G, a.M, a.p, b.cocycle)).is_zero()


def test_bockstein_is_sq1():
    G = cyclic_group(2)
    E = bockstein_extension(trivial_module(G, 4, 1), 1, 1)
    x = c2_gen(E.quotient)
    b = connecting(E, x)
    H2 = Cohomology(G, E.sub, 2)
    assert H2.coordinates(b) == [1]
    assert connecting(E, x.scale(0)).is_zero()


@pytest.mark.parametrize("seed", range(3))
def test_connecting_additive_and_representative_free(seed):
    G = symmetric_group(3)
    rng = np.random.default_rng(seed)
    from galcohom.ssdiff import random_lattice_action
    M = build_module(G, 9, 2, random_lattice_action(G, 2, rng, 9))
    E = bockstein_extension(M, 1, 1)
    H = Cohomology(G, E.quotient, 1)
    gens = H.generators()
    if not gens:
        return
    x = gens[0]
    y = gens[-1]
    assert (connecting(E, x + y) - connecting(E, x) - connecting(E, y)).is_zero()
    # change the representative by a random coboundary
    Q = E.quotient
    t = rng.integers(0, 3, size=Q.rank).astype(object)
    shift = np.zeros_like(x.cocycle, dtype=object)
    for g in range(G.order):
        shift[g] = mat(Q.actions[g]).dot(t) - t
    x2 = type(x)(G, Q, 1, ((x.cocycle.astype(object) + shift) % 3).astype(Q.dtype))
    assert (connecting(E, x2) - connecting(E, x)).is_zero()


def test_connecting_naturality():
    # multiplication by the unit 3 on 0 -> Z/3 -> Z/9 -> Z/3 -> 0 over C3 acting trivially
    G = cyclic_group(3)
    E = bockstein_extension(trivial_module(G, 9, 1), 1, 1)
    A, B, C = E.modules
    fA = GModuleMap(A, A, [[2]])
    fC = GModuleMap(C, C, [[2]])
    for p in (0, 1, 2):
        for x in Cohomology(G, C, p).generators():
            lhs = connecting(E, push_forward(fC, x))
            rhs = push_forward(fA, connecting(E, x))
            assert (lhs - rhs).is_zero()


def test_null_homotopy_examples():
    C = BoundedComplex(4, [[4], [4]], [[[2]]])
    zero = [mat([[0]]), mat([[0]])]
    h = null_homotopy(C, zero)
    assert h is not None and all(not (x % 4).any() for x in h[1:])
    # f = (0, 2) is zero on cohomology but not null-homotopic: a homotopy forces f0 = 2h = f1
    f = [mat([[0]]), mat([[2]])]
    assert all(induced_is_zero(C, f, i) for i in range(2))
    assert null_homotopy(C, f) is None
    assert all(null_homotopy(C, [mat([[a]]), mat([[b]])]) is None
               for a in range(4) for b in range(4) if a != b and (a - b) % 2 == 0)
    # multiplication by 2 in both degrees is d h + h d with h = 1
    h2 = null_homotopy(C, [mat([[2]]), mat([[2]])])
    assert h2 is not None and int(h2[1][0, 0]) % 2 == 1


def test_nilpotency_one_degree():
    C = BoundedComplex(4, [[2, 4]], [])
    f = [mat([[0, 0], [0, 0]])]
    cert = nilpotency_certificate(C, f)
    assert cert.exponent == 1


def test_nilpotency_two_degree_square():
    C = BoundedComplex(4, [[4], [4]], [[[2]]])
    f = [mat([[0]]), mat([[2]])]
    cert = nilpotency_certificate(C, f)
    assert cert.exponent == 2
    assert all(not (mat(p) % 4).any() for p in cert.power)


def test_nilpotency_rejects_nonzero_on_cohomology():
    C = BoundedComplex(4, [[4], [4]], [[[2]]])
    with pytest.raises(ValueError, match="degree 0"):
        nilpotency_certificate(C, [mat([[1]]), mat([[1]])])


def test_d_squared_checked():
    with pytest.raises(ValueError):
        BoundedComplex(4, [[4], [4], [4]], [[[1]], [[1]]])


def test_tensor_target_of_cup():
    G = cyclic_group(2)
    M = trivial_module(G, 2, 2)
    x = Cohomology(G, M, 1).generators()[0]
    assert cup(x, x).M.rank == tensor(M, M).rank
