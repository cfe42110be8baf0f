import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galcohom.gmod import (FiniteGroup, GroupError, ModuleError, SpecError, alpha_extension, augmentation_module,
                           bockstein_extension, build_group, build_module, comparison_q2_to_m, coset_module,
                           cyclic_group, dihedral_group, dual, genius_extension, module_from_spec, module_to_spec,
                           quad2, quad_eval, signed_sym_coinv, small_groups, symmetric_group, tensor, trivial_module,
                           wedge2)


def mat(rows):
    return np.array(rows, dtype=object)


def test_build_group_examples():
    assert build_group({"permutations": ["(1 2)"]}).order == 2
    assert build_group({"permutations": ["(1 2)", "(1 2 3)"]}).order == 6
    # a Latin square that is not associative
    bad = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(GroupError):
        FiniteGroup(bad, [1, 2])


def test_small_group_orders():
    orders = sorted(G.order for G in small_groups(8))
    assert orders == [1, 2, 3, 4, 4, 5, 6, 6, 7, 8, 8, 8, 8, 8]


def test_build_module_examples():
    G = cyclic_group(2)
    triv = build_module(G, 0, 1, [[[1]]])
    assert all(triv.actions[g][0][0] == 1 for g in range(2))
    sgn = build_module(G, "Z", 1, [[[-1]]])
    assert sgn.actions[G.gens[0]][0][0] == -1
    mu4 = build_module(G, 4, 1, [[[3]]])
    assert mu4.actions[G.gens[0]][0][0] == 3


def test_noninvertible_action_rejected():
    with pytest.raises(ModuleError):
        build_module(cyclic_group(2), 4, 1, [[[2]]])
    with pytest.raises(ModuleError):
        build_module(cyclic_group(2), 0, 1, [[[3]]])


def test_relations_checked():
    # x -> 2x on Z/5 has order 4, not 2
    with pytest.raises(ModuleError):
        build_module(cyclic_group(2), 5, 1, [[[2]]])


def random_module(G, n, r, seed):
    rng = np.random.default_rng(seed)
    from galcohom.ssdiff import random_lattice_action
    return build_module(G, n, r, random_lattice_action(G, r, rng, n))


@pytest.mark.parametrize("seed", range(4))
def test_tensor_is_kronecker(seed):
    G = symmetric_group(3)
    M = random_module(G, 8, 2, seed)
    N = random_module(G, 8, 2, seed + 10)
    T = tensor(M, N)
    for g in range(G.order):
        expect = np.kron(mat(M.actions[g]), mat(N.actions[g])) % 8
        assert (mat(T.actions[g]) % 8 == expect).all()


@pytest.mark.parametrize("seed", range(4))
def test_wedge_matches_minors(seed):
    G = dihedral_group(4)
    M = random_module(G, 8, 3, seed)
    W = wedge2(M)
    pairs = [(i, j) for i in range(3) for j in range(i + 1, 3)]
    for g in range(G.order):
        A = mat(M.actions[g])
        for c, (i, j) in enumerate(pairs):
            for rr, (k, l) in enumerate(pairs):
                minor = A[k, i] * A[l, j] - A[l, i] * A[k, j]
                assert (W.actions[g][rr][c] - minor) % 8 == 0


def test_wedge_rank_one_is_zero():
    assert wedge2(trivial_module(cyclic_group(2), 4, 1)).rank == 0


@pytest.mark.parametrize("seed", range(3))
def test_dual_is_contragredient_and_involutive(seed):
    G = cyclic_group(4)
    M = random_module(G, 9, 2, seed)
    D = dual(M)
    for g in range(G.order):
        A = mat(M.actions[g])
        B = mat(D.actions[g])
        assert ((B.T.dot(A)) % 9 == np.eye(2, dtype=object)).all()
    DD = dual(D)
    assert all(((mat(DD.actions[g]) - mat(M.actions[g])) % 9 == 0).all() for g in range(G.order))


def test_quad2_rank_one_trivial():
    q = quad2(trivial_module(cyclic_group(2), 8, 1))
    assert q.module.modulus == 4 and q.module.rank == 2


def test_quad2_action_on_functions():
    # (g f)(y) = f(A^T y) on every y in (Z/8)^2, for a signed swap
    G = cyclic_group(2)
    M = build_module(G, 8, 2, [[[0, -1], [-1, 0]]])
    q = quad2(M)
    n, r, mod = q.module.rank, M.rank, q.module.modulus
    for g in range(G.order):
        A = mat(M.actions[g])
        Q = mat(q.module.actions[g])
        for col in range(n):
            c = [1 if k == col else 0 for k in range(n)]
            gc = [int(x) for x in Q[:, col]]
            for y in itertools.product(range(8), repeat=r):
                Aty = [sum(A[k][i] * y[k] for k in range(r)) for i in range(r)]
                assert (quad_eval(r, gc, y) - quad_eval(r, c, Aty)) % mod == 0


def test_alpha_exhaustive_exactness():
    G = cyclic_group(2)
    V = coset_module(G, 2, [G.identity])
    E = alpha_extension(V)
    A, B, C = E.modules
    assert 2 ** B.rank == 8
    inj, surj = (mat(f.matrix) for f in E.maps)
    image = {tuple(inj.dot(mat(list(v))) % 2) for v in itertools.product(range(2), repeat=A.rank)}
    kernel = {b for b in itertools.product(range(2), repeat=B.rank) if not (surj.dot(mat(list(b))) % 2).any()}
    assert image == kernel
    assert len(image) == 2 ** A.rank
    hits = {tuple(surj.dot(mat(list(b))) % 2) for b in itertools.product(range(2), repeat=B.rank)}
    assert len(hits) == 2 ** C.rank


def test_signed_coinvariants_exhaustive():
    G = cyclic_group(2)
    M = build_module(G, 4, 2, [[[0, 1], [1, 0]]])
    C, proj = signed_sym_coinv(M)
    # span of e_i (x) e_j + e_j (x) e_i in (Z/4)^4
    rels = []
    for i in range(2):
        for j in range(2):
            v = [0] * 4
            v[i * 2 + j] += 1
            v[j * 2 + i] += 1
            rels.append(v)
    span = {tuple(sum(c * np.array(r) for c, r in zip(cs, rels)) % 4)
            for cs in itertools.product(range(4), repeat=len(rels))}
    quotient_size = 4 ** 4 // len(span)
    assert int(np.prod(C.orders)) == quotient_size == 16
    assert sorted(C.orders) == [2, 2, 4]


def test_genius_shape_and_exactness():
    G = cyclic_group(2)
    M = build_module(G, 8, 2, [[[0, 1], [1, 0]]])
    E = genius_extension(M)
    assert E.kind == "yoneda2"
    assert E.modules[1].rank == 5 and E.modules[1].modulus == 4
    E.verify()


def test_polarization_composite_is_zero():
    M = random_module(dihedral_group(4), 16, 3, 3)
    q = quad2(M)
    comp = mat(q.polarization.matrix).dot(mat(q.linear.matrix)) % q.module.modulus
    assert not comp.any()


@pytest.mark.parametrize("seed", range(3))
def test_comparison_squares_commute(seed):
    M = random_module(symmetric_group(3), 8, 2, seed)
    q = quad2(M)
    mod = q.module.modulus
    F = comparison_q2_to_m(q)
    r = q.base.rank
    # M -> Q^2(M) -> M is multiplication by 2
    assert ((F.dot(mat(q.linear.matrix)) - 2 * np.eye(r, dtype=object)) % mod == 0).all()
    # Q^2(M) -> M (x) M -> signed coinvariants equals Q^2(M) -> M -> signed coinvariants (m -> m (x) m)
    C, proj = signed_sym_coinv(q.base)
    P = mat(proj.matrix)
    psi = np.zeros((C.rank, r), dtype=object)
    for i in range(r):
        e = np.zeros(r * r, dtype=object)
        e[i * r + i] = 1
        psi[:, i] = P.dot(e)
    diff = P.dot(mat(q.polarization.matrix)) - psi.dot(F)
    for k, o in enumerate(C.orders):
        assert (diff[k] % o == 0).all()


def test_bockstein_extension_shape():
    M = trivial_module(cyclic_group(2), 4, 3)
    E = bockstein_extension(M, 1, 1)
    A, B, C = E.modules
    assert A.orders == (2, 2, 2) and B.orders == (4, 4, 4) and C.orders == (2, 2, 2)
    E.verify()


def test_augmentation_module_is_kernel_of_degree():
    G = symmetric_group(3)
    H = [h for h in G.subgroups() if len(h) == 2][0]
    I = augmentation_module(G, 0, H)
    P = coset_module(G, 0, H)
    n = P.rank
    # the inclusion e_i - e_0 into Z[G/H] is equivariant
    J = np.zeros((n, n - 1), dtype=object)
    for i in range(1, n):
        J[i, i - 1] = 1
        J[0, i - 1] = -1
    for g in range(G.order):
        assert (mat(P.actions[g]).dot(J) == J.dot(mat(I.actions[g]))).all()


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 4, 8, 0]), st.data())
def test_spec_roundtrip(n, data):
    G = symmetric_group(3)
    sgn = -1 if data.draw(st.booleans()) else 1
    M = build_module(G, n, 1, [[[sgn]], [[1]]], label="chi")
    doc = module_to_spec(M)
    N = module_from_spec(doc)
    assert N.modulus == M.modulus
    assert (N.actions == M.actions).all()


def test_spec_errors_carry_location():
    doc = {"group": {"permutations": ["(1 2)"]}, "ring": 4, "rank": 1, "actions": [[[1, 0]]]}
    with pytest.raises(SpecError) as e:
        module_from_spec(doc, "m.json")
    assert "m.json:$.actions[0][0]" in str(e.value)
    with pytest.raises(SpecError) as e:
        module_from_spec({"group": {"permutations": ["(1 2)"]}, "ring": 4, "rank": 1}, "m.json")
    assert "actions" in str(e.value)
