import numpy as np
import pytest

from galcohom.cohom import Cohomology
from galcohom.gmod import (alpha_extension, augmentation_module, bockstein_extension, build_module, coset_module,
                           cyclic_group, dihedral_group, direct_sum, symmetric_group, trivial_module)
from galcohom.ssdiff import (CharacterLattice, annihilation_exponent, bock_reduction_check, delta2_genius,
                             delta2_genius1, delta2_integral, delta2_mod, is_equivariant_section, minus_one_class,
                             mu4_cup_identity, random_bock_instance, reduction_agrees, splitting_test, torus_d3,
                             torus_stage_reports)


def d4_reflection_aug(K):
    G = dihedral_group(4)
    H = [h for h in G.subgroups() if len(h) == 2
         and not all(G.mul(g, h[1]) == G.mul(h[1], g) for g in range(G.order))][0]
    return augmentation_module(G, 2 ** K, H)


@pytest.mark.parametrize("ell,i,q,e", [
    (2, 2, 2, 1), (2, 2, 7, 1), (2, 3, 2, 0), (2, 3, 4, 2), (2, 5, 10, 4), (2, 3, 9, 3),
    (3, 2, 5, 0), (3, 3, 5, 1), (3, 7, 20, 2), (5, 5, 9, 1), (5, 3, 9, 0), (3, 3, 2, 0),
])
def test_annihilation_exponents(ell, i, q, e):
    assert annihilation_exponent(ell, i, q) == e


def test_annihilation_domain():
    with pytest.raises(ValueError):
        annihilation_exponent(2, 1, 3)
    with pytest.raises(ValueError):
        annihilation_exponent(2, 4, 2)


def test_bockstein_does_not_split():
    G = cyclic_group(2)
    E = bockstein_extension(trivial_module(G, 4, 1), 1, 1)
    assert not splitting_test(E).split


def test_permutation_alpha_splits_with_valid_section():
    G = symmetric_group(3)
    E = alpha_extension(coset_module(G, 2, [G.identity]))
    r = splitting_test(E)
    assert r.split and is_equivariant_section(E, r.section)
    assert not is_equivariant_section(E, 0 * r.section)


def test_second_page_routes_agree_on_nonzero_instance():
    M = d4_reflection_aug(3)
    a = delta2_genius(M, 1, 1)
    b = delta2_genius1(M, 1, 1)
    c = delta2_mod(M, 1, 1)
    assert not a.is_zero()
    assert a.equals(b) and a.equals(c)
    assert a.annihilated_by(2)


def test_integral_reduces_to_mod_two():
    M = d4_reflection_aug(4)
    rep = delta2_integral(M, 1)
    assert rep.notes["oracle_agrees"]
    assert reduction_agrees(rep, delta2_mod(M, 1, 1), 2)


def test_equals_refuses_mismatched_sources():
    M = d4_reflection_aug(3)
    with pytest.raises(ValueError):
        delta2_genius(M, 1, 0).equals(delta2_genius(M, 1, 1))


def test_swap_differential_vanishes():
    G = cyclic_group(2)
    M = build_module(G, 8, 2, [[[0, 1], [1, 0]]])
    for p in (0, 1, 2):
        assert delta2_integral(M, p).is_zero()


def test_odd_prime_second_page_is_zero():
    G = symmetric_group(3)
    M = build_module(G, 27, 2, [[[0, 1], [1, 0]], [[0, -1], [1, -1]]])
    for p in (0, 1):
        assert delta2_genius(M, 2, p).is_zero()


@pytest.mark.parametrize("seed", range(4))
def test_bock_reduction_small(seed):
    rng = np.random.default_rng(seed)
    G, p = [(cyclic_group(2), 2), (cyclic_group(3), 3), (symmetric_group(3), 3), (cyclic_group(4), 2)][seed]
    inst = random_bock_instance(rng, G, p, 1 + seed % 2, 1, 2)
    res = bock_reduction_check(inst.X, inst.Y, inst.E, inst.m)
    assert res.passed


def test_mu4_identity_and_cube():
    G = cyclic_group(2)
    mu4 = build_module(G, 4, 1, [[[3]]])
    assert mu4_cup_identity(mu4, 2)
    with pytest.raises(ValueError):
        mu4_cup_identity(mu4, 1)
    m1 = minus_one_class(mu4)
    assert not m1.is_zero()
    trivial = build_module(G, 4, 1, [[[1]]])
    assert minus_one_class(trivial).is_zero()


def test_torus_rank_one_and_stages():
    G = cyclic_group(2)
    chi = trivial_module(G, 0, 1)
    L1 = CharacterLattice(coset_module(G, 0, G.subgroups()[-1]), chi)
    assert torus_d3(L1, 1, 0).is_zero()
    P = coset_module(G, 0, [G.identity])
    L2 = CharacterLattice(direct_sum(P, trivial_module(G, 0, 1)), chi)
    assert torus_d3(L2, 1, 1).is_zero()
    assert len(torus_stage_reports(L2, 1, 0)) == 3


def test_h1_of_sign_generator_feeds_bockstein():
    G = cyclic_group(2)
    A4 = build_module(G, 4, 2, [[[1, 0], [0, 3]]])
    E = bockstein_extension(A4, 1, 1)
    H = Cohomology(G, E.quotient, 1)
    assert H.order() == 4
