import numpy as np
import pytest

import itertools

from lattice import (
    FiniteLattice,
    LatticeHom,
    NotALattice,
    TooLarge,
    chain_lattice,
    con_lattice,
    conc_hom,
    conc_projectability_witness,
    iter_lattice_homs,
    lattice_from_covers,
    congruences_by_closure,
    congruences_by_partitions,
    lattice_from_semilattice,
    m3_lattice,
    n5_lattice,
    principal_congruence,
    product_lattice,
    quotient_lattice,
    small_lattices,
)
from monoid import o_ideals, quotient_by_ideal, semilattice_as_monoid
from lifting import ConcFunctor, universal_violation
from semilattice import FiniteJoinSemilattice, SemilatticeHom, is_boolean, is_distributive


@pytest.mark.parametrize("n", range(5))
def test_conc_of_chain_is_boolean(n):
    C = con_lattice(chain_lattice(n + 1))
    assert C.size == 2 ** n
    assert is_boolean(C)


def test_conc_of_m3_has_two_elements():
    assert con_lattice(m3_lattice()).size == 2


def test_absorption_is_checked():
    with pytest.raises(NotALattice):
        FiniteLattice([[0, 1], [1, 1]], [[0, 1], [1, 1]])


def test_enumeration_routes_agree():
    shapes = small_lattices(5) + [product_lattice(chain_lattice(2), chain_lattice(3))]
    for L in shapes:
        assert congruences_by_partitions(L) == congruences_by_closure(L), L


def test_n5_principal_congruence_collapses_the_long_side():
    L = n5_lattice()
    theta = principal_congruence(L, 1, 2)
    assert theta.relates(1, 2)
    assert not theta.relates(0, 1)
    Q, p = quotient_lattice(L, theta)
    assert Q.size == len(theta.blocks)
    assert p.law_violation() is None


def test_conc_is_a_functor_on_composites():
    A, B, C = chain_lattice(2), chain_lattice(3), chain_lattice(4)
    f = LatticeHom(A, B, [0, 2])
    g = LatticeHom(B, C, [0, 1, 3])
    assert conc_hom(g @ f) == conc_hom(g) @ conc_hom(f)


def test_too_large_lattices_are_refused():
    with pytest.raises(TooLarge):
        con_lattice(chain_lattice(6), 5)


def _ideal_induced_quotients(L):
    conc = con_lattice(L)
    M = semilattice_as_monoid(conc)
    for ideal in o_ideals(M):
        Q, q = quotient_by_ideal(M, ideal)
        yield SemilatticeHom(conc, FiniteJoinSemilattice(Q.add, Q.zero), q.map)


def test_conc_projectability_witness_over_small_lattices():
    shapes = small_lattices(5) + [product_lattice(chain_lattice(2), chain_lattice(3))]
    for L in shapes:
        for phi in _ideal_induced_quotients(L):
            w = conc_projectability_witness(L, phi)
            assert w.epic.is_surjective
            assert w.iso.is_isomorphism
            assert np.array_equal(w.iso.map[conc_hom(w.epic).map], phi.map)
            assert universal_violation(ConcFunctor(), L, w.epic) is None, (L, phi.map.tolist())
            conc = con_lattice(L)
            for i, theta in enumerate(conc.congruences):
                assert (phi.map[i] == phi.target.zero) == (theta <= w.kernel)


def test_semilattice_to_lattice(chain3):
    L = lattice_from_semilattice(chain3)
    assert L == chain_lattice(3)


def _square():
    return lattice_from_covers(4, [(0, 1), (0, 2), (1, 3), (2, 3)], name="square")


def test_homs_out_of_square_and_m3():
    two = chain_lattice(2)
    from_square = list(iter_lattice_homs(_square(), two))
    assert sorted(h.map.tolist() for h in from_square) == [[0, 0, 0, 0], [0, 0, 1, 1], [0, 1, 0, 1], [1, 1, 1, 1]]
    assert [h.map.tolist() for h in iter_lattice_homs(m3_lattice(), two)] == [[0, 0, 0, 0, 0], [1, 1, 1, 1, 1]]


def test_hom_enumeration_matches_brute_force():
    shapes = small_lattices(4)
    for L, T in itertools.product(shapes, shapes):
        found = sorted(h.map.tolist() for h in iter_lattice_homs(L, T))
        brute = sorted(
            list(m)
            for m in itertools.product(range(T.size), repeat=L.size)
            if LatticeHom(L, T, m, check=False).law_violation() is None
        )
        assert found == brute, (L, T)


def test_conc_is_a_functor_over_small_lattices():
    shapes = [chain_lattice(2), chain_lattice(3), _square()]
    for A, B, C in itertools.product(shapes, repeat=3):
        assert conc_hom(A.identity()) == con_lattice(A).identity()
        for f in list(iter_lattice_homs(A, B))[:5]:
            for g in list(iter_lattice_homs(B, C))[:5]:
                assert conc_hom(g @ f) == conc_hom(g) @ conc_hom(f)


def test_congruence_semilattices_are_distributive():
    for L in small_lattices(5) + [product_lattice(chain_lattice(2), chain_lattice(3))]:
        assert is_distributive(con_lattice(L)), L


def test_conc_of_a_quotient_map_identifies_by_joining_the_kernel():
    for L in small_lattices(5):
        C = con_lattice(L)
        for a, theta in enumerate(C.congruences):
            _, p = quotient_lattice(L, theta)
            cp = conc_hom(p).map
            for x in range(C.size):
                for y in range(C.size):
                    assert (cp[x] == cp[y]) == (C.join[x, a] == C.join[y, a])
