import itertools

import numpy as np
import pytest

from corpus import downset_diagram, make_rng, semilattice_stream
from semilattice import (
    FiniteJoinSemilattice,
    NotAHomomorphism,
    NotAssociative,
    NotDistributive,
    NotFound,
    NotIdempotent,
    Retraction,
    SemilatticeError,
    SemilatticeHom,
    boolean_retraction,
    boolean_semilattice,
    chain_semilattice,
    compose_retraction_morphisms,
    distributivity_counterexample,
    is_boolean,
    is_distributive,
    iter_homs,
    make_semilattice,
    join_irreducibles,
    m3_semilattice,
    n5_semilattice,
    pair_hom,
    parallel_hom,
    product,
    retraction_morphism_squares,
    search_retraction_morphism,
    small_semilattices,
    sub_semilattice,
    zero_hom,
)


def test_chain_order_and_join(chain3):
    assert chain3.leq(0, 2)
    assert not chain3.leq(2, 1)
    assert chain3.join[1, 2] == 2
    assert chain3.top == 2


def test_broken_join_table_names_the_triple():
    with pytest.raises(NotAssociative) as info:
        FiniteJoinSemilattice([[0, 1, 2], [1, 1, 0], [2, 0, 2]], 0)
    assert info.value.witness == (1, 1, 2)


def test_non_idempotent_table():
    with pytest.raises(NotIdempotent):
        FiniteJoinSemilattice([[0, 1], [1, 0]], 0)


def test_hom_law_is_checked(chain3):
    with pytest.raises(NotAHomomorphism):
        SemilatticeHom(chain3, chain_semilattice(2), [0, 1, 0])


def test_boolean_retraction_of_three_chain(chain3):
    r = boolean_retraction(chain3)
    assert r.hat.size == 4
    assert r.eps.map.tolist() == [0, 1, 3]
    assert r.mu.map.tolist() == [0, 1, 2, 2]
    assert sorted(set(r.rho.map.tolist())) == [0, 1, 3]
    assert r.eps.is_unital_embedding()


@pytest.mark.parametrize("build", [m3_semilattice, n5_semilattice])
def test_diamond_and_pentagon_are_not_distributive(build):
    S = build()
    assert S.size == 5
    assert distributivity_counterexample(S) is not None
    with pytest.raises(NotDistributive):
        boolean_retraction(S)


def test_boolean_recognition(chain3):
    assert is_boolean(boolean_semilattice(2))
    assert is_boolean(chain_semilattice(1))
    assert not is_boolean(chain3)
    assert join_irreducibles(boolean_semilattice(2)) == [1, 2]


def test_product_projections_pair_to_identity():
    dec = product(chain_semilattice(2), chain_semilattice(3))
    assert dec.product.size == 6
    assert dec.decode(dec.encode(1, 2)) == (1, 2)
    assert pair_hom(dec.left_proj, dec.right_proj, dec) == dec.product.identity()


def test_homs_between_two_chains():
    C = chain_semilattice(2)
    assert sorted(h.map.tolist() for h in iter_homs(C, C)) == [[0, 0], [0, 1]]


def test_sub_semilattice_must_be_join_closed():
    with pytest.raises(SemilatticeError):
        sub_semilattice(boolean_semilattice(2), [0, 1, 2])
    sub, inc = sub_semilattice(boolean_semilattice(2), [0, 1, 3])
    assert sub.size == 3 and inc.map.tolist() == [0, 1, 3]


def test_retraction_morphism_search_satisfies_both_squares():
    C, B = chain_semilattice(2), boolean_semilattice(2)
    f = SemilatticeHom(C, B, [0, 1])
    rx, ry = boolean_retraction(C), boolean_retraction(B)
    g = search_retraction_morphism(f, rx, ry)
    assert retraction_morphism_squares(f, g, rx, ry) is None


def test_boolean_retraction_over_random_rings_of_sets():
    for S in semilattice_stream(seed=11, count=40, max_size=12, distributive=True):
        assert is_distributive(S)
        r = boolean_retraction(S)
        assert r.is_valid()
        assert r.eps.is_embedding
        assert r.eps.preserves_unit()
        assert is_boolean(r.hat)
        rho = r.rho.map
        assert np.array_equal(rho[rho], rho)


def test_make_semilattice_infers_no_unit():
    S = make_semilattice([[0, 1], [1, 1]], 0, name="c2")
    assert S.unit is None and S.top == 1


def test_parallel_of_identities_is_identity():
    dec = product(chain_semilattice(2), chain_semilattice(3))
    assert parallel_hom(dec.left.identity(), dec.right.identity(), dec, dec) == dec.product.identity()


def test_pair_encoding_rows_are_divmod():
    dec = product(chain_semilattice(2), chain_semilattice(3))
    enc = dec.pair_encoding()
    assert enc.shape == (6, 2)
    assert np.array_equal(enc[:, 0], dec.left_proj.map)
    assert np.array_equal(enc[:, 1], dec.right_proj.map)
    assert all(dec.decode(k) == tuple(enc[k]) for k in range(6))


def test_pair_hom_is_the_only_map_with_both_components():
    C2, C3 = chain_semilattice(2), chain_semilattice(3)
    dec = product(C2, C3)
    for A in small_semilattices(4):
        for f, g in itertools.product(list(iter_homs(A, C2)), list(iter_homs(A, C3))):
            both = [
                h
                for h in iter_homs(A, dec.product)
                if np.array_equal(dec.left_proj.map[h.map], f.map) and np.array_equal(dec.right_proj.map[h.map], g.map)
            ]
            assert both == [pair_hom(f, g, dec)]


def test_parallel_product_respects_composition():
    C2, C3, B2 = chain_semilattice(2), chain_semilattice(3), boolean_semilattice(2)
    d1, d2, d3 = product(C2, C3), product(C3, C2), product(B2, C3)
    for f1, g1 in itertools.product(list(iter_homs(C2, C3)), list(iter_homs(C3, C2))):
        for f2, g2 in itertools.product(list(iter_homs(C3, B2)), list(iter_homs(C2, C3))):
            lhs = parallel_hom(f2, g2, d2, d3) @ parallel_hom(f1, g1, d1, d2)
            assert lhs == parallel_hom(f2 @ f1, g2 @ g1, d1, d3)


def test_inverse_of_an_isomorphism():
    B = boolean_semilattice(2)
    swap = SemilatticeHom(B, B, [0, 2, 1, 3])
    assert swap.inverse() @ swap == B.identity()
    assert swap @ swap.inverse() == B.identity()
    with pytest.raises(SemilatticeError):
        zero_hom(B, B).inverse()


def test_retraction_morphism_for_chain_inclusion():
    C2, C3 = chain_semilattice(2), chain_semilattice(3)
    f = SemilatticeHom(C2, C3, [0, 2])
    rx, ry = boolean_retraction(C2), boolean_retraction(C3)
    g = search_retraction_morphism(f, rx, ry)
    assert g.map.tolist() == [0, 3]
    assert retraction_morphism_squares(f, g, rx, ry) is None


def test_retraction_morphisms_over_corpus_embeddings():
    rings = list(semilattice_stream(seed=4, count=8, max_size=6, distributive=True))
    found = 0
    for S, T in itertools.product(rings, repeat=2):
        rx, ry = boolean_retraction(S), boolean_retraction(T)
        for f in iter_homs(S, T):
            if not f.is_embedding:
                continue
            g = search_retraction_morphism(f, rx, ry)
            assert retraction_morphism_squares(f, g, rx, ry) is None
            found += 1
    for seed in range(6):
        d = downset_diagram(make_rng(seed), 3, "chain")
        f = d.edge(0, 1)
        rx, ry = boolean_retraction(f.source), boolean_retraction(f.target)
        assert retraction_morphism_squares(f, search_retraction_morphism(f, rx, ry), rx, ry) is None
        found += 1
    assert found > 8


def test_inconsistent_retraction_data_has_no_lift():
    C = chain_semilattice(2)
    collapsed = Retraction(C, C, zero_hom(C, C), zero_hom(C, C))
    assert not collapsed.is_valid()
    with pytest.raises(NotFound):
        search_retraction_morphism(C.identity(), collapsed, boolean_retraction(C))


def test_composite_retraction_morphism_keeps_both_squares():
    C2, C3, B2 = chain_semilattice(2), chain_semilattice(3), boolean_semilattice(2)
    f1, f2 = SemilatticeHom(C2, C3, [0, 2]), SemilatticeHom(C3, B2, [0, 1, 3])
    r1, r2, r3 = boolean_retraction(C2), boolean_retraction(C3), boolean_retraction(B2)
    first = (f1, search_retraction_morphism(f1, r1, r2))
    second = (f2, search_retraction_morphism(f2, r2, r3))
    f, g = compose_retraction_morphisms(first, second)
    assert f == f2 @ f1
    assert retraction_morphism_squares(f, g, r1, r3) is None
