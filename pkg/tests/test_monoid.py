import numpy as np
import pytest

from corpus import semilattice_stream
from monoid import (
    FiniteCommutativeMonoid,
    NotAMonoid,
    NotAnOIdeal,
    OIdeal,
    TooLarge,
    alg_leq,
    cyclic_group,
    embedding_counterexample,
    generated_o_ideal,
    has_order_unit,
    hom_as_monoid_hom,
    is_conical,
    is_ideal_induced,
    is_monoid_embedding,
    is_refinement,
    o_ideals,
    quotient_by_ideal,
    refinement_counterexample,
    semilattice_as_monoid,
    truncated_sum,
)
from semilattice import boolean_retraction, is_distributive, m3_semilattice, n5_semilattice, zero_hom


def test_distributive_iff_refinement():
    shapes = list(semilattice_stream(seed=5, count=200, max_size=8)) + [m3_semilattice(), n5_semilattice()]
    failures = 0
    for S in shapes:
        refinement = is_refinement(semilattice_as_monoid(S))
        assert is_distributive(S) == refinement, S
        failures += not refinement
    assert failures >= 1


def test_m3_refinement_witness():
    a0, a1, b0, b1 = refinement_counterexample(semilattice_as_monoid(m3_semilattice()))
    M = semilattice_as_monoid(m3_semilattice())
    assert M.add[a0, a1] == M.add[b0, b1]


def test_worker_count_does_not_change_the_witness():
    for M in (semilattice_as_monoid(m3_semilattice()), truncated_sum(3), cyclic_group(4)):
        assert refinement_counterexample(M, workers=1) == refinement_counterexample(M, workers=3)


def test_named_monoids():
    Z3 = cyclic_group(3)
    assert is_refinement(Z3)
    assert not is_conical(Z3)
    T = truncated_sum(2)
    assert is_conical(T)
    assert has_order_unit(T) == 1
    assert alg_leq(T, 1, 2)
    assert not alg_leq(T, 2, 1)


def test_axioms_are_checked():
    with pytest.raises(NotAMonoid):
        FiniteCommutativeMonoid([[0, 1], [0, 1]], 0)


def test_input_limit():
    idx = np.arange(65)
    with pytest.raises(TooLarge):
        FiniteCommutativeMonoid(np.add.outer(idx, idx) % 65, 0)


def test_o_ideals_of_a_chain(chain3):
    M = semilattice_as_monoid(chain3)
    assert [ideal.sorted_members() for ideal in o_ideals(M)] == [[0], [0, 1], [0, 1, 2]]
    assert generated_o_ideal(M, [1]).sorted_members() == [0, 1]
    with pytest.raises(NotAnOIdeal):
        OIdeal(M, [0, 2])


def test_quotient_by_ideal_is_ideal_induced(chain3):
    M = semilattice_as_monoid(chain3)
    Q, q = quotient_by_ideal(M, [0, 1])
    assert Q.size == 2
    assert q.map.tolist() == [0, 0, 1]
    assert is_ideal_induced(q)


def test_retraction_embedding_is_a_monoid_embedding(chain3):
    eps = boolean_retraction(chain3).eps
    assert embedding_counterexample(hom_as_monoid_hom(eps)) is None


def test_collapsing_hom_is_not_an_embedding(chain3):
    f = hom_as_monoid_hom(zero_hom(chain3, chain3))
    assert not is_monoid_embedding(f)
    assert embedding_counterexample(f)[0] == "injective"
