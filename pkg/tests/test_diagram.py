import dataclasses

import numpy as np
import pytest

from diagram import (
    ArrowNotEmbedding,
    BudgetExceeded,
    DiagramError,
    IndexPoset,
    NotDistributiveNode,
    SemilatticeDiagram,
    check_rho_naturality,
    derived_rho,
    promote_to_retracted,
    unfold,
    unfolded_arrows_are_embeddings,
    validate_diagram,
    verify_unfolding,
)
from corpus import downset_diagram, make_rng
from semilattice import SemilatticeHom, chain_semilattice, m3_semilattice, pair_hom, parallel_hom, zero_hom


SQUARE = [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_index_poset_rejects_cycles_and_loops():
    with pytest.raises(DiagramError):
        IndexPoset(2, [(0, 1), (1, 0)])
    with pytest.raises(DiagramError):
        IndexPoset(1, [(0, 0)])


def test_index_poset_order():
    square = IndexPoset(4, SQUARE)
    assert square.leq(0, 3)
    assert not square.leq(1, 2)
    assert square.is_lattice()
    assert not IndexPoset(3, [(0, 1), (0, 2)]).is_lattice()
    assert (0, 1, 3) in square.triples()


def test_times_chain_layout():
    P = IndexPoset(2, [(0, 1)]).times_chain(3)
    assert P.nodes == 6
    assert P.leq(0, 5)
    assert not P.leq(3, 2)


def test_non_commuting_square_is_reported():
    C = chain_semilattice(2)
    edges = {e: C.identity() for e in SQUARE}
    edges[(0, 2)] = zero_hom(C, C)
    report = validate_diagram(SemilatticeDiagram(IndexPoset(4, SQUARE), [C] * 4, edges))
    assert not report.ok
    assert report.issues[0].kind == "path"


def test_arrow_data_must_sit_on_covers():
    C = chain_semilattice(2)
    with pytest.raises(DiagramError):
        SemilatticeDiagram(IndexPoset(2, [(0, 1)]), [C, C], {})


def test_promotion_builds_a_valid_retracted_diagram(pair_retracted):
    assert pair_retracted.violations() == []
    assert [H.size for H in pair_retracted.hat.objects] == [2, 4]
    assert pair_retracted.hat.edge(0, 1).is_embedding
    assert check_rho_naturality(pair_retracted, 0, 1)


def test_promotion_refuses_non_embeddings():
    C = chain_semilattice(2)
    d = SemilatticeDiagram(IndexPoset(2, [(0, 1)]), [C, C], {(0, 1): zero_hom(C, C)})
    with pytest.raises(ArrowNotEmbedding) as info:
        promote_to_retracted(d)
    assert info.value.edge == (0, 1)


def test_promotion_refuses_non_distributive_nodes():
    d = SemilatticeDiagram(IndexPoset(1), [m3_semilattice()], {})
    with pytest.raises(NotDistributiveNode) as info:
        promote_to_retracted(d)
    assert info.value.node == 0


def test_unfold_three_chain(three_chain_diagram):
    bundle = unfold(promote_to_retracted(three_chain_diagram), 2)
    assert bundle.sizes() == {0: [4, 16]}
    ledger = verify_unfolding(bundle)
    assert ledger.ok
    assert "sigma-section" in ledger.tags()
    assert unfolded_arrows_are_embeddings(bundle)


def test_depth_one_has_no_sigma_rows(three_chain_diagram):
    ledger = verify_unfolding(unfold(promote_to_retracted(three_chain_diagram), 1))
    assert ledger.ok
    assert not any(tag.startswith("sigma") for tag in ledger.tags())


def test_unfold_pair_depth_three(pair_retracted):
    bundle = unfold(pair_retracted, 3)
    ledger = verify_unfolding(bundle)
    assert ledger.ok, ledger.to_text()
    assert {"unfold-factorization", "unfold-functoriality", "sigma-naturality", "embedding"} <= set(ledger.tags())
    assert bundle.unfolded.index.nodes == 6


def test_budget_is_enforced(three_chain_diagram):
    with pytest.raises(BudgetExceeded):
        unfold(promote_to_retracted(three_chain_diagram), 3, budget=10)


def test_fingerprint_is_stable(pair_retracted, pair_diagram):
    again = promote_to_retracted(pair_diagram)
    assert unfold(pair_retracted, 2).fingerprint() == unfold(again, 2).fingerprint()


def test_corrupted_mu_is_caught(three_chain_diagram):
    rd = promote_to_retracted(three_chain_diagram)
    bad_mu = SemilatticeHom(rd.hat.objects[0], rd.base.objects[0], [0, 0, 2, 2])
    ledger = verify_unfolding(unfold(rd.with_mu(0, bad_mu), 2))
    assert "retraction-identity" in {row.tag for row in ledger.failures()}


def test_sigma_is_a_section_of_pi(pair_retracted):
    bundle = unfold(pair_retracted, 3)
    for X in range(2):
        for n in (1, 2):
            s = bundle.sigma[X][n]
            assert np.array_equal(bundle.pi[X][n + 1].map[s.map], np.arange(bundle.power(X, n).size))


def test_derived_rho_of_three_chain(three_chain_diagram):
    rd = promote_to_retracted(three_chain_diagram)
    assert derived_rho(rd, 0).map.tolist() == [0, 1, 3, 3]
    with pytest.raises(DiagramError):
        derived_rho(rd.with_mu(0, SemilatticeHom(rd.hat.objects[0], rd.base.objects[0], [0, 2, 1, 2])), 0)


def _failing(bundle):
    return {row.tag for row in verify_unfolding(bundle).failures()}


def test_promotion_projects_back_to_the_diagram(pair_diagram):
    assert promote_to_retracted(pair_diagram).project() is pair_diagram
    d = downset_diagram(make_rng(2), 3, "square", name="sq")
    base = promote_to_retracted(d).project()
    assert base.objects == d.objects
    assert base.edges == d.edges


def test_mutated_hat_edge_breaks_the_retraction_squares(pair_retracted):
    H0, H1 = pair_retracted.hat.objects
    moved = pair_retracted.hat.with_edge((0, 1), SemilatticeHom(H0, H1, [0, 2]))
    assert moved.edge(0, 1).map.tolist() == [0, 2]
    rd = dataclasses.replace(pair_retracted, hat=moved)
    assert "retraction-square" in _failing(unfold(rd, 2))


def test_mutated_sigma_breaks_sigma_alpha(three_chain_diagram):
    bundle = unfold(promote_to_retracted(three_chain_diagram), 2)
    B = bundle.power(0, 1)
    diagonal = pair_hom(B.identity(), B.identity(), bundle.decompositions[0][2])
    mutant = dataclasses.replace(bundle, sigma=({1: diagonal},))
    failing = _failing(mutant)
    assert "sigma-alpha" in failing
    assert "unfold-factorization" in failing
    assert "sigma-section" not in failing


def test_mutated_power_arrow_breaks_alpha_naturality(pair_retracted):
    bundle = unfold(pair_retracted, 2)
    H0, H1 = bundle.power(0, 1), bundle.power(1, 1)
    lifted = parallel_hom(zero_hom(H0, H1), bundle.power_arrow(0, 1, 1), bundle.decompositions[0][2], bundle.decompositions[1][2])
    mutant = dataclasses.replace(bundle, power_arrows={**bundle.power_arrows, (0, 1, 2): lifted})
    failing = _failing(mutant)
    assert "alpha-naturality" in failing
    assert verify_unfolding(bundle).ok
