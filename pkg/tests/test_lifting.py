import dataclasses

import numpy as np
import pytest

from corpus import chain_tower_package, cube_tower_package, downset_diagram, make_rng, semilattice_stream
from diagram import IndexPoset, SemilatticeDiagram, promote_to_retracted, unfold
from lifting import (
    ConcFunctor,
    LiftedUnfolding,
    LiftingError,
    LiftPackageInvalid,
    LiftReplay,
    NotAProjection,
    NotWellDefined,
    _derived_hom,
    colimit_universal_violation,
    identity_functor_witness,
    identity_lift,
    idempotent_chain_colimit,
    replay,
    transport,
)
from semilattice import (
    NotIdempotent,
    SemilatticeHom,
    boolean_retraction,
    boolean_semilattice,
    chain_semilattice,
    zero_hom,
)


def test_transport_along_a_surjection():
    assert transport([0, 0, 1], [2, 2, 5], 2).tolist() == [2, 5]


def test_transport_detects_disagreeing_preimages():
    with pytest.raises(NotWellDefined) as info:
        transport([0, 0, 1], [2, 3, 5], 2)
    assert (info.value.q, info.value.x1, info.value.x2) == (0, 0, 1)


def test_transport_needs_a_surjection():
    with pytest.raises(LiftingError):
        transport([0, 0], [1, 1], 2)


def test_identity_witness_needs_a_projection():
    C = chain_semilattice(2)
    with pytest.raises(NotAProjection):
        identity_functor_witness(zero_hom(C, C))


def test_identity_replay_certifies_three_chain(three_chain_diagram):
    run = replay(identity_lift(unfold(promote_to_retracted(three_chain_diagram), 3)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert run.n0 == {0: 2}
    assert run.R[0].size == 3
    assert "colimit-cross-check" in run.ledger.tags()
    assert run.delta[0].is_isomorphism


def test_identity_replay_at_depth_two_settles_on_the_idempotent(three_chain_diagram):
    run = replay(identity_lift(unfold(promote_to_retracted(three_chain_diagram), 2)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert run.scope == "absolute"
    assert run.n0 == {0: 2}
    assert "sbar-idempotent" in run.ledger.tags()
    assert run.R[0].size == 3
    assert "colimit-cross-check" in run.ledger.tags()


def test_identity_replay_at_depth_one_is_depth_relative(three_chain_diagram):
    run = replay(identity_lift(unfold(promote_to_retracted(three_chain_diagram), 1)))
    assert run.ledger.ok, run.ledger.to_text()
    assert not run.stabilized
    assert run.scope == "depth 1"
    assert "delta-onto" in run.ledger.tags()
    assert "delta-iso" not in run.ledger.tags()


def test_identity_replay_certifies_pair(pair_retracted):
    run = replay(identity_lift(unfold(pair_retracted, 3)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert {"delta-naturality", "r-arrow-square", "q-shift-square"} <= set(run.ledger.tags())


def test_conc_replay_of_chain_tower(two_chain_diagram):
    bundle = unfold(promote_to_retracted(two_chain_diagram), 3)
    run = replay(chain_tower_package(bundle))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert run.n0 == {0: 1}
    assert "witness-clause-4" in run.ledger.tags()


def test_eta_must_be_an_isomorphism(two_chain_diagram):
    bundle = unfold(promote_to_retracted(two_chain_diagram), 2)
    good = chain_tower_package(bundle)
    eta = list(good.eta)
    eta[0] = zero_hom(eta[0].source, eta[0].target)
    with pytest.raises(LiftPackageInvalid):
        LiftedUnfolding(bundle, ConcFunctor(), good.diagram, tuple(eta))


def test_corrupted_mu_breaks_delta_naturality(pair_retracted):
    bundle = unfold(pair_retracted, 3)
    rd = bundle.source
    B = rd.hat.objects[1]
    swapped = SemilatticeHom(B, rd.base.objects[1], rd.mu[1].map[[0, 2, 1, 3]])
    broken = dataclasses.replace(bundle, source=rd.with_mu(1, swapped))
    failing = {row.tag for row in replay(identity_lift(broken)).ledger.failures()}
    assert "delta-naturality" in failing


def test_idempotent_chain_colimit_is_the_image(chain3):
    r = boolean_retraction(chain3)
    colimit = idempotent_chain_colimit(r.hat, r.rho, mu_target=r.mu)
    assert colimit.obj.size == 3
    assert np.array_equal(colimit.factor.map[colimit.mu.map], r.mu.map)
    assert colimit.factor.is_isomorphism
    assert colimit_universal_violation(r.hat, r.rho, colimit) is None


def test_non_idempotent_chain_is_refused():
    B = boolean_semilattice(2)
    swap = SemilatticeHom(B, B, [0, 2, 1, 3])
    with pytest.raises(NotIdempotent):
        idempotent_chain_colimit(B, swap)


def test_colimit_universal_property_over_corpus():
    for S in semilattice_stream(seed=2, count=100, max_size=8, distributive=True):
        r = boolean_retraction(S)
        assert r.hat.size <= 16
        colimit = idempotent_chain_colimit(r.hat, r.rho)
        assert colimit.obj.size == S.size
        assert colimit_universal_violation(r.hat, r.rho, colimit) is None


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("depth", [2, 3])
def test_identity_replay_certifies_downset_chains(seed, depth):
    d = downset_diagram(make_rng(seed), 3, "chain", name=f"chain{seed}")
    run = replay(identity_lift(unfold(promote_to_retracted(d), depth)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert all(run.delta[X].is_isomorphism for X in range(2))


@pytest.mark.parametrize("seed", [0, 4])
def test_identity_replay_certifies_downset_squares(seed):
    d = downset_diagram(make_rng(seed), 3, "square", name=f"square{seed}")
    run = replay(identity_lift(unfold(promote_to_retracted(d), 2)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert "r-functoriality" in run.ledger.tags()


def test_conc_replay_of_cube_tower():
    d = SemilatticeDiagram(IndexPoset(1), [boolean_semilattice(2)], {}, name="cube")
    run = replay(cube_tower_package(unfold(promote_to_retracted(d), 2)))
    assert run.ledger.ok, run.ledger.to_text()
    assert run.certified
    assert run.n0 == {0: 1}
    clause4 = [row for row in run.ledger.rows if row.tag == "witness-clause-4"]
    assert len(clause4) == 2
    assert all(row.passed for row in clause4)


def test_broken_transported_map_is_a_failing_row(two_chain_diagram):
    run = LiftReplay(identity_lift(unfold(promote_to_retracted(two_chain_diagram), 2)))
    C = chain_semilattice(2)
    h = _derived_hom(run, "flip", C, C, [1, 0])
    assert h.map.tolist() == [1, 0]
    failing = run.ledger.failures()
    assert [(row.tag, row.location) for row in failing] == [("hom-law", "flip")]
    assert not run.ledger.ok
