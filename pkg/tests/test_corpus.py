import pytest

from corpus import (
    chain_tower_package,
    cube_tower_package,
    down_sets,
    downset_diagram,
    generate_corpus,
    make_rng,
    random_poset,
    semilattice_stream,
)
from diagram import promote_to_retracted, unfold, validate_diagram, verify_unfolding
from lifting import LiftPackageInvalid
from semilattice import is_distributive
from workspace import dump_json, parse_workspace


def test_corpus_is_deterministic():
    assert dump_json(generate_corpus(7, 8)) == dump_json(generate_corpus(7, 8))
    assert dump_json(generate_corpus(7, 8)) != dump_json(generate_corpus(8, 8))


@pytest.mark.parametrize("seed", [0, 1, 5])
def test_corpus_validates(seed):
    ws = parse_workspace(dump_json(generate_corpus(seed, 8)))
    assert ws.ok, [str(i) for i in ws.issues]
    assert set(ws.diagrams) == {"tower", "chain3", "down_chain", "down_square"}
    assert all(ws.semilattices[f"{kind}{k}"].size <= 8 for kind in ("union", "ring") for k in range(4))


def test_m3_only_when_it_fits():
    assert "M3" in generate_corpus(0, 5)["semilattices"]
    assert "M3" not in generate_corpus(0, 4)["semilattices"]


def test_ring_stream_is_distributive():
    assert all(is_distributive(S) for S in semilattice_stream(3, 30, 8, distributive=True))


def test_down_sets_run_from_empty_to_full():
    order = random_poset(make_rng(0), 3)
    assert order.diagonal().all()
    assert len(down_sets(order)) >= 4
    assert down_sets(order)[0] == 0 and down_sets(order)[-1] == 0b111


@pytest.mark.parametrize("shape", ["chain", "square"])
def test_downset_diagrams_unfold(shape):
    d = downset_diagram(make_rng(11), 3, shape, name=shape)
    assert validate_diagram(d).ok
    bundle = unfold(promote_to_retracted(d), 2)
    assert verify_unfolding(bundle).ok


def test_chain_tower_needs_one_node(pair_retracted):
    with pytest.raises(LiftPackageInvalid):
        chain_tower_package(unfold(pair_retracted, 2))


def test_chain_tower_needs_a_two_element_hat(three_chain_diagram):
    with pytest.raises(LiftPackageInvalid):
        chain_tower_package(unfold(promote_to_retracted(three_chain_diagram), 2))


def test_cube_tower_needs_rho_to_be_the_identity(three_chain_diagram):
    with pytest.raises(LiftPackageInvalid, match="rho = id"):
        cube_tower_package(unfold(promote_to_retracted(three_chain_diagram), 2))


def test_cube_tower_needs_one_node(pair_retracted):
    with pytest.raises(LiftPackageInvalid):
        cube_tower_package(unfold(pair_retracted, 2))


def test_cube_tower_of_a_two_element_hat_is_a_valid_package(two_chain_diagram):
    lifted = cube_tower_package(unfold(promote_to_retracted(two_chain_diagram), 3))
    assert [L.size for L in lifted.diagram.objects] == [2, 4, 8]
    assert lifted.s(0, 1).map.tolist() == [0, 3]
    assert lifted.s(0, 2).map.tolist() == [0, 1, 6, 7]
